"""Exact sparse polynomial arithmetic over the Gaussian rationals.

Everything downstream (resonance analysis, normalization, unfolding,
symmetry and convergence reports) is built on four value types defined
here:

* :class:`GaussianRational` -- numbers a + b*i with a, b exact rationals;
* multi-indices -- plain tuples of non-negative ints, ordered graded-lex;
* :class:`ScalarPoly` -- sparse polynomials, a map multi-index -> coefficient;
* :class:`PolyVectorField` -- one ScalarPoly per coordinate;
* :class:`ExactMatrix` -- dense rational-complex matrices with exact
  elimination (rref, nullspace, solve, det, inverse).

All values are immutable after construction and all operations are pure;
nothing here ever rounds.  Floating point appears only in the documented
``evaluate`` conversion used by the numerics harness.
"""

from __future__ import annotations

import math
import re as _re
from fractions import Fraction
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

MultiIndex = Tuple[int, ...]

_RAT = r"[+-]?\d+/\d+"
_GR_PATTERN = _re.compile(rf"^({_RAT})(?:([+-])(\d+/\d+)i)?$")


class GaussianRational:
    """An exact complex number with rational real and imaginary parts.

    Both parts are :class:`fractions.Fraction`, so canonical form
    (positive denominator, reduced) is automatic and equality is
    structural.  Floats are rejected at construction: exactness is the
    whole point.
    """

    __slots__ = ("re", "im")

    def __init__(self, re: int | Fraction = 0, im: int | Fraction = 0) -> None:
        if isinstance(re, float) or isinstance(im, float):
            raise TypeError("GaussianRational parts must be exact (int or Fraction), not float")
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("GaussianRational is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Parse the canonical rational syntax ``a/b`` or ``a/b+c/di``.

        Signs are allowed on the real part; the imaginary part carries its
        sign in the separator (``+``/``-``).  This is the exact inverse of
        :meth:`__str__`.
        """
        m = _GR_PATTERN.match(text.strip())
        if not m:
            raise ValueError(f"malformed rational {text!r} (expected a/b or a/b+c/di)")
        re_part = Fraction(m.group(1))
        if m.group(2) is None:
            return cls(re_part)
        im_part = Fraction(m.group(3))
        if m.group(2) == "-":
            im_part = -im_part
        return cls(re_part, im_part)

    # -- arithmetic ------------------------------------------------------

    def _coerce(self, other: object) -> Optional["GaussianRational"]:
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other)
        return None

    def __add__(self, other: object) -> "GaussianRational":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other: object) -> "GaussianRational":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other: object) -> "GaussianRational":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other: object) -> "GaussianRational":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other: object) -> "GaussianRational":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * o.re + self.im * o.im) / d,
            (self.im * o.re - self.re * o.im) / d,
        )

    def __rtruediv__(self, other: object) -> "GaussianRational":
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __pow__(self, n: int) -> "GaussianRational":
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return GaussianRational(1) / self ** (-n)
        out = GaussianRational(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """Exact squared modulus |z|^2 = re^2 + im^2 (a Fraction)."""
        return self.re * self.re + self.im * self.im

    # -- predicates / conversion -----------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other: object) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    def to_complex(self) -> complex:
        """Documented float conversion: numerator and denominator each to
        nearest double, then divided."""

        def f(x: Fraction) -> float:
            return float(x.numerator) / float(x.denominator)

        return complex(f(self.re), f(self.im))

    def __str__(self) -> str:
        s = f"{self.re.numerator}/{self.re.denominator}"
        if self.im != 0:
            sign = "+" if self.im > 0 else "-"
            a = abs(self.im)
            s += f"{sign}{a.numerator}/{a.denominator}i"
        return s

    def __repr__(self) -> str:
        return f"GaussianRational({self.re!r}, {self.im!r})"


GR_ZERO = GaussianRational(0)
GR_ONE = GaussianRational(1)
GR_I = GaussianRational(0, 1)

Coefficient = GaussianRational | int | Fraction


def gr(value: Coefficient) -> GaussianRational:
    """Coerce an int/Fraction/GaussianRational to GaussianRational."""
    if isinstance(value, GaussianRational):
        return value
    return GaussianRational(value)


# -- multi-index helpers ---------------------------------------------------


def midx_degree(mu: MultiIndex) -> int:
    return sum(mu)

def midx_add(mu: MultiIndex, nu: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(mu, nu))

def midx_sub(mu: MultiIndex, nu: MultiIndex) -> Optional[MultiIndex]:
    """Componentwise difference, or None if any entry would go negative."""
    out = tuple(a - b for a, b in zip(mu, nu))
    return out if all(e >= 0 for e in out) else None

def midx_leq(mu: MultiIndex, nu: MultiIndex) -> bool:
    """Componentwise mu <= nu."""
    return all(a <= b for a, b in zip(mu, nu))

def midx_factorial(mu: MultiIndex) -> int:
    return math.prod(math.factorial(e) for e in mu)

def grlex_key(mu: MultiIndex) -> Tuple[int, Tuple[int, ...]]:
    """Sort key for graded-lexicographic order with x1 > x2 > ... :
    degree first, then lexicographically larger first exponents first."""
    return (sum(mu), tuple(-e for e in mu))

def iter_multiindices(n: int, degree: int) -> Iterator[MultiIndex]:
    """All multi-indices of the given total degree, in graded-lex order."""
    if n == 1:
        yield (degree,)
        return
    for first in range(degree, -1, -1):
        for rest in iter_multiindices(n - 1, degree - first):
            yield (first,) + rest


# -- scalar polynomials -----------------------------------------------------


class ScalarPoly:
    """Sparse exact polynomial: a map multi-index -> nonzero coefficient.

    Zero coefficients are dropped eagerly so dict equality is canonical
    equality.  All serialization orders terms graded-lexicographically.
    """

    __slots__ = ("dim", "terms")

    def __init__(self, dim: int, terms: Optional[Dict[MultiIndex, Coefficient]] = None) -> None:
        if dim < 1:
            raise ValueError("dim must be >= 1")
        clean: Dict[MultiIndex, GaussianRational] = {}
        for mu, c in (terms or {}).items():
            if len(mu) != dim or any(e < 0 for e in mu):
                raise ValueError(f"bad exponent {mu} for dim {dim}")
            cg = gr(c)
            if not cg.is_zero():
                clean[tuple(mu)] = cg
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("ScalarPoly is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "ScalarPoly":
        return cls(dim)

    @classmethod
    def constant(cls, dim: int, c: Coefficient) -> "ScalarPoly":
        return cls(dim, {(0,) * dim: c})

    @classmethod
    def monomial(cls, dim: int, mu: MultiIndex, c: Coefficient = 1) -> "ScalarPoly":
        return cls(dim, {tuple(mu): c})

    @classmethod
    def variable(cls, dim: int, i: int) -> "ScalarPoly":
        mu = tuple(1 if k == i else 0 for k in range(dim))
        return cls(dim, {mu: 1})

    # -- ring operations -------------------------------------------------

    def _check_dim(self, other: "ScalarPoly") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "ScalarPoly") -> "ScalarPoly":
        self._check_dim(other)
        terms = dict(self.terms)
        for mu, c in other.terms.items():
            terms[mu] = terms.get(mu, GR_ZERO) + c
        return ScalarPoly(self.dim, terms)

    def __sub__(self, other: "ScalarPoly") -> "ScalarPoly":
        return self + (-other)

    def __neg__(self) -> "ScalarPoly":
        return ScalarPoly(self.dim, {mu: -c for mu, c in self.terms.items()})

    def __mul__(self, other: "ScalarPoly | Coefficient") -> "ScalarPoly":
        if isinstance(other, ScalarPoly):
            self._check_dim(other)
            terms: Dict[MultiIndex, GaussianRational] = {}
            for mu, cu in self.terms.items():
                for nu, cv in other.terms.items():
                    key = midx_add(mu, nu)
                    prod = cu * cv
                    if key in terms:
                        terms[key] = terms[key] + prod
                    else:
                        terms[key] = prod
            return ScalarPoly(self.dim, terms)
        c = gr(other)
        return ScalarPoly(self.dim, {mu: cc * c for mu, cc in self.terms.items()})

    def __rmul__(self, other: Coefficient) -> "ScalarPoly":
        return self * other

    def pow(self, n: int, truncate_at: Optional[int] = None) -> "ScalarPoly":
        """self**n, optionally truncating every intermediate product."""
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = ScalarPoly.constant(self.dim, 1)
        for _ in range(n):
            out = out * self
            if truncate_at is not None:
                out = out.truncate(truncate_at)
        return out

    def diff(self, i: int) -> "ScalarPoly":
        """Exact partial derivative with respect to variable i (0-based)."""
        terms: Dict[MultiIndex, GaussianRational] = {}
        for mu, c in self.terms.items():
            if mu[i] == 0:
                continue
            nu = list(mu)
            nu[i] -= 1
            terms[tuple(nu)] = c * mu[i]
        return ScalarPoly(self.dim, terms)

    def conjugate(self) -> "ScalarPoly":
        return ScalarPoly(self.dim, {mu: c.conjugate() for mu, c in self.terms.items()})

    # -- degree structure -------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def degree_max(self) -> Optional[int]:
        return max((midx_degree(mu) for mu in self.terms), default=None)

    def degree_min(self) -> Optional[int]:
        return min((midx_degree(mu) for mu in self.terms), default=None)

    def truncate(self, n: int) -> "ScalarPoly":
        return ScalarPoly(self.dim, {mu: c for mu, c in self.terms.items() if midx_degree(mu) <= n})

    def homogeneous_part(self, d: int) -> "ScalarPoly":
        return ScalarPoly(self.dim, {mu: c for mu, c in self.terms.items() if midx_degree(mu) == d})

    def coefficient(self, mu: MultiIndex) -> GaussianRational:
        return self.terms.get(tuple(mu), GR_ZERO)

    def sorted_terms(self) -> List[Tuple[MultiIndex, GaussianRational]]:
        return sorted(self.terms.items(), key=lambda kv: grlex_key(kv[0]))

    # -- composition / evaluation ----------------------------------------

    def substitute(
        self, values: Sequence["ScalarPoly"], truncate_at: Optional[int] = None
    ) -> "ScalarPoly":
        """Substitute values[i] for variable i; exact composition.

        All substituted polynomials must share one ambient dimension,
        which becomes the dimension of the result.  ``truncate_at`` bounds
        every intermediate product (sound whenever callers only need the
        result up to that degree and values have no negative-degree
        surprises, i.e. always, since polynomials have degree >= 0;
        degree-0 parts of ``values`` do influence all degrees, so callers
        that truncate must pass shifts, not general substitutions, when
        they care about exactness of the cut).
        """
        if len(values) != self.dim:
            raise ValueError(f"need {self.dim} substitution values, got {len(values)}")
        if not values:
            raise ValueError("empty substitution")
        new_dim = values[0].dim
        for v in values:
            if v.dim != new_dim:
                raise ValueError("substitution values have mixed dimensions")
        out = ScalarPoly.zero(new_dim)
        for mu, c in self.terms.items():
            term = ScalarPoly.constant(new_dim, c)
            for i, e in enumerate(mu):
                if e:
                    term = term * values[i].pow(e, truncate_at)
                    if truncate_at is not None:
                        term = term.truncate(truncate_at)
            out = out + term
        return out

    def evaluate_exact(self, point: Sequence[Coefficient]) -> GaussianRational:
        if len(point) != self.dim:
            raise ValueError("point length mismatch")
        pt = [gr(p) for p in point]
        total = GR_ZERO
        for mu, c in self.terms.items():
            val = c
            for i, e in enumerate(mu):
                if e:
                    val = val * pt[i] ** e
            total = total + val
        return total

    def evaluate(self, point: Sequence[complex]) -> complex:
        """Floating evaluation; direct monomial-by-monomial accumulation."""
        if len(point) != self.dim:
            raise ValueError("point length mismatch")
        total = 0j
        for mu, c in self.terms.items():
            val = c.to_complex()
            for i, e in enumerate(mu):
                if e:
                    val *= point[i] ** e
            total += val
        return total

    # -- comparison / display ----------------------------------------------

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScalarPoly):
            return NotImplemented
        return self.dim == other.dim and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.dim, frozenset(self.terms.items())))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for mu, c in self.sorted_terms():
            factors = [f"x{i + 1}" + (f"^{e}" if e > 1 else "") for i, e in enumerate(mu) if e]
            body = "*".join(factors)
            cs = str(c)
            if "+" in cs[1:] or "-" in cs[1:]:
                cs = f"({cs})"
            parts.append(f"{cs}*{body}" if body else cs)
        return " + ".join(parts)

    def __repr__(self) -> str:
        return f"ScalarPoly(dim={self.dim}, {str(self)})"


# -- polynomial vector fields -----------------------------------------------


class PolyVectorField:
    """A vector field on C^n with ScalarPoly components (one per coordinate)."""

    __slots__ = ("dim", "components")

    def __init__(self, components: Sequence[ScalarPoly]) -> None:
        if not components:
            raise ValueError("a vector field needs at least one component")
        dim = components[0].dim
        if len(components) != dim:
            raise ValueError(f"{len(components)} components for {dim} variables")
        for c in components:
            if c.dim != dim:
                raise ValueError("components have mixed dimensions")
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "components", tuple(components))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("PolyVectorField is immutable")

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, dim: int) -> "PolyVectorField":
        return cls([ScalarPoly.zero(dim)] * dim)

    @classmethod
    def monomial(cls, dim: int, i: int, mu: MultiIndex, c: Coefficient = 1) -> "PolyVectorField":
        """The field c * x^mu * e_i."""
        comps = [ScalarPoly.zero(dim) for _ in range(dim)]
        comps[i] = ScalarPoly.monomial(dim, mu, c)
        return cls(comps)

    @classmethod
    def from_terms(
        cls, dim: int, entries: Iterable[Tuple[int, MultiIndex, Coefficient]]
    ) -> "PolyVectorField":
        maps: List[Dict[MultiIndex, GaussianRational]] = [dict() for _ in range(dim)]
        for i, mu, c in entries:
            key = tuple(mu)
            maps[i][key] = maps[i].get(key, GR_ZERO) + gr(c)
        return cls([ScalarPoly(dim, m) for m in maps])

    @classmethod
    def linear(cls, matrix: "ExactMatrix") -> "PolyVectorField":
        """The linear field x |-> M x."""
        if matrix.rows != matrix.cols:
            raise ValueError("linear field needs a square matrix")
        n = matrix.rows
        comps = []
        for i in range(n):
            terms: Dict[MultiIndex, GaussianRational] = {}
            for j in range(n):
                c = matrix.entries[i][j]
                if not c.is_zero():
                    mu = tuple(1 if k == j else 0 for k in range(n))
                    terms[mu] = c
            comps.append(ScalarPoly(n, terms))
        return cls(comps)

    # -- structure --------------------------------------------------------

    def linear_part(self) -> "ExactMatrix":
        n = self.dim
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                mu = tuple(1 if k == j else 0 for k in range(n))
                row.append(self.components[i].coefficient(mu))
            rows.append(row)
        return ExactMatrix.from_rows(rows)

    def terms(self) -> Iterator[Tuple[int, MultiIndex, GaussianRational]]:
        """All terms, component-major, graded-lex within each component."""
        for i, comp in enumerate(self.components):
            for mu, c in comp.sorted_terms():
                yield (i, mu, c)

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def degree_max(self) -> Optional[int]:
        degs = [c.degree_max() for c in self.components if not c.is_zero()]
        return max(degs) if degs else None

    def degree_min(self) -> Optional[int]:
        degs = [c.degree_min() for c in self.components if not c.is_zero()]
        return min(degs) if degs else None

    # -- arithmetic -------------------------------------------------------

    def _check_dim(self, other: "PolyVectorField") -> None:
        if self.dim != other.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "PolyVectorField") -> "PolyVectorField":
        self._check_dim(other)
        return PolyVectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "PolyVectorField") -> "PolyVectorField":
        self._check_dim(other)
        return PolyVectorField([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "PolyVectorField":
        return PolyVectorField([-a for a in self.components])

    def scale(self, c: Coefficient) -> "PolyVectorField":
        return PolyVectorField([a * c for a in self.components])

    def scale_poly(self, p: ScalarPoly) -> "PolyVectorField":
        """Multiply every component by the scalar polynomial p."""
        return PolyVectorField([a * p for a in self.components])

    def truncate(self, n: int) -> "PolyVectorField":
        return PolyVectorField([c.truncate(n) for c in self.components])

    def homogeneous_part(self, d: int) -> "PolyVectorField":
        return PolyVectorField([c.homogeneous_part(d) for c in self.components])

    def jacobian(self) -> List[List[ScalarPoly]]:
        return [[ci.diff(j) for j in range(self.dim)] for ci in self.components]

    def substitute_components(
        self, values: Sequence[ScalarPoly], truncate_at: Optional[int] = None
    ) -> Tuple[ScalarPoly, ...]:
        return tuple(c.substitute(values, truncate_at) for c in self.components)

    def evaluate(self, point: Sequence[complex]) -> List[complex]:
        return [c.evaluate(point) for c in self.components]

    def evaluate_exact(self, point: Sequence[Coefficient]) -> List[GaussianRational]:
        return [c.evaluate_exact(point) for c in self.components]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolyVectorField):
            return NotImplemented
        return self.dim == other.dim and self.components == other.components

    def __str__(self) -> str:
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self) -> str:
        return f"PolyVectorField(dim={self.dim}, {str(self)})"


# -- exact matrices -----------------------------------------------------------


class ExactMatrix:
    """Dense matrix of GaussianRational with exact linear algebra."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence[GaussianRational]]) -> None:
        if not entries or not entries[0]:
            raise ValueError("matrix must be non-empty")
        cols = len(entries[0])
        for row in entries:
            if len(row) != cols:
                raise ValueError("ragged matrix rows")
        object.__setattr__(self, "rows", len(entries))
        object.__setattr__(self, "cols", cols)
        object.__setattr__(self, "entries", tuple(tuple(row) for row in entries))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("ExactMatrix is immutable")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[Coefficient]]) -> "ExactMatrix":
        return cls([[gr(x) for x in row] for row in rows])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "ExactMatrix":
        return cls([[GR_ZERO] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "ExactMatrix":
        return cls([[GR_ONE if i == j else GR_ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def diagonal(cls, values: Sequence[Coefficient]) -> "ExactMatrix":
        n = len(values)
        return cls([[gr(values[i]) if i == j else GR_ZERO for j in range(n)] for i in range(n)])

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._same_shape(other)
        return ExactMatrix(
            [
                [a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other: "ExactMatrix") -> "ExactMatrix":
        self._same_shape(other)
        return ExactMatrix(
            [
                [a - b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.entries, other.entries)
            ]
        )

    def __neg__(self) -> "ExactMatrix":
        return ExactMatrix([[-a for a in row] for row in self.entries])

    def scale(self, c: Coefficient) -> "ExactMatrix":
        cg = gr(c)
        return ExactMatrix([[a * cg for a in row] for row in self.entries])

    def __matmul__(self, other: "ExactMatrix") -> "ExactMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = GR_ZERO
                for k in range(self.cols):
                    acc = acc + self.entries[i][k] * other.entries[k][j]
                row.append(acc)
            out.append(row)
        return ExactMatrix(out)

    def matvec(self, v: Sequence[Coefficient]) -> List[GaussianRational]:
        if len(v) != self.cols:
            raise ValueError("vector length mismatch")
        vg = [gr(x) for x in v]
        out = []
        for i in range(self.rows):
            acc = GR_ZERO
            for k in range(self.cols):
                acc = acc + self.entries[i][k] * vg[k]
            out.append(acc)
        return out

    def transpose(self) -> "ExactMatrix":
        return ExactMatrix([[self.entries[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def conjugate_transpose(self) -> "ExactMatrix":
        return ExactMatrix(
            [[self.entries[i][j].conjugate() for i in range(self.rows)] for j in range(self.cols)]
        )

    def trace(self) -> GaussianRational:
        if self.rows != self.cols:
            raise ValueError("trace of a non-square matrix")
        acc = GR_ZERO
        for i in range(self.rows):
            acc = acc + self.entries[i][i]
        return acc

    def commutator(self, other: "ExactMatrix") -> "ExactMatrix":
        return self @ other - other @ self

    def _same_shape(self, other: "ExactMatrix") -> None:
        if self.rows != other.rows or self.cols != other.cols:
            raise ValueError("shape mismatch")

    # -- elimination -------------------------------------------------------

    def rref(self) -> Tuple["ExactMatrix", Tuple[int, ...]]:
        """Reduced row echelon form and the pivot column indices."""
        m = [list(row) for row in self.entries]
        pivots: List[int] = []
        r = 0
        for c in range(self.cols):
            pivot_row = None
            for i in range(r, self.rows):
                if not m[i][c].is_zero():
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            m[r], m[pivot_row] = m[pivot_row], m[r]
            inv = GR_ONE / m[r][c]
            m[r] = [x * inv for x in m[r]]
            for i in range(self.rows):
                if i != r and not m[i][c].is_zero():
                    f = m[i][c]
                    m[i] = [a - f * b for a, b in zip(m[i], m[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return ExactMatrix(m), tuple(pivots)

    def rank(self) -> int:
        return len(self.rref()[1])

    def nullspace(self) -> List[List[GaussianRational]]:
        """Deterministic basis of the right null space (one vector per free
        column, that free variable set to 1, in ascending column order)."""
        red, pivots = self.rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        basis = []
        for fc in free:
            v = [GR_ZERO] * self.cols
            v[fc] = GR_ONE
            for r, pc in enumerate(pivots):
                v[pc] = -red.entries[r][fc]
            basis.append(v)
        return basis

    def solve(self, b: Sequence[Coefficient]) -> Optional[List[GaussianRational]]:
        """One exact solution of self @ x = b (free variables = 0), or None
        if the system is inconsistent."""
        if len(b) != self.rows:
            raise ValueError("rhs length mismatch")
        aug = ExactMatrix(
            [list(self.entries[i]) + [gr(b[i])] for i in range(self.rows)]
        )
        red, pivots = aug.rref()
        if self.cols in pivots:
            return None
        x = [GR_ZERO] * self.cols
        for r, pc in enumerate(pivots):
            x[pc] = red.entries[r][self.cols]
        return x

    def inverse(self) -> "ExactMatrix":
        if self.rows != self.cols:
            raise ValueError("inverse of a non-square matrix")
        n = self.rows
        aug = ExactMatrix(
            [
                list(self.entries[i]) + [GR_ONE if j == i else GR_ZERO for j in range(n)]
                for i in range(n)
            ]
        )
        red, pivots = aug.rref()
        if tuple(pivots) != tuple(range(n)):
            raise ValueError("matrix is singular")
        return ExactMatrix([list(red.entries[i][n:]) for i in range(n)])

    def det(self) -> GaussianRational:
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        m = [list(row) for row in self.entries]
        n = self.rows
        det = GR_ONE
        for c in range(n):
            pivot_row = None
            for i in range(c, n):
                if not m[i][c].is_zero():
                    pivot_row = i
                    break
            if pivot_row is None:
                return GR_ZERO
            if pivot_row != c:
                m[c], m[pivot_row] = m[pivot_row], m[c]
                det = -det
            det = det * m[c][c]
            inv = GR_ONE / m[c][c]
            for i in range(c + 1, n):
                if not m[i][c].is_zero():
                    f = m[i][c] * inv
                    m[i] = [a - f * b for a, b in zip(m[i], m[c])]
        return det

    def is_diagonal(self) -> bool:
        return all(
            self.entries[i][j].is_zero()
            for i in range(self.rows)
            for j in range(self.cols)
            if i != j
        )

    def diagonal_entries(self) -> List[GaussianRational]:
        return [self.entries[i][i] for i in range(min(self.rows, self.cols))]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExactMatrix):
            return NotImplemented
        return self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __str__(self) -> str:
        return "\n".join("  ".join(str(x) for x in row) for row in self.entries)

    def __repr__(self) -> str:
        return f"ExactMatrix({self.rows}x{self.cols})"


def matrix_apply(m: ExactMatrix, polys: Sequence[ScalarPoly]) -> Tuple[ScalarPoly, ...]:
    """Linear combination of polynomials by an exact matrix: (M p)_i."""
    if m.cols != len(polys):
        raise ValueError("matrix/vector size mismatch")
    dim = polys[0].dim
    out = []
    for i in range(m.rows):
        acc = ScalarPoly.zero(dim)
        for j in range(m.cols):
            c = m.entries[i][j]
            if not c.is_zero():
                acc = acc + polys[j] * c
        out.append(acc)
    return tuple(out)


# -- the operations the rest of the engine is built on -----------------------


def directional_derivative(f: PolyVectorField, p: ScalarPoly) -> ScalarPoly:
    """The derivative of the scalar p along the field f: sum_k f^k dp/dx_k."""
    if f.dim != p.dim:
        raise ValueError(f"dimension mismatch: field dim {f.dim}, scalar dim {p.dim}")
    acc = ScalarPoly.zero(p.dim)
    for k in range(f.dim):
        fk = f.components[k]
        if not fk.is_zero():
            acc = acc + fk * p.diff(k)
    return acc


def lie_poisson(f: PolyVectorField, g: PolyVectorField) -> PolyVectorField:
    """The bracket {f,g}^i = (f . grad) g^i - (g . grad) f^i, exact."""
    if f.dim != g.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {g.dim}")
    comps = [
        directional_derivative(f, g.components[i]) - directional_derivative(g, f.components[i])
        for i in range(f.dim)
    ]
    return PolyVectorField(comps)


def bargman_inner(u: PolyVectorField, v: PolyVectorField) -> GaussianRational:
    """Monomial inner product (x^mu e_i, x^nu e_l) = delta delta mu!,
    conjugate-linear in the first argument."""
    if u.dim != v.dim:
        raise ValueError(f"dimension mismatch: {u.dim} vs {v.dim}")
    acc = GR_ZERO
    for i in range(u.dim):
        ui = u.components[i].terms
        vi = v.components[i].terms
        small, big = (ui, vi) if len(ui) <= len(vi) else (vi, ui)
        for mu in small:
            if mu in big:
                acc = acc + ui[mu].conjugate() * vi[mu] * midx_factorial(mu)
    return acc


def truncate(f: PolyVectorField, n: int) -> PolyVectorField:
    """Drop all terms of total degree > n."""
    if n < 0:
        raise ValueError("truncation degree must be >= 0")
    return f.truncate(n)


def evaluate(f: PolyVectorField, point: Sequence[complex]) -> List[complex]:
    """Floating-point evaluation of the field at a point."""
    return f.evaluate(point)


def _shift_polys(h: PolyVectorField) -> List[ScalarPoly]:
    """The substitution list for x = y + h(y)."""
    return [ScalarPoly.variable(h.dim, i) + h.components[i] for i in range(h.dim)]


def compose_shift(f: PolyVectorField, h: PolyVectorField, n: int) -> PolyVectorField:
    """Push f forward through the near-identity change x = y + h(y).

    Returns g(y) = (I + Dh)^{-1} f(y + h(y)) as a polynomial truncated to
    total degree <= n.  The Jacobian inverse is the geometric series
    I - Dh + (Dh)^2 - ..., which terminates under truncation because every
    entry of Dh has degree >= 1 (h is near-identity: min degree >= 2).
    """
    if f.dim != h.dim:
        raise ValueError(f"dimension mismatch: {f.dim} vs {h.dim}")
    if n < 1:
        raise ValueError("degree bound must be >= 1")
    if not h.is_zero():
        dmin = h.degree_min()
        if dmin is not None and dmin < 2:
            raise ValueError(f"shift must have minimum degree >= 2, found degree {dmin}")
    if h.is_zero():
        return f.truncate(n)

    shift = _shift_polys(h)
    fs = [c.substitute(shift, truncate_at=n) for c in f.components]

    dh = h.jacobian()
    # accumulate sum_j (-Dh)^j fs; each multiplication raises min degree
    total = list(fs)
    current = fs
    while True:
        nxt = []
        any_nonzero = False
        for i in range(f.dim):
            acc = ScalarPoly.zero(f.dim)
            for k in range(f.dim):
                if not dh[i][k].is_zero() and not current[k].is_zero():
                    acc = acc - dh[i][k] * current[k]
            acc = acc.truncate(n)
            if not acc.is_zero():
                any_nonzero = True
            nxt.append(acc)
        if not any_nonzero:
            break
        total = [a + b for a, b in zip(total, nxt)]
        current = nxt
    return PolyVectorField([c.truncate(n) for c in total])


def invert_shift(h: PolyVectorField, n: int) -> PolyVectorField:
    """The formal inverse shift k with (id + h) o (id + k) = id up to degree n.

    Fixed-point iteration k <- -h(y + k(y)) truncated at n; converges in at
    most n steps since h has minimum degree >= 2.
    """
    if h.is_zero():
        return PolyVectorField.zero(h.dim)
    dmin = h.degree_min()
    if dmin is not None and dmin < 2:
        raise ValueError("shift must have minimum degree >= 2")
    k = PolyVectorField.zero(h.dim)
    for _ in range(n + 1):
        shift = _shift_polys(k)
        nk = PolyVectorField(
            [(-c).substitute(shift, truncate_at=n) for c in h.components]
        ).truncate(n)
        if nk == k:
            break
        k = nk
    return k
