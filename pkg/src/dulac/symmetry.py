"""Finite linear symmetries: equivariance, centralizers, Molien counting.

The normalization machinery respects linear symmetries: if the input
field commutes with a finite matrix group G that commutes with the
semisimple part, the generators of the normalizing transformation can be
group-averaged (Reynolds projection) at every degree, and the resulting
normal form is simultaneously resonant and G-equivariant.

Molien counting is the bookkeeping side: exact power-series inversion of
det(I - z T(g)) per group element gives the number of invariants c0_n
and covariants c1_n at each degree, and the gradient-property check
compares the dimension count c1_n = s*c0_{n+1} against an exact rank
computation of the gradient fields K B^{-1} grad(Phi).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from dulac.algebra import (
    ExactMatrix,
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    MultiIndex,
    PolyVectorField,
    ScalarPoly,
    gr,
    iter_multiindices,
    lie_poisson,
    matrix_apply,
)
from dulac.normalform import NormalFormResult, normalize
from dulac.resonance import InvarianceBasis, Spectrum


def _matrix_key(m: ExactMatrix) -> Tuple:
    return tuple(tuple((e.re, e.im) for e in row) for row in m.entries)


class FiniteGroup:
    """A finite matrix group, verified closed and containing the identity.

    Inverses are located inside the element list at construction (any
    singular element fails here, which is what rules out non-groups).
    """

    __slots__ = ("elements", "inverses", "dim")

    def __init__(self, elements: Sequence[ExactMatrix]):
        elems = list(elements)
        if not elems:
            raise ValueError("a group needs at least the identity")
        n = elems[0].rows
        for m in elems:
            if (m.rows, m.cols) != (n, n):
                raise ValueError("group elements must be square and same-size")
        keys = {_matrix_key(m): k for k, m in enumerate(elems)}
        if len(keys) != len(elems):
            raise ValueError("duplicate group elements")
        ident = ExactMatrix.identity(n)
        if _matrix_key(ident) not in keys:
            raise ValueError("identity element missing")
        inverses: List[ExactMatrix] = []
        for a in elems:
            for b in elems:
                if _matrix_key(a @ b) not in keys:
                    raise ValueError("element set is not closed under products")
            inv = None
            for b in elems:
                if (a @ b) == ident:
                    inv = b
                    break
            if inv is None:
                raise ValueError("an element has no inverse in the set")
            inverses.append(inv)
        object.__setattr__(self, "elements", tuple(elems))
        object.__setattr__(self, "inverses", tuple(inverses))
        object.__setattr__(self, "dim", n)

    def __setattr__(self, name, value):  # pragma: no cover - guard
        raise AttributeError("FiniteGroup is immutable")

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    @classmethod
    def generate(cls, generators: Sequence[ExactMatrix], max_order: int = 4096) -> "FiniteGroup":
        """Close a generating set under multiplication."""
        if not generators:
            raise ValueError("no generators")
        n = generators[0].rows
        ident = ExactMatrix.identity(n)
        found: Dict[Tuple, ExactMatrix] = {_matrix_key(ident): ident}
        order: List[ExactMatrix] = [ident]
        frontier = [ident]
        while frontier:
            nxt: List[ExactMatrix] = []
            for m in frontier:
                for g in generators:
                    prod = m @ g
                    key = _matrix_key(prod)
                    if key not in found:
                        found[key] = prod
                        order.append(prod)
                        nxt.append(prod)
                        if len(found) > max_order:
                            raise ValueError(
                                f"group generation exceeded {max_order} elements; "
                                "is the group finite?"
                            )
            frontier = nxt
        return cls(order)


# ---------------------------------------------------------------------------
# equivariance


def equivariance_check(f: PolyVectorField, b: ExactMatrix) -> Tuple[bool, PolyVectorField]:
    """Infinitesimal equivariance: is {Bx, f} identically zero?

    Returns the boolean together with the bracket itself, so a failing
    check hands back the exact obstruction.
    """
    if (b.rows, b.cols) != (f.dim, f.dim):
        raise ValueError("dimension mismatch")
    residual = lie_poisson(PolyVectorField.linear(b), f)
    return residual.is_zero(), residual


def conjugate_field(t: ExactMatrix, t_inv: ExactMatrix, f: PolyVectorField) -> PolyVectorField:
    """The pushforward T f(T^{-1} x)."""
    n = f.dim
    subs = [
        ScalarPoly(n, {tuple(1 if c == j else 0 for c in range(n)): t_inv.entries[k][j]
                       for j in range(n) if not t_inv.entries[k][j].is_zero()})
        for k in range(n)
    ]
    shifted = f.substitute_components(subs)
    return PolyVectorField(matrix_apply(t, shifted))


def group_equivariance_residual(f: PolyVectorField, group: FiniteGroup) -> PolyVectorField:
    """First nonzero residual T f(T^{-1}x) - f over the group, else zero."""
    for t, t_inv in zip(group.elements, group.inverses):
        res = conjugate_field(t, t_inv, f) - f
        if not res.is_zero():
            return res
    return PolyVectorField.zero(f.dim)


def reynolds_field(group: FiniteGroup, f: PolyVectorField) -> PolyVectorField:
    """Group average of a vector field; exact idempotent projector."""
    acc = PolyVectorField.zero(f.dim)
    for t, t_inv in zip(group.elements, group.inverses):
        acc = acc + conjugate_field(t, t_inv, f)
    return acc.scale(gr(1) / gr(len(group)))


def reynolds_scalar(group: FiniteGroup, p: ScalarPoly) -> ScalarPoly:
    acc = ScalarPoly.zero(p.dim)
    n = p.dim
    for t in group.elements:
        rows = [
            ScalarPoly(n, {tuple(1 if c == j else 0 for c in range(n)): t.entries[k][j]
                           for j in range(n) if not t.entries[k][j].is_zero()})
            for k in range(n)
        ]
        acc = acc + p.substitute(rows)
    return acc * ScalarPoly.constant(n, gr(1) / gr(len(group)))


# ---------------------------------------------------------------------------
# centralizers


def joint_centralizer(mats: Sequence[ExactMatrix]) -> List[ExactMatrix]:
    """Echelon basis of { M : [M, A_k] = 0 for every A_k }."""
    if not mats:
        raise ValueError("no matrices given")
    n = mats[0].rows
    for a in mats:
        if (a.rows, a.cols) != (n, n):
            raise ValueError("matrices must be square and same-size")
    rows: List[List[GaussianRational]] = []
    for a in mats:
        for i in range(n):
            for j in range(n):
                # entry (i,j) of MA - AM as a linear form in M's entries
                row = [GR_ZERO] * (n * n)
                for k in range(n):
                    row[i * n + k] = row[i * n + k] + a.entries[k][j]
                    row[k * n + j] = row[k * n + j] - a.entries[i][k]
                rows.append(row)
    system = ExactMatrix(rows)
    basis = []
    for vec in system.nullspace():
        basis.append(ExactMatrix([[vec[i * n + j] for j in range(n)] for i in range(n)]))
    return basis


# ---------------------------------------------------------------------------
# equivariant normalization


def _check_group_setup(f: PolyVectorField, s: Spectrum, group: FiniteGroup) -> None:
    a = s.matrix()
    for t in group.elements:
        if (t @ a) != (a @ t):
            raise ValueError("group does not commute with the semisimple linear part")
    res = group_equivariance_residual(f, group)
    if not res.is_zero():
        raise ValueError("input field is not equivariant under the group")


def normalize_equivariant(
    f: PolyVectorField, s: Spectrum, group: FiniteGroup, order: int
) -> NormalFormResult:
    """Normalization with every generator projected onto the equivariant
    subspace by exact group averaging before it is applied.

    Because the group commutes with the semisimple part, averaging
    commutes with the homological operator, so the projected generator
    removes the same non-resonant terms; the output is both resonant and
    equivariant.
    """
    _check_group_setup(f, s, group)
    return normalize(f, s, order, projector=lambda h: reynolds_field(group, h))


# ---------------------------------------------------------------------------
# Molien series


def _leibniz_det_series(t: ExactMatrix, order: int) -> List[GaussianRational]:
    """Coefficients of det(I - z T) as a polynomial in z, degrees 0..order."""
    n = t.rows
    out = [GR_ZERO] * (order + 1)
    for perm in itertools.permutations(range(n)):
        inversions = sum(
            1
            for i in range(n)
            for j in range(i + 1, n)
            if perm[i] > perm[j]
        )
        sign = -1 if inversions % 2 else 1
        # product over i of (delta - z t_{i,perm(i)}): expand by popcount
        factors = []
        for i in range(n):
            delta = GR_ONE if perm[i] == i else GR_ZERO
            factors.append((delta, -t.entries[i][perm[i]]))
        poly = [gr(sign)]
        for c0, c1 in factors:
            nxt = [GR_ZERO] * (len(poly) + 1)
            for k, c in enumerate(poly):
                nxt[k] = nxt[k] + c * c0
                nxt[k + 1] = nxt[k + 1] + c * c1
            poly = nxt
        for k in range(min(len(poly), order + 1)):
            out[k] = out[k] + poly[k]
    return out


def _series_inverse(a: List[GaussianRational], order: int) -> List[GaussianRational]:
    assert not a[0].is_zero()
    inv = [GR_ONE / a[0]]
    for k in range(1, order + 1):
        acc = GR_ZERO
        for j in range(1, min(k, len(a) - 1) + 1):
            acc = acc + a[j] * inv[k - j]
        inv.append(-acc / a[0])
    return inv


def _as_count(value: GaussianRational, what: str) -> int:
    if value.im != 0 or value.re.denominator != 1 or value.re < 0:
        raise AssertionError(f"{what} is not a non-negative integer: {value}")
    return int(value.re)


@dataclass(frozen=True)
class MolienTable:
    c0: Tuple[int, ...]
    c1: Tuple[int, ...]

    @property
    def s(self) -> int:
        """Linear-covariant count c1_1."""
        return self.c1[1]


def molien_coefficients(group: FiniteGroup, order: int) -> MolienTable:
    """Invariant and covariant counts per degree from the Molien series.

    c0_n averages [z^n] det(I - zT)^{-1} over the group; c1_n weights the
    same series by the conjugated character.  Both columns must come out
    as non-negative integers — anything else means the input was not a
    group representation.
    """
    if order < 1:
        raise ValueError("order must be at least 1")
    size = gr(len(group))
    c0_acc = [GR_ZERO] * (order + 1)
    c1_acc = [GR_ZERO] * (order + 1)
    for t in group.elements:
        series = _series_inverse(_leibniz_det_series(t, order), order)
        chi = t.trace().conjugate()
        for k in range(order + 1):
            c0_acc[k] = c0_acc[k] + series[k]
            c1_acc[k] = c1_acc[k] + chi * series[k]
    c0 = tuple(_as_count(v / size, f"c0_{k}") for k, v in enumerate(c0_acc))
    c1 = tuple(_as_count(v / size, f"c1_{k}") for k, v in enumerate(c1_acc))
    return MolienTable(c0=c0, c1=c1)


# ---------------------------------------------------------------------------
# brute-force dimensions (the cross-checking route for Molien numbers)


def _monomials(n: int, degree: int) -> List[MultiIndex]:
    return list(iter_multiindices(n, degree))


def _poly_vector(p: ScalarPoly, support: Sequence[MultiIndex]) -> List[GaussianRational]:
    return [p.coefficient(mu) for mu in support]


def invariant_space_dimension(group: FiniteGroup, degree: int) -> int:
    """Dimension of degree-homogeneous G-invariant polynomials, by the
    exact rank of the Reynolds projector on the monomial basis."""
    n = group.dim
    support = _monomials(n, degree)
    rows = []
    for mu in support:
        avg = reynolds_scalar(group, ScalarPoly.monomial(n, mu))
        rows.append(_poly_vector(avg, support))
    return ExactMatrix(rows).rank() if rows else 0


def covariant_space_dimension(group: FiniteGroup, degree: int) -> int:
    """Dimension of degree-homogeneous G-equivariant polynomial fields."""
    n = group.dim
    support = _monomials(n, degree)
    rows = []
    for i in range(n):
        for mu in support:
            avg = reynolds_field(group, PolyVectorField.monomial(n, i, mu))
            vec: List[GaussianRational] = []
            for comp in avg.components:
                vec.extend(_poly_vector(comp, support))
            rows.append(vec)
    return ExactMatrix(rows).rank() if rows else 0


def invariant_basis_polys(group: FiniteGroup, degree: int) -> List[ScalarPoly]:
    """A pruned spanning set of homogeneous invariants of one degree."""
    n = group.dim
    support = _monomials(n, degree)
    polys: List[ScalarPoly] = []
    rows: List[List[GaussianRational]] = []
    rank = 0
    for mu in support:
        avg = reynolds_scalar(group, ScalarPoly.monomial(n, mu))
        if avg.is_zero():
            continue
        candidate = rows + [_poly_vector(avg, support)]
        new_rank = ExactMatrix(candidate).rank()
        if new_rank > rank:
            rows, rank = candidate, new_rank
            polys.append(avg)
    return polys


# ---------------------------------------------------------------------------
# gradient property


@dataclass(frozen=True)
class GradientDegreeRow:
    degree: int
    c1: int
    s_times_c0_next: int
    counting_ok: bool
    gradient_span_dim: int
    rank_ok: bool


def _gram_matrix(group: FiniteGroup) -> ExactMatrix:
    n = group.dim
    acc = ExactMatrix.zeros(n, n)
    for t in group.elements:
        acc = acc + (t.transpose() @ t)
    return acc.scale(gr(1) / gr(len(group)))


def gradient_property_check(
    group: FiniteGroup, order: int, k_basis: Sequence[ExactMatrix]
) -> List[GradientDegreeRow]:
    """Per-degree gradient-property report.

    Two verdicts per degree n: the counting identity c1_n = s*c0_{n+1}
    (which ignores linear dependencies, so it can overcount), and the
    authoritative rank test comparing dim span{K B^{-1} grad(Phi)} over
    linear covariants K and invariants Phi of degree n+1 against c1_n.
    B is the invariant Gram matrix averaging T^T T; it corrects the
    gradient's transformation law for non-orthogonal representations
    (for orthogonal ones B = I and nothing changes).
    """
    for t in group.elements:
        for row in t.entries:
            for e in row:
                if e.im != 0:
                    raise ValueError("gradient test requires a real representation")
    n = group.dim
    table = molien_coefficients(group, order + 1)
    b_inv = _gram_matrix(group).inverse()
    rows: List[GradientDegreeRow] = []
    for deg in range(1, order + 1):
        invariants = invariant_basis_polys(group, deg + 1)
        support = _monomials(n, deg)
        field_rows: List[List[GaussianRational]] = []
        for phi in invariants:
            grad = tuple(phi.diff(i) for i in range(n))
            corrected = matrix_apply(b_inv, grad)
            for k_mat in k_basis:
                field = matrix_apply(k_mat, corrected)
                vec: List[GaussianRational] = []
                for comp in field:
                    vec.extend(_poly_vector(comp, support))
                field_rows.append(vec)
        span_dim = ExactMatrix(field_rows).rank() if field_rows else 0
        c1_n = table.c1[deg]
        target = table.s * table.c0[deg + 1]
        rows.append(
            GradientDegreeRow(
                degree=deg,
                c1=c1_n,
                s_times_c0_next=target,
                counting_ok=(c1_n == target),
                gradient_span_dim=span_dim,
                rank_ok=(span_dim == c1_n),
            )
        )
    return rows


# ---------------------------------------------------------------------------
# symmetric invariants


def symmetric_invariants(
    group: FiniteGroup, basis: InvarianceBasis, order: int
) -> List[ScalarPoly]:
    """Reynolds averages of the monomial invariants, pruned to a linearly
    independent spanning set (generators averaging to zero drop out)."""
    if not basis.generators:
        return []
    n = len(basis.generators[0])
    if n != group.dim:
        raise ValueError("group and invariance basis dimensions differ")
    kept: List[ScalarPoly] = []
    rows: List[List[GaussianRational]] = []
    support_all: List[MultiIndex] = []
    averaged = []
    for sigma in basis.generators:
        if sum(sigma) > order:
            continue
        avg = reynolds_scalar(group, ScalarPoly.monomial(n, sigma))
        if avg.is_zero():
            continue
        averaged.append(avg)
        for mu, _ in avg.sorted_terms():
            if mu not in support_all:
                support_all.append(mu)
    rank = 0
    for avg in averaged:
        candidate = rows + [_poly_vector(avg, support_all)]
        new_rank = ExactMatrix(candidate).rank()
        if new_rank > rank:
            rows, rank = candidate, new_rank
            kept.append(avg)
    return kept
