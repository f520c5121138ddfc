"""Unfolding of a normal form over its orbit space.

From the invariance relations (φ_a = x^σ_a) and sporadic resonances
(w_i = x^μ_i) this module rewrites a verified normal form as

    ẋ = F(φ)·x + B(φ)·w
    ẇ = G(φ)·w + D(φ)·x
    φ̇ = h(φ)

with every block's entries polynomials in φ alone.  D is the x-coupling
of the w-block; it vanishes in every textbook example (the display form
ẇ = G(φ)w) but is genuinely needed for some spectra, and the general
statement being realized is linearity in (x, w) jointly.

Also here: exact asymptotic (spontaneous) linearization — real roots of
h on a one-dimensional orbit space, rational roots exactly and
irrational ones by Sturm isolation, stability from the exact sign of h′.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Set, Tuple

from dulac.algebra import (
    ExactMatrix,
    GR_ZERO,
    GaussianRational,
    MultiIndex,
    PolyVectorField,
    ScalarPoly,
    directional_derivative,
    gr,
    midx_leq,
    midx_sub,
)
from dulac.normalform import NormalFormResult, verify_normal_form
from dulac.resonance import InvarianceBasis, ResonanceReport, Spectrum

PolyMatrix = Tuple[Tuple[ScalarPoly, ...], ...]


@dataclass(frozen=True)
class InvariantSet:
    """Invariant coordinates I_a(x) spanning the orbit space.

    Pipeline-built sets are monomial (exponents carries the σ_a);
    hand-built sets may use general polynomial invariants and leave
    exponents as None.  The nonneg flags mark squared-norm-type
    invariants whose image on real orbits is [0, ∞).
    """

    dim: int
    generators: Tuple[ScalarPoly, ...]
    exponents: Optional[Tuple[MultiIndex, ...]] = None
    nonneg: Tuple[bool, ...] = ()

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def phi_dim(self) -> int:
        """Ambient dimension for φ-polynomials (1 even when r = 0, so
        constants have somewhere to live)."""
        return max(self.r, 1)


@dataclass(frozen=True)
class AuxiliarySet:
    """Auxiliary variables w_i = R_i(x), one per sporadic resonance;
    components record which x_i each w evolves like."""

    dim: int
    components: Tuple[int, ...]
    exponents: Tuple[MultiIndex, ...]

    @property
    def s(self) -> int:
        return len(self.components)

    def monomials(self) -> Tuple[ScalarPoly, ...]:
        return tuple(
            ScalarPoly.monomial(self.dim, mu) for mu in self.exponents
        )


@dataclass(frozen=True)
class UnfoldedSystem:
    spectrum: Spectrum
    ident_phi: InvariantSet
    ident_w: AuxiliarySet
    F: PolyMatrix  # n×n over φ
    B: PolyMatrix  # n×s over φ
    G: PolyMatrix  # s×s over φ
    D: PolyMatrix  # s×n over φ (zero in the regular display form)
    h: Tuple[ScalarPoly, ...]  # r entries over φ

    @property
    def dim(self) -> int:
        return self.spectrum.dim

    @property
    def phi_dim(self) -> int:
        return self.ident_phi.phi_dim

    def d_is_zero(self) -> bool:
        return all(p.is_zero() for row in self.D for p in row)


# ---------------------------------------------------------------------------
# invariants and their evolution


def build_invariants(
    basis: InvarianceBasis, spectrum: Optional[Spectrum] = None
) -> InvariantSet:
    """One monomial invariant x^σ per invariance generator."""
    if not basis.complete:
        raise ValueError("invariance basis is incomplete")
    if basis.generators:
        dim = len(basis.generators[0])
    elif spectrum is not None:
        dim = spectrum.dim
    else:
        raise ValueError("empty basis needs an explicit spectrum for its dimension")
    gens = tuple(ScalarPoly.monomial(dim, s) for s in basis.generators)
    nonneg = []
    for sigma in basis.generators:
        flag = False
        if spectrum is not None and sum(sigma) == 2:
            support = [k for k, e in enumerate(sigma) if e]
            if len(support) == 2:
                p, q = support
                flag = spectrum.eigenvalues[q] == spectrum.eigenvalues[p].conjugate()
            else:
                (p,) = support
                flag = spectrum.eigenvalues[p].im == 0
        nonneg.append(flag)
    return InvariantSet(
        dim=dim, generators=gens, exponents=basis.generators, nonneg=tuple(nonneg)
    )


def _grlex_greatest(candidates: Sequence[Tuple[int, MultiIndex]]) -> Tuple[int, MultiIndex]:
    return max(candidates, key=lambda kg: (sum(kg[1]), kg[1]))


def factor_over_monoid(
    xi: MultiIndex, generators: Sequence[MultiIndex]
) -> Optional[MultiIndex]:
    """Greedy factorization of x^ξ into a product of generator monomials.

    Picks the graded-lex-greatest dividing generator each round; for a
    complete basis and ξ in the monoid this cannot get stuck (the
    leftover always stays in the monoid).  Returns the φ-exponent vector,
    or None when ξ is not a product of generators.
    """
    counts = [0] * len(generators)
    rem = xi
    while any(rem):
        candidates = [
            (k, g) for k, g in enumerate(generators) if midx_leq(g, rem)
        ]
        if not candidates:
            return None
        k, g = _grlex_greatest(candidates)
        counts[k] += 1
        rem = midx_sub(rem, g)  # type: ignore[assignment]
    return tuple(counts)


def _phi_monomial(inv: InvariantSet, counts: MultiIndex, c: GaussianRational) -> ScalarPoly:
    if inv.r == 0:
        return ScalarPoly.constant(1, c)
    return ScalarPoly.monomial(inv.phi_dim, counts, c)


def invariant_evolution(nf: PolyVectorField, inv: InvariantSet) -> List[ScalarPoly]:
    """φ̇_a = ∇I_a · nf rewritten exactly as polynomials in φ.

    Requires a monomial invariant set; every monomial of the derivative
    must factor over the set's exponents (guaranteed for complete bases,
    the caller's responsibility for hand-restricted ones).
    """
    if inv.exponents is None:
        raise ValueError("invariant evolution needs a monomial invariant set")
    out: List[ScalarPoly] = []
    for a, sigma in enumerate(inv.exponents):
        z = directional_derivative(nf, ScalarPoly.monomial(inv.dim, sigma))
        phi_poly = ScalarPoly.zero(inv.phi_dim)
        for xi, c in z.terms.items():
            counts = factor_over_monoid(xi, inv.exponents)
            if counts is None:
                raise RuntimeError(
                    f"internal consistency: derivative of invariant {a + 1} "
                    f"contains x^{xi}, not a product of invariant monomials"
                )
            phi_poly = phi_poly + _phi_monomial(inv, counts, c)
        out.append(phi_poly)
    return out


# ---------------------------------------------------------------------------
# the unfolding


def _zero_matrix(rows: int, cols: int, dim: int) -> List[List[ScalarPoly]]:
    return [[ScalarPoly.zero(dim) for _ in range(cols)] for _ in range(rows)]


def _freeze(m: List[List[ScalarPoly]]) -> PolyMatrix:
    return tuple(tuple(row) for row in m)


def build_unfolding(nf: NormalFormResult, report: ResonanceReport) -> UnfoldedSystem:
    """Rewrite a verified normal form in the unfolded (x, w, φ) variables.

    Every nonlinear term c·x^μ e_i of the normal form is factored as
    (invariant monomial)·x_m with λ_m = λ_i — preferring m = i — giving
    F, or as (invariant monomial)·w_j through a sporadic exponent, giving
    B.  The ẇ rows factor the exact derivative ∇R_i·nf the same way,
    preferring the sporadic route (G) and falling back to the x route
    (D).  A term fitting no route is an internal-consistency error.
    """
    if nf.spectrum != report.spectrum:
        raise ValueError("normal form and resonance report disagree on the spectrum")
    if not report.invariance_basis.complete:
        raise ValueError("resonance report carries an incomplete invariance basis")
    if report.max_degree < nf.order:
        raise ValueError(
            f"resonance report only reaches degree {report.max_degree}, "
            f"normal form is truncated at {nf.order}"
        )
    if not verify_normal_form(nf).ok:
        raise ValueError("normal form fails verification; refusing to unfold")

    s = nf.spectrum
    n = s.dim
    inv = build_invariants(report.invariance_basis, s)
    aux = AuxiliarySet(
        dim=n,
        components=tuple(r.component for r in report.sporadic),
        exponents=tuple(r.exponent for r in report.sporadic),
    )
    lam = s.eigenvalues
    gens = inv.exponents or ()

    F = _zero_matrix(n, n, inv.phi_dim)
    B = _zero_matrix(n, aux.s, inv.phi_dim)
    G = _zero_matrix(aux.s, aux.s, inv.phi_dim)
    D = _zero_matrix(aux.s, n, inv.phi_dim)

    def factor_resonant_term(
        i_eig: GaussianRational, xi: MultiIndex, c: GaussianRational, prefer: int
    ) -> Tuple[str, int, ScalarPoly]:
        """Factor c·x^ξ (with ξ·λ = i_eig) as invariant·x_m or invariant·w_j."""
        order_m = [prefer] + [m for m in range(n) if m != prefer]
        for m in order_m:
            if lam[m] == i_eig and xi[m] >= 1:
                rest = midx_sub(xi, tuple(1 if k == m else 0 for k in range(n)))
                counts = factor_over_monoid(rest, gens)  # type: ignore[arg-type]
                if counts is not None:
                    return "x", m, _phi_monomial(inv, counts, c)
        for j in range(aux.s):
            if lam[aux.components[j]] == i_eig and midx_leq(aux.exponents[j], xi):
                rest = midx_sub(xi, aux.exponents[j])
                counts = factor_over_monoid(rest, gens)  # type: ignore[arg-type]
                if counts is not None:
                    return "w", j, _phi_monomial(inv, counts, c)
        raise RuntimeError(
            f"internal consistency: resonant exponent {xi} (eigenvalue {i_eig}) "
            "factors through neither an x route nor a sporadic route"
        )

    # x-block
    for i in range(n):
        F[i][i] = F[i][i] + _phi_monomial(inv, (0,) * inv.phi_dim, lam[i])
    for i, mu, c in (nf.normal_form - PolyVectorField.linear(s.matrix())).terms():
        kind, idx, poly = factor_resonant_term(lam[i], mu, c, prefer=i)
        if kind == "x":
            F[i][idx] = F[i][idx] + poly
        else:
            B[i][idx] = B[i][idx] + poly

    # w-block, preferring the sporadic route
    for si in range(aux.s):
        ci = aux.components[si]
        z = directional_derivative(
            nf.normal_form, ScalarPoly.monomial(n, aux.exponents[si])
        )
        for xi, c in z.terms.items():
            placed = False
            for j in range(aux.s):
                if lam[aux.components[j]] == lam[ci] and midx_leq(aux.exponents[j], xi):
                    rest = midx_sub(xi, aux.exponents[j])
                    counts = factor_over_monoid(rest, gens)  # type: ignore[arg-type]
                    if counts is not None:
                        G[si][j] = G[si][j] + _phi_monomial(inv, counts, c)
                        placed = True
                        break
            if placed:
                continue
            kind, idx, poly = factor_resonant_term(lam[ci], xi, c, prefer=ci)
            if kind != "x":  # pragma: no cover - sporadic route already tried
                raise RuntimeError("unexpected factorization state")
            D[si][idx] = D[si][idx] + poly

    h = invariant_evolution(nf.normal_form, inv) if inv.r else []
    return UnfoldedSystem(
        spectrum=s,
        ident_phi=inv,
        ident_w=aux,
        F=_freeze(F),
        B=_freeze(B),
        G=_freeze(G),
        D=_freeze(D),
        h=tuple(h),
    )


# ---------------------------------------------------------------------------
# verification by back-substitution


@dataclass(frozen=True)
class UnfoldingVerification:
    x_block_ok: bool
    w_block_ok: bool
    phi_block_ok: bool
    offenders: Tuple[Tuple[str, int], ...]  # (block, row) with nonzero residual

    @property
    def ok(self) -> bool:
        return self.x_block_ok and self.w_block_ok and self.phi_block_ok


def _substitute_phi(p: ScalarPoly, inv: InvariantSet) -> ScalarPoly:
    """Evaluate a φ-polynomial at φ_a = I_a(x); result lives in x-space."""
    if inv.r == 0:
        c = p.coefficient((0,) * p.dim)
        return ScalarPoly.constant(inv.dim, c)
    return p.substitute(list(inv.generators))


def verify_unfolding(u: UnfoldedSystem, nf: PolyVectorField) -> UnfoldingVerification:
    """Symbolic back-substitution w := R(x), φ := I(x) into all blocks.

    The x-block must reproduce the normal form, the w-block the exact
    derivatives ∇R_i·nf, and the φ-block the derivatives ∇I_a·nf — all
    residuals identically zero, no tolerances involved.
    """
    n = u.dim
    inv, aux = u.ident_phi, u.ident_w
    w_polys = aux.monomials()
    xs = [ScalarPoly.variable(n, k) for k in range(n)]
    offenders: List[Tuple[str, int]] = []

    x_ok = True
    for i in range(n):
        acc = ScalarPoly.zero(n)
        for j in range(n):
            if not u.F[i][j].is_zero():
                acc = acc + _substitute_phi(u.F[i][j], inv) * xs[j]
        for j in range(aux.s):
            if not u.B[i][j].is_zero():
                acc = acc + _substitute_phi(u.B[i][j], inv) * w_polys[j]
        if acc != nf.components[i]:
            x_ok = False
            offenders.append(("x", i))

    w_ok = True
    for si in range(aux.s):
        acc = ScalarPoly.zero(n)
        for j in range(aux.s):
            if not u.G[si][j].is_zero():
                acc = acc + _substitute_phi(u.G[si][j], inv) * w_polys[j]
        for m in range(n):
            if not u.D[si][m].is_zero():
                acc = acc + _substitute_phi(u.D[si][m], inv) * xs[m]
        target = directional_derivative(nf, w_polys[si])
        if acc != target:
            w_ok = False
            offenders.append(("w", si))

    phi_ok = True
    for a in range(inv.r):
        acc = _substitute_phi(u.h[a], inv)
        target = directional_derivative(nf, inv.generators[a])
        if acc != target:
            phi_ok = False
            offenders.append(("phi", a))

    return UnfoldingVerification(x_ok, w_ok, phi_ok, tuple(offenders))


# ---------------------------------------------------------------------------
# exact univariate root machinery (Fractions throughout)

Poly1 = List[Fraction]  # ascending coefficients


def _trim(p: Poly1) -> Poly1:
    while p and p[-1] == 0:
        p.pop()
    return p


def _eval1(p: Poly1, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def _deriv1(p: Poly1) -> Poly1:
    return _trim([c * k for k, c in enumerate(p)][1:])


def _rem1(a: Poly1, b: Poly1) -> Poly1:
    r = _trim(list(a))
    while r and len(r) >= len(b):
        factor = r[-1] / b[-1]
        shift = len(r) - len(b)
        for k in range(len(b)):
            r[shift + k] -= factor * b[k]
        r.pop()
        _trim(r)
    return r


def _gcd1(a: Poly1, b: Poly1) -> Poly1:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _rem1(a, b)
    if a:
        lead = a[-1]
        a = [c / lead for c in a]
    return a


def _div_exact(a: Poly1, b: Poly1) -> Poly1:
    """Exact division (remainder must vanish)."""
    q: Poly1 = [Fraction(0)] * (len(a) - len(b) + 1)
    r = list(a)
    while _trim(r) and len(r) >= len(b):
        factor = r[-1] / b[-1]
        shift = len(r) - len(b)
        q[shift] = factor
        for k in range(len(b)):
            r[shift + k] -= factor * b[k]
        r.pop()
    assert not _trim(r), "non-exact polynomial division"
    return _trim(q)


def _sturm_chain(p: Poly1) -> List[Poly1]:
    chain = [list(p), _deriv1(p)]
    while chain[-1]:
        nxt = [-c for c in _rem1(chain[-2], chain[-1])]
        if not nxt:
            break
        chain.append(nxt)
    return [c for c in chain if c]


def _sign_changes(chain: List[Poly1], x: Fraction) -> int:
    signs = []
    for p in chain:
        v = _eval1(p, x)
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def _count_roots(chain: List[Poly1], a: Fraction, b: Fraction) -> int:
    """Distinct real roots in (a, b]."""
    return _sign_changes(chain, a) - _sign_changes(chain, b)


def _cauchy_bound(p: Poly1) -> Fraction:
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=Fraction(0))


def _rational_roots(p: Poly1) -> List[Fraction]:
    """All rational roots of p (square-free input expected), ascending."""
    scale = math.lcm(*(c.denominator for c in p))
    ints = [int(c * scale) for c in p]
    found: Set[Fraction] = set()
    if ints and ints[0] == 0:
        found.add(Fraction(0))
    while ints and ints[0] == 0:
        ints = ints[1:]
    if not ints:
        return sorted(found)
    a0, an = abs(ints[0]), abs(ints[-1])

    def divisors(v: int) -> List[int]:
        out = []
        d = 1
        while d * d <= v:
            if v % d == 0:
                out.extend([d, v // d])
            d += 1
        return sorted(set(out))

    for num in divisors(a0):
        for den in divisors(an):
            for cand in (Fraction(num, den), Fraction(-num, den)):
                if _eval1(p, cand) == 0:
                    found.add(cand)
    return sorted(found)


def _deflate(p: Poly1, root: Fraction) -> Poly1:
    """Divide out (x − root) as many times as it divides p."""
    while _eval1(p, root) == 0 and len(p) > 1:
        p = _div_exact(p, [-root, Fraction(1)])
    return p


def _isolate_irrational(q: Poly1, lo: Fraction, hi: Fraction) -> List[Tuple[Fraction, Fraction]]:
    """Isolating intervals (a, b] for the roots of square-free q in (lo, hi];
    q must have no rational roots, so endpoints are always sign-safe."""
    chain = _sturm_chain(q)
    out: List[Tuple[Fraction, Fraction]] = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        cnt = _count_roots(chain, a, b)
        if cnt == 0:
            continue
        if cnt == 1:
            out.append((a, b))
            continue
        mid = (a + b) / 2
        stack.append((a, mid))
        stack.append((mid, b))
    return sorted(out)


# ---------------------------------------------------------------------------
# asymptotic linearization


@dataclass(frozen=True)
class AsymptoticRegime:
    """One candidate asymptotic state of the orbit-space flow."""

    phi_star: Optional[Tuple[GaussianRational, ...]]  # exact point when rational
    interval: Optional[Tuple[Fraction, Fraction]]  # isolating interval otherwise
    stability: str  # stable | unstable | degenerate | degenerate continuum | trivial | not classified
    frozen_F: Optional[ExactMatrix]
    frozen_G: Optional[ExactMatrix]


def _real_coeffs(p: ScalarPoly) -> Poly1:
    deg = p.degree_max()
    out = [Fraction(0)] * ((deg or 0) + 1)
    for mu, c in p.terms.items():
        if c.im != 0:
            raise ValueError("orbit-space field has non-real coefficients")
        out[mu[0]] = c.re
    return _trim(out)


def _evaluate_matrix(
    m: PolyMatrix, point: Sequence[GaussianRational]
) -> Optional[ExactMatrix]:
    if not m or not m[0]:
        return None
    return ExactMatrix(
        [[p.evaluate_exact(point) for p in row] for row in m]
    )


def _classify_rational(dh: Poly1, root: Fraction) -> str:
    v = _eval1(dh, root)
    if v < 0:
        return "stable"
    if v > 0:
        return "unstable"
    return "degenerate"


def _classify_interval(
    target: Poly1, h: Poly1, dh: Poly1, interval: Tuple[Fraction, Fraction]
) -> Tuple[str, Tuple[Fraction, Fraction]]:
    """Sign of h′ at the single root of `target` inside the interval.

    `target` is the square-free, rational-root-free factor of h whose
    root the interval isolates; it has no rational roots, so every
    bisection midpoint is sign-safe.  The interval shrinks until h′ is
    root-free on it, making the endpoint sign of h′ exact.  A root
    shared with h′ (a multiple root of h) is degenerate.
    """
    a, b = interval
    target_chain = _sturm_chain(list(target))

    def keep_root_half() -> None:
        nonlocal a, b
        mid = (a + b) / 2
        if _count_roots(target_chain, a, mid) == 1:
            b = mid
        else:
            a = mid

    common = _gcd1(list(h), list(dh))
    if len(common) > 1:
        shared = _gcd1(list(target), common)
        if len(shared) > 1:
            shared_chain = _sturm_chain(shared)
            if _count_roots(shared_chain, a, b) > 0:
                return "degenerate", (a, b)
        # a *different* multiple root may sit inside; shrink past it
        common_chain = _sturm_chain(common)
        while _count_roots(common_chain, a, b) > 0:
            keep_root_half()
    dh_chain = _sturm_chain(list(dh))
    while _count_roots(dh_chain, a, b) > 0:
        keep_root_half()
    v = _eval1(dh, b)
    if v < 0:
        return "stable", (a, b)
    if v > 0:
        return "unstable", (a, b)
    return "degenerate", (a, b)  # pragma: no cover - excluded by the loops above


def asymptotic_linearization(
    u: UnfoldedSystem,
    candidate: Optional[Sequence[GaussianRational]] = None,
) -> List[AsymptoticRegime]:
    """Fixed points of φ̇ = h(φ) with stability and frozen linear blocks.

    One-dimensional orbit spaces are handled completely and exactly:
    rational roots by the rational-root theorem, irrational ones by
    Sturm isolating intervals (whose frozen blocks are omitted — an
    irrational φ* has no exact matrix), stability by the certified sign
    of h′.  Squared-norm invariants restrict attention to φ ≥ 0.  Higher
    orbit-space dimension requires a user-supplied candidate point,
    which is verified exactly and left unclassified.
    """
    r = u.ident_phi.r
    if r == 0:
        return [
            AsymptoticRegime(
                phi_star=(),
                interval=None,
                stability="trivial",
                frozen_F=_evaluate_matrix(u.F, [GR_ZERO]),
                frozen_G=_evaluate_matrix(u.G, [GR_ZERO]),
            )
        ]
    if r > 1:
        if candidate is None:
            raise ValueError(
                f"orbit space has dimension {r}; supply a candidate fixed point"
            )
        point = [gr(c) for c in candidate]
        if len(point) != r:
            raise ValueError(f"candidate must have {r} coordinates")
        for a, ha in enumerate(u.h):
            value = ha.evaluate_exact(point)
            if not value.is_zero():
                raise ValueError(
                    f"candidate is not a fixed point: h_{a + 1} evaluates to {value}"
                )
        return [
            AsymptoticRegime(
                phi_star=tuple(point),
                interval=None,
                stability="not classified",
                frozen_F=_evaluate_matrix(u.F, point),
                frozen_G=_evaluate_matrix(u.G, point),
            )
        ]

    if candidate is not None:
        point = [gr(c) for c in candidate]
        for ha in u.h:
            if not ha.evaluate_exact(point).is_zero():
                raise ValueError("candidate is not a fixed point")

    h = _real_coeffs(u.h[0])
    nonneg = bool(u.ident_phi.nonneg and u.ident_phi.nonneg[0])
    if not h:
        return [
            AsymptoticRegime(
                phi_star=None,
                interval=None,
                stability="degenerate continuum",
                frozen_F=None,
                frozen_G=None,
            )
        ]
    dh = _deriv1(list(h))

    square_free = _div_exact(list(h), _gcd1(list(h), list(dh))) if len(h) > 2 else list(h)
    rational = _rational_roots(square_free)
    remaining = list(square_free)
    for root in rational:
        remaining = _deflate(remaining, root)

    regimes: List[AsymptoticRegime] = []
    for root in rational:
        if nonneg and root < 0:
            continue
        point = (GaussianRational(root),)
        regimes.append(
            AsymptoticRegime(
                phi_star=point,
                interval=None,
                stability=_classify_rational(dh, root),
                frozen_F=_evaluate_matrix(u.F, point),
                frozen_G=_evaluate_matrix(u.G, point),
            )
        )
    if len(remaining) > 1:
        bound = _cauchy_bound(remaining)
        lo = Fraction(0) if nonneg else -bound
        for interval in _isolate_irrational(remaining, lo, bound):
            stability, shrunk = _classify_interval(remaining, h, dh, interval)
            regimes.append(
                AsymptoticRegime(
                    phi_star=None,
                    interval=shrunk,
                    stability=stability,
                    frozen_F=None,
                    frozen_G=None,
                )
            )
    return regimes
