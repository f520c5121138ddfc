"""Normalization pipeline: homological operator, per-degree solves,
iterated near-identity shifts, verification, condition-α detection,
centralizer decomposition, and real/complex plumbing for rotation blocks.

Degree convention: everything here speaks in polynomial degree d (a
degree-d shift handles the degree-d terms of the field); truncation
degree N is a hard parameter and degrees > N are left unnormalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from dulac.algebra import (
    ExactMatrix,
    GR_ONE,
    GR_ZERO,
    GaussianRational,
    MultiIndex,
    PolyVectorField,
    ScalarPoly,
    compose_shift,
    gr,
    grlex_key,
    iter_multiindices,
    lie_poisson,
    matrix_apply,
)
from dulac.resonance import Spectrum


def linear_field(s: Spectrum) -> PolyVectorField:
    """The diagonal linear field A_s x."""
    return PolyVectorField.linear(s.matrix())


# ---------------------------------------------------------------------------
# homological operator


def homological_apply(s: Spectrum, h: PolyVectorField) -> PolyVectorField:
    """L(h) = (A_s x · ∇)h − A_s h.

    On a monomial x^μ e_i this is (μ·λ − λ_i) x^μ e_i.  Both forms are
    computed and compared; a mismatch would mean corrupted arithmetic, so
    it is an assertion rather than an error value.
    """
    if h.dim != s.dim:
        raise ValueError("field/spectrum dimension mismatch")
    bracket = lie_poisson(linear_field(s), h)
    diagonal = PolyVectorField.from_terms(
        s.dim,
        (
            (i, mu, (s.dot(mu) - s.eigenvalues[i]) * c)
            for i, mu, c in h.terms()
        ),
    )
    assert bracket == diagonal, "homological operator forms disagree"
    return diagonal


def homological_solve_degree(
    s: Spectrum, f_d: PolyVectorField
) -> Tuple[PolyVectorField, PolyVectorField]:
    """Solve L(h) = (non-resonant part of f_d) at a single degree.

    Returns (h, kept) with h carrying coefficient c/(μ·λ − λ_i) on every
    non-resonant monomial of f_d and zero kernel component (the minimal
    Bargman-norm representative), and kept the resonant remainder;
    f_d − L(h) = kept exactly.
    """
    degrees = {sum(mu) for _, mu, _ in f_d.terms()}
    if len(degrees) > 1:
        raise ValueError(f"input is not homogeneous (degrees {sorted(degrees)})")
    if degrees and min(degrees) < 2:
        raise ValueError("homological solve applies to degrees >= 2")
    h_terms = []
    kept_terms = []
    for i, mu, c in f_d.terms():
        delta = s.dot(mu) - s.eigenvalues[i]
        if delta.is_zero():
            kept_terms.append((i, mu, c))
        else:
            h_terms.append((i, mu, c / delta))
    return (
        PolyVectorField.from_terms(s.dim, h_terms),
        PolyVectorField.from_terms(s.dim, kept_terms),
    )


# ---------------------------------------------------------------------------
# the pipeline


@dataclass(frozen=True)
class HomologicalStep:
    """Record of one normalization step at polynomial degree d."""

    degree: int
    generator: PolyVectorField
    removed: PolyVectorField
    kept: PolyVectorField


@dataclass(frozen=True)
class NormalFormResult:
    original: PolyVectorField
    spectrum: Spectrum
    order: int
    steps: Tuple[HomologicalStep, ...]
    normal_form: PolyVectorField
    transform: PolyVectorField  # Ψ(y) − y, degrees 2..N


def _check_intake(f: PolyVectorField, s: Spectrum) -> None:
    if f.dim != s.dim:
        raise ValueError("field/spectrum dimension mismatch")
    dmin = f.degree_min()
    if dmin == 0:
        raise ValueError("field has a constant term; equilibrium must sit at the origin")
    lin = f.linear_part()
    offender = [
        (i + 1, j + 1)
        for i in range(s.dim)
        for j in range(s.dim)
        if i != j and not lin.entries[i][j].is_zero()
    ]
    if offender:
        raise ValueError(
            "linear part is not diagonal (nilpotent/off-diagonal entries at "
            + ", ".join(str(p) for p in offender)
            + "); semisimple diagonal linear part required"
        )
    for i in range(s.dim):
        if lin.entries[i][i] != s.eigenvalues[i]:
            raise ValueError(
                f"diagonal entry {i + 1} is {lin.entries[i][i]}, spectrum says "
                f"{s.eigenvalues[i]}"
            )


def normalize(
    f: PolyVectorField,
    s: Spectrum,
    order: int,
    projector: Optional[Callable[[PolyVectorField], PolyVectorField]] = None,
) -> NormalFormResult:
    """Bring f into normal form through polynomial degree `order`.

    Sequentially for d = 2..order: solve the homological equation at
    degree d, push the field through the shift x = y + h_d(y), and record
    the step.  The optional projector is applied to every generator
    before use (the equivariance hook); the removed/kept split is
    recomputed afterwards so step records stay exact.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    _check_intake(f, s)
    g = f.truncate(order)
    transform = PolyVectorField.zero(s.dim)
    steps: List[HomologicalStep] = []
    for d in range(2, order + 1):
        f_d = g.homogeneous_part(d)
        h_d, kept = homological_solve_degree(s, f_d)
        if projector is not None:
            h_d = projector(h_d)
        removed = homological_apply(s, h_d)
        kept = f_d - removed
        steps.append(HomologicalStep(d, h_d, removed, kept))
        if h_d.is_zero():
            continue
        g = compose_shift(g, h_d, order)
        shift = [
            ScalarPoly.variable(s.dim, j) + h_d.components[j] for j in range(s.dim)
        ]
        transform = PolyVectorField(
            [
                h_d.components[i]
                + transform.components[i].substitute(shift, truncate_at=order)
                for i in range(s.dim)
            ]
        )
    return NormalFormResult(
        original=f,
        spectrum=s,
        order=order,
        steps=tuple(steps),
        normal_form=g,
        transform=transform.truncate(order),
    )


@dataclass(frozen=True)
class NormalFormVerification:
    resonant_ok: bool
    nonresonant_terms: Tuple[Tuple[int, MultiIndex], ...]
    commutation_ok: bool
    conjugacy_ok: bool

    @property
    def ok(self) -> bool:
        return self.resonant_ok and self.commutation_ok and self.conjugacy_ok


def verify_normal_form(r: NormalFormResult) -> NormalFormVerification:
    """Three independent exact checks of a normalization result.

    (a) every nonlinear term of the normal form up to N is resonant;
    (b) the tail commutes with the linear field;
    (c) pushing the original field through the composed transform
        reproduces the normal form through degree N.
    """
    s, n = r.spectrum, r.order
    bad = tuple(
        (i, mu)
        for i, mu, _ in r.normal_form.terms()
        if 2 <= sum(mu) <= n and not s.is_resonant(i, mu)
    )
    tail = r.normal_form - linear_field(s)
    commutation_ok = lie_poisson(linear_field(s), tail).truncate(n).is_zero()
    conjugacy_ok = compose_shift(r.original, r.transform, n) == r.normal_form
    return NormalFormVerification(
        resonant_ok=not bad,
        nonresonant_terms=bad,
        commutation_ok=commutation_ok,
        conjugacy_ok=conjugacy_ok,
    )


# ---------------------------------------------------------------------------
# condition α


def condition_alpha(r: NormalFormResult) -> Optional[ScalarPoly]:
    """The scalar series α with normal_form = [1 + α(x)]·A_s x, if any.

    α is recovered by exact division on the first coordinate with a
    nonzero eigenvalue, then every component (including zero-eigenvalue
    ones, whose right side is identically zero) is checked against the
    reconstruction.  Returns None when no such α exists.
    """
    s, nf, n = r.spectrum, r.normal_form, r.order
    pivot = next(i for i in range(s.dim) if not s.eigenvalues[i].is_zero())
    lam = s.eigenvalues[pivot]
    alpha_terms: Dict[MultiIndex, GaussianRational] = {}
    for mu, c in nf.components[pivot].terms.items():
        if mu[pivot] == 0:
            return None
        nu = tuple(e - 1 if k == pivot else e for k, e in enumerate(mu))
        alpha_terms[nu] = c / lam
    one_plus_alpha = ScalarPoly(s.dim, alpha_terms)
    alpha = one_plus_alpha - ScalarPoly.constant(s.dim, 1)
    for j in range(s.dim):
        xj = ScalarPoly.variable(s.dim, j)
        expected = (xj * one_plus_alpha * s.eigenvalues[j]).truncate(n)
        if expected != nf.components[j]:
            return None
    return alpha


# ---------------------------------------------------------------------------
# centralizer decomposition (polynomial coefficients only)


@dataclass(frozen=True)
class CentralizerDecomposition:
    success: bool
    basis: Tuple[ExactMatrix, ...]
    coefficients: Tuple[ScalarPoly, ...]
    message: str = ""


def _vectorize(m: ExactMatrix) -> List[GaussianRational]:
    return [m.entries[i][j] for i in range(m.rows) for j in range(m.cols)]


def _independent_with_a_first(
    a: ExactMatrix, basis: Sequence[ExactMatrix]
) -> List[ExactMatrix]:
    """Reorder/filter so A comes first and the rest stay independent."""
    chosen: List[ExactMatrix] = []
    vectors: List[List[GaussianRational]] = []
    for m in [a, *basis]:
        candidate = vectors + [_vectorize(m)]
        if ExactMatrix(candidate).rank() == len(candidate):
            chosen.append(m)
            vectors.append(_vectorize(m))
    return chosen


def centralizer_decompose(
    r: NormalFormResult, basis: Sequence[ExactMatrix]
) -> CentralizerDecomposition:
    """Write the normal form as Σ_j μ_j(x)·M_j x with invariant μ_j.

    M_0 is A itself; the rest of the supplied centralizer basis is kept
    (dependent entries dropped).  Each degree is an exact linear solve
    over coefficients supported on invariant monomials; polynomial
    coefficients only — if a degree is unsolvable the decomposition is
    reported as failed rather than attempting rational functions.
    """
    s, nf, n = r.spectrum, r.normal_form, r.order
    a = s.matrix()
    for m in basis:
        if not (m @ a - a @ m == ExactMatrix.zeros(s.dim, s.dim)):
            raise ValueError("basis matrix does not commute with the linear part")
    mats = _independent_with_a_first(a, basis)
    coeffs: List[ScalarPoly] = [ScalarPoly.zero(s.dim) for _ in mats]

    for d in range(1, n + 1):
        nf_d = nf.homogeneous_part(d)
        invariant_nus = [
            nu for nu in iter_multiindices(s.dim, d - 1) if s.dot(nu).is_zero()
        ]
        if not invariant_nus:
            if not nf_d.is_zero():
                return CentralizerDecomposition(
                    False,
                    tuple(mats),
                    (),
                    f"no invariant monomials of degree {d - 1} can produce the "
                    f"degree-{d} terms of the normal form",
                )
            continue
        unknowns = [(j, nu) for j in range(len(mats)) for nu in invariant_nus]
        # target rows: every (i, mu) reachable or present
        row_keys: List[Tuple[int, MultiIndex]] = []
        seen = set()
        for i, mu, _ in nf_d.terms():
            if (i, mu) not in seen:
                seen.add((i, mu))
                row_keys.append((i, mu))
        for j, nu in unknowns:
            for i in range(s.dim):
                for m_idx in range(s.dim):
                    if not mats[j].entries[i][m_idx].is_zero():
                        mu = tuple(
                            e + (1 if k == m_idx else 0) for k, e in enumerate(nu)
                        )
                        if (i, mu) not in seen:
                            seen.add((i, mu))
                            row_keys.append((i, mu))
        row_keys.sort(key=lambda im: (im[0], grlex_key(im[1])))
        rows = []
        rhs = []
        for i, mu in row_keys:
            row = []
            for j, nu in unknowns:
                entry = GR_ZERO
                for m_idx in range(s.dim):
                    if mu[m_idx] >= 1:
                        rest = tuple(
                            e - (1 if k == m_idx else 0) for k, e in enumerate(mu)
                        )
                        if rest == nu:
                            entry = entry + mats[j].entries[i][m_idx]
                row.append(entry)
            rows.append(row)
            rhs.append(nf_d.components[i].coefficient(mu))
        solution = ExactMatrix(rows).solve(rhs)
        if solution is None:
            return CentralizerDecomposition(
                False,
                tuple(mats),
                (),
                f"inconsistent coefficient system at degree {d}",
            )
        for (j, nu), value in zip(unknowns, solution):
            if not value.is_zero():
                coeffs[j] = coeffs[j] + ScalarPoly.monomial(s.dim, nu, value)

    # re-expansion must reproduce the normal form exactly
    rebuilt = PolyVectorField.zero(s.dim)
    xs = [ScalarPoly.variable(s.dim, i) for i in range(s.dim)]
    for m, mu_j in zip(mats, coeffs):
        mx = matrix_apply(m, xs)
        rebuilt = rebuilt + PolyVectorField([mu_j * p for p in mx])
    if rebuilt.truncate(n) != nf:
        return CentralizerDecomposition(
            False, tuple(mats), (), "re-expansion mismatch (internal error)"
        )
    return CentralizerDecomposition(True, tuple(mats), tuple(coeffs))


# ---------------------------------------------------------------------------
# real <-> complex plumbing for rotation blocks

Block = Tuple[str, ...]  # ("real", i) or ("pair", i, j)


@dataclass(frozen=True)
class ComplexificationMap:
    """Change of basis z = C x pairing each 2×2 rotation block [[a,−b],[b,a]]
    on (x_i, x_j) with complex coordinates z_i = x_i + i x_j,
    z_j = x_i − i x_j (eigenvalues a ± ib); real slots pass through."""

    blocks: Tuple[Block, ...]
    forward: ExactMatrix
    backward: ExactMatrix
    tau: Tuple[int, ...]  # coordinate involution swapping each pair

    def is_identity(self) -> bool:
        return self.forward == ExactMatrix.identity(self.forward.rows)

    def _conjugate_field(self, f: PolyVectorField, m: ExactMatrix, m_inv: ExactMatrix) -> PolyVectorField:
        n = f.dim
        subs = [
            ScalarPoly(
                n,
                {
                    tuple(1 if k == j else 0 for k in range(n)): m_inv.entries[i][j]
                    for j in range(n)
                    if not m_inv.entries[i][j].is_zero()
                },
            )
            for i in range(n)
        ]
        composed = [c.substitute(subs) for c in f.components]
        return PolyVectorField(list(matrix_apply(m, composed)))

    def to_complex(self, f: PolyVectorField) -> PolyVectorField:
        """Field in z-coordinates: g(z) = C f(C⁻¹ z)."""
        return self._conjugate_field(f, self.forward, self.backward)

    def reality_violation(self, g: PolyVectorField) -> Optional[Tuple[int, MultiIndex]]:
        """First term violating coeff(i, μ) = conj(coeff(τi, τμ)), or None."""
        for i, mu, c in g.terms():
            tmu = tuple(mu[self.tau[k]] for k in range(len(mu)))
            mirror = g.components[self.tau[i]].coefficient(tmu)
            if c != mirror.conjugate():
                return (i, mu)
        return None

    def to_real(self, g: PolyVectorField) -> PolyVectorField:
        """Field back in x-coordinates: f(x) = C⁻¹ g(C x); coefficients
        must come out real (guaranteed when the reality constraint holds)."""
        violation = self.reality_violation(g)
        if violation is not None:
            i, mu = violation
            raise ValueError(
                f"reality constraint violated by term x^{mu} in component {i + 1}"
            )
        f = self._conjugate_field(g, self.backward, self.forward)
        for i, mu, c in f.terms():
            if c.im != 0:
                raise ValueError(
                    f"realified coefficient not real at x^{mu} in component {i + 1}"
                )
        return f


def complexify(
    f: PolyVectorField, blocks: Sequence[Block]
) -> Tuple[PolyVectorField, ComplexificationMap]:
    """Diagonalize real rotation blocks by moving to z = x ± iy coordinates.

    `blocks` lists ("real", i) slots and ("pair", i, j) rotation blocks,
    covering every coordinate exactly once; the linear part must be
    block-diagonal accordingly, each pair carrying [[a, −b], [b, a]].
    """
    n = f.dim
    covered: List[int] = []
    for b in blocks:
        covered.extend(b[1:])
    if sorted(covered) != list(range(n)):
        raise ValueError("blocks must cover every coordinate exactly once")

    lin = f.linear_part()
    same_block: Dict[int, Tuple[int, ...]] = {}
    for b in blocks:
        for i in b[1:]:
            same_block[i] = tuple(b[1:])
    for p in range(n):
        for q in range(n):
            if q not in same_block[p] and not lin.entries[p][q].is_zero():
                raise ValueError(
                    f"linear part is not block-diagonal: entry ({p + 1},{q + 1}) nonzero"
                )
    rows = [[GR_ZERO] * n for _ in range(n)]
    inv_rows = [[GR_ZERO] * n for _ in range(n)]
    tau = list(range(n))
    for b in blocks:
        if b[0] == "real":
            (i,) = b[1:]
            if lin.entries[i][i].im != 0:
                raise ValueError(f"real slot {i + 1} has non-real eigenvalue")
            rows[i][i] = GR_ONE
            inv_rows[i][i] = GR_ONE
        elif b[0] == "pair":
            i, j = b[1:]
            a, mb = lin.entries[i][i], lin.entries[i][j]
            bb, a2 = lin.entries[j][i], lin.entries[j][j]
            if a != a2 or mb != -bb or a.im != 0 or bb.im != 0:
                raise ValueError(
                    f"block ({i + 1},{j + 1}) is not a rotation block [[a,-b],[b,a]]"
                )
            half = gr(GaussianRational(1)) / 2
            ihalf = GaussianRational(0, 1) / 2
            rows[i][i] = GR_ONE
            rows[i][j] = GaussianRational(0, 1)
            rows[j][i] = GR_ONE
            rows[j][j] = GaussianRational(0, -1)
            inv_rows[i][i] = half
            inv_rows[i][j] = half
            inv_rows[j][i] = -ihalf
            inv_rows[j][j] = ihalf
            tau[i], tau[j] = j, i
        else:
            raise ValueError(f"unknown block kind {b[0]!r}")
    forward = ExactMatrix(rows)
    backward = ExactMatrix(inv_rows)
    assert forward @ backward == ExactMatrix.identity(n)
    cmap = ComplexificationMap(
        blocks=tuple(blocks), forward=forward, backward=backward, tau=tuple(tau)
    )
    g = cmap.to_complex(f)
    assert g.linear_part().is_diagonal()
    assert cmap.reality_violation(g) is None
    return g, cmap


def complex_spectrum(f: PolyVectorField, blocks: Sequence[Block]) -> Spectrum:
    """The diagonal spectrum after complexification (a ± ib per pair)."""
    g, _ = complexify(f, blocks)
    return Spectrum(tuple(g.linear_part().diagonal_entries()))


def realify(
    r: NormalFormResult, cmap: ComplexificationMap
) -> Tuple[PolyVectorField, PolyVectorField]:
    """Pull a complex normal form and its transform back to real
    coordinates; both must satisfy the conjugate-pair constraint."""
    return cmap.to_real(r.normal_form), cmap.to_real(r.transform)
