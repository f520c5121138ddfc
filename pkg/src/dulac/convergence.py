"""Decidable convergence diagnostics for normal forms.

Everything here is either an exact decision (the Poincaré criterion, an
exact planar convex-hull test), exact bounded data (the condition-ω
small-divisor minima over dyadic shells), or an explicitly
degree-bounded advisory (the hypotheses of the three convergence
propositions, checked by exact linear algebra at the truncation order
and reported as established / refuted / undecidable — never as a
series-level verdict a finite computation cannot deliver).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from dulac.algebra import (
    ExactMatrix,
    GaussianRational,
    PolyVectorField,
    ScalarPoly,
    gr,
    iter_multiindices,
    lie_poisson,
    matrix_apply,
)
from dulac.normalform import (
    NormalFormResult,
    centralizer_decompose,
    condition_alpha,
    normalize,
    verify_normal_form,
)
from dulac.resonance import Spectrum
from dulac.symmetry import joint_centralizer

Point = Tuple[Fraction, Fraction]


# ---------------------------------------------------------------------------
# Poincaré criterion


def _cross(a: Point, b: Point) -> Fraction:
    return a[0] * b[1] - a[1] * b[0]


def _dot(a: Point, b: Point) -> Fraction:
    return a[0] * b[0] + a[1] * b[1]


def _origin_in_hull(points: Sequence[Point]) -> bool:
    """Exact planar test: is 0 in the convex hull?  By Carathéodory it
    suffices to look at single points, segments, and triangles."""
    for p in points:
        if p == (0, 0):
            return True
    m = len(points)
    for i in range(m):
        for j in range(i + 1, m):
            a, b = points[i], points[j]
            if _cross(a, b) == 0 and _dot(a, b) <= 0:
                return True  # origin on the segment [a, b]
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(j + 1, m):
                s1 = _cross(points[i], points[j])
                s2 = _cross(points[j], points[k])
                s3 = _cross(points[k], points[i])
                if (s1 > 0 and s2 > 0 and s3 > 0) or (s1 < 0 and s2 < 0 and s3 < 0):
                    return True  # strictly inside a triangle
    return False


def poincare_criterion(s: Spectrum) -> bool:
    """True when the convex hull of the eigenvalues excludes the origin,
    which guarantees a convergent normalizing transformation."""
    points = [(lam.re, lam.im) for lam in s.eigenvalues]
    return not _origin_in_hull(points)


# ---------------------------------------------------------------------------
# condition omega


@dataclass(frozen=True)
class OmegaEntry:
    k: int
    omega_sq: Fraction  # exact min over the shell of |q·λ − λ_j|²
    term: float  # 2^{-k} log(1/ω_k), floating
    cumulative: float


def spectrum_lattice_denominator(s: Spectrum) -> int:
    """Clearing denominators puts every q·λ − λ_j on (1/D)·Z[i], so any
    nonzero small divisor is at least 1/D in modulus."""
    d = 1
    for lam in s.eigenvalues:
        d = math.lcm(d, lam.re.denominator, lam.im.denominator)
    return d


def condition_omega_partial(s: Spectrum, k_max: int = 4) -> List[OmegaEntry]:
    """Exact small-divisor minima over the dyadic shells 1 < |q| <= 2^k.

    The shells are nested, so ω_k is non-increasing; the partial Bruno
    sums are floating-point report data while every ω_k² stays exact.
    The infinite condition itself is never decided here — for rational
    spectra the lattice bound already implies it converges.
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    n = s.dim
    lams = s.eigenvalues
    top = 2 ** k_max
    best_by_degree: List[Optional[Fraction]] = [None] * (top + 1)
    for deg in range(2, top + 1):
        best: Optional[Fraction] = None
        for q in iter_multiindices(n, deg):
            v = GaussianRational(0)
            for qi, lam in zip(q, lams):
                if qi:
                    v = v + lam * qi
            for lam_j in lams:
                diff = v - lam_j
                if diff.is_zero():
                    continue
                a2 = diff.abs2()
                if best is None or a2 < best:
                    best = a2
        best_by_degree[deg] = best
    entries: List[OmegaEntry] = []
    running: Optional[Fraction] = None
    cumulative = 0.0
    for k in range(1, k_max + 1):
        for deg in range(2 if k == 1 else 2 ** (k - 1) + 1, 2 ** k + 1):
            b = best_by_degree[deg]
            if b is not None and (running is None or b < running):
                running = b
        if running is None:
            # no admissible q at all (tiny spectra); record a unit gap
            omega_sq = Fraction(1)
        else:
            omega_sq = running
        term = -(2.0 ** -k) * 0.5 * math.log(float(omega_sq))
        cumulative += term
        entries.append(OmegaEntry(k=k, omega_sq=omega_sq, term=term, cumulative=cumulative))
    return entries


# ---------------------------------------------------------------------------
# the assembled report


@dataclass(frozen=True)
class Advisory:
    topic: str
    status: str
    detail: str


@dataclass(frozen=True)
class ConvergenceReport:
    poincare_domain: bool
    condition_alpha: Optional[ScalarPoly]
    omega_partial: Tuple[OmegaEntry, ...]
    lattice_denominator: int
    advisories: Tuple[Advisory, ...]


def _proportionality_constant(
    b: ExactMatrix, a: ExactMatrix
) -> Optional[GaussianRational]:
    """k with B = kA exactly, if it exists (k = 0 needs B = 0)."""
    n = a.rows
    k: Optional[GaussianRational] = None
    for i in range(n):
        for j in range(n):
            if not a.entries[i][j].is_zero():
                k = b.entries[i][j] / a.entries[i][j]
                break
        if k is not None:
            break
    if k is None:
        return None
    for i in range(n):
        for j in range(n):
            if b.entries[i][j] != a.entries[i][j] * k:
                return None
    return k


def _invariant_multiindices(s: Spectrum, max_degree: int):
    for deg in range(1, max_degree + 1):
        for mu in iter_multiindices(s.dim, deg):
            if s.dot(mu).is_zero():
                yield mu


def _coefficient_field(nu: ScalarPoly, m: ExactMatrix) -> PolyVectorField:
    """The matrix field nu(x) * M x."""
    n = nu.dim
    variables = [ScalarPoly.variable(n, j) for j in range(n)]
    return PolyVectorField([nu * p for p in matrix_apply(m, variables)])


def _hypothesis2_advisory(nf: NormalFormResult) -> Advisory:
    """Triviality of {F-hat, S} = 0 over S = Σ ν_j(x) M_j x.

    The bracket equation is solved exactly (no truncation of the
    bracket) for invariant coefficients ν_j of degree 1..N-1; a second
    independent solution is a genuine polynomial counterexample, while a
    unique solution only says "trivial up to this degree".
    """
    topic = "Proposition conv.3 hypothesis 2"
    s = nf.spectrum
    n = s.dim
    order = nf.order
    basis = joint_centralizer([s.matrix()])
    dec = centralizer_decompose(nf, basis)
    if not dec.success:
        return Advisory(
            topic=topic,
            status="undecidable",
            detail=f"no polynomial Lemma-2 decomposition at degree {order}: {dec.message}",
        )
    # F-hat = everything outside the A-direction (selected matrix 0)
    fhat = PolyVectorField.zero(n)
    directions: List[ExactMatrix] = []
    for m, mu_poly in list(zip(dec.basis, dec.coefficients))[1:]:
        directions.append(m)
        fhat = fhat + _coefficient_field(mu_poly, m)
    if fhat.is_zero():
        return Advisory(
            topic=topic,
            status="not applicable",
            detail="F-hat = 0: the normal form is (1+alpha)Ax, the condition-alpha case",
        )
    unknowns = [
        (jdx, mu)
        for jdx in range(len(directions))
        for mu in _invariant_multiindices(s, order - 1)
    ]
    if not unknowns:
        return Advisory(
            topic=topic,
            status="undecidable",
            detail=f"no admissible S below degree {order}; higher degrees unexplored",
        )
    columns: List[PolyVectorField] = []
    for jdx, mu in unknowns:
        s_field = _coefficient_field(ScalarPoly.monomial(n, mu), directions[jdx])
        columns.append(lie_poisson(fhat, s_field))
    support = sorted(
        {(i, mu) for col in columns for i, mu, _ in col.terms()}
    )
    rows = [
        [col.components[i].coefficient(mu) for col in columns]
        for i, mu in support
    ]
    if not rows:
        rows = [[gr(0) for _ in columns]]
    null_dim = len(ExactMatrix(rows).nullspace())
    if null_dim > 1:
        return Advisory(
            topic=topic,
            status="refuted",
            detail=(
                "a polynomial S independent of F-hat satisfies {F-hat, S} = 0 "
                f"exactly (solution space dimension {null_dim} at degree {order})"
            ),
        )
    return Advisory(
        topic=topic,
        status="undecidable",
        detail=(
            f"only trivial solutions S = c·F-hat with coefficients of degree "
            f"< {order}; higher degrees unexplored"
        ),
    )


def convergence_report(
    nf: NormalFormResult,
    sym: Optional[PolyVectorField] = None,
    omega_kmax: int = 4,
) -> ConvergenceReport:
    """Assemble the convergence diagnostics for a verified normal form.

    `sym` is an optional analytic symmetry field g = Bx + G of the
    original system, enabling the Proposition conv.2 branches and
    conv.3's first hypothesis.
    """
    if not verify_normal_form(nf).ok:
        raise ValueError("normal form fails verification; refusing to report")
    s = nf.spectrum
    order = nf.order
    advisories: List[Advisory] = []

    in_poincare = poincare_criterion(s)
    advisories.append(
        Advisory(
            topic="Poincare criterion",
            status="established" if in_poincare else "refuted",
            detail=(
                "convex hull of the spectrum excludes the origin"
                if in_poincare
                else "the origin lies in the convex hull of the spectrum"
            ),
        )
    )

    alpha = condition_alpha(nf)
    advisories.append(
        Advisory(
            topic="Condition alpha",
            status=(
                f"established at degree {order}" if alpha is not None
                else f"not established at degree {order}"
            ),
            detail=(
                f"normal form = (1 + alpha)·Ax with alpha = {alpha}"
                if alpha is not None
                else "the normal form is not a scalar multiple of Ax at this truncation"
            ),
        )
    )

    omega = tuple(condition_omega_partial(s, omega_kmax))
    lattice_d = spectrum_lattice_denominator(s)
    advisories.append(
        Advisory(
            topic="Condition omega",
            status="observed",
            detail=(
                f"no small-divisor accumulation observed up to k = {omega_kmax}; "
                f"cleared denominators give the uniform bound "
                f"|q·lambda - lambda_j| >= 1/{lattice_d}, so the Bruno sum converges"
            ),
        )
    )

    if in_poincare:
        conv1 = Advisory(
            topic="Proposition conv.1",
            status="established",
            detail="applicable via Poincare criterion",
        )
    elif alpha is not None:
        conv1 = Advisory(
            topic="Proposition conv.1",
            status=f"hypothesis established at degree {order}",
            detail=(
                "the truncated normal form satisfies condition alpha; the "
                "series-level hypothesis remains out of finite reach"
            ),
        )
    else:
        conv1 = Advisory(
            topic="Proposition conv.1",
            status="not established",
            detail="neither the Poincare criterion nor condition alpha holds here",
        )
    advisories.append(conv1)

    if sym is None:
        advisories.append(
            Advisory(
                topic="Proposition conv.2",
                status="not applicable",
                detail="no symmetry field supplied",
            )
        )
        advisories.append(
            Advisory(
                topic="Proposition conv.3 hypothesis 1",
                status="not applicable",
                detail="no symmetry field supplied",
            )
        )
    else:
        if sym.dim != s.dim:
            raise ValueError("symmetry field dimension mismatch")
        b = sym.linear_part()
        if b.is_diagonal() and any(
            not b.entries[i][i].is_zero() for i in range(s.dim)
        ):
            b_spec = Spectrum(tuple(b.entries[i][i] for i in range(s.dim)))
            branch_i = poincare_criterion(b_spec)
            advisories.append(
                Advisory(
                    topic="Proposition conv.2 branch (i)",
                    status="established" if branch_i else "refuted",
                    detail=(
                        "B lies in a Poincare domain"
                        if branch_i
                        else "the convex hull of B's spectrum contains the origin"
                    ),
                )
            )
            try:
                sym_nf = normalize(sym, b_spec, order)
                sym_alpha = condition_alpha(sym_nf)
            except ValueError as exc:
                advisories.append(
                    Advisory(
                        topic="Proposition conv.2 branch (ii)",
                        status="undecidable",
                        detail=f"symmetry field not normalizable here: {exc}",
                    )
                )
            else:
                advisories.append(
                    Advisory(
                        topic="Proposition conv.2 branch (ii)",
                        status=(
                            f"established at degree {order}"
                            if sym_alpha is not None
                            else f"not established at degree {order}"
                        ),
                        detail=(
                            "the symmetry's normal form satisfies condition alpha"
                            if sym_alpha is not None
                            else "the symmetry's normal form fails condition alpha "
                            "at this truncation"
                        ),
                    )
                )
        else:
            advisories.append(
                Advisory(
                    topic="Proposition conv.2",
                    status="undecidable",
                    detail="B is zero or not diagonal in the working coordinates",
                )
            )
        k = _proportionality_constant(b, s.matrix())
        tail_min = (sym - PolyVectorField.linear(b)).degree_min()
        fully_nonlinear = tail_min is None or tail_min >= 2
        if k is not None and fully_nonlinear:
            advisories.append(
                Advisory(
                    topic="Proposition conv.3 hypothesis 1",
                    status="established",
                    detail=f"B = kA with k = {k} and G fully nonlinear",
                )
            )
        else:
            advisories.append(
                Advisory(
                    topic="Proposition conv.3 hypothesis 1",
                    status="refuted",
                    detail=(
                        "B is not an exact multiple of A"
                        if k is None
                        else "G has terms below degree 2"
                    ),
                )
            )

    advisories.append(_hypothesis2_advisory(nf))

    return ConvergenceReport(
        poincare_domain=in_poincare,
        condition_alpha=alpha,
        omega_partial=omega,
        lattice_denominator=lattice_d,
        advisories=tuple(advisories),
    )
