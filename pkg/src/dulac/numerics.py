"""Floating-point validation harness.

Everything exact lives elsewhere; this module integrates systems with
classical fixed-step RK4 (reproducible, no adaptivity), measures how
well the computed transformation conjugates the original flow to its
normal form, fits the truncation-order scaling law, and runs the
orbit-space reduction dynamically: φ first, then the frozen-time linear
blocks, compared against direct integration.

States are kept real: fields with genuinely complex coefficients must
be realified before they get here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from dulac.algebra import PolyVectorField, ScalarPoly
from dulac.normalform import NormalFormResult
from dulac.resonance import Spectrum
from dulac.unfold import (
    AsymptoticRegime,
    AuxiliarySet,
    InvariantSet,
    UnfoldedSystem,
    asymptotic_linearization,
)

BLOW_UP_DEFAULT = 1.0e6


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def diverged(self) -> bool:
        return bool(self.meta.get("diverged", False))

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]


# ---------------------------------------------------------------------------
# compiling exact polynomials to float evaluators


def _compile_scalar(p: ScalarPoly) -> Tuple[np.ndarray, np.ndarray]:
    expos: List[Tuple[int, ...]] = []
    coeffs: List[float] = []
    for mu, c in p.terms.items():
        if c.im != 0:
            raise ValueError("complex coefficients; realify the system first")
        expos.append(mu)
        coeffs.append(float(c.re))
    if not expos:
        return np.zeros((0, p.dim), dtype=np.int64), np.zeros(0)
    return np.array(expos, dtype=np.int64), np.array(coeffs)


def compile_polys(polys: Sequence[ScalarPoly]) -> Callable[[np.ndarray], np.ndarray]:
    """Turn exact polynomials into one vectorized float evaluator."""
    compiled = [_compile_scalar(p) for p in polys]

    def fun(x: np.ndarray) -> np.ndarray:
        out = np.empty(len(compiled))
        for i, (expos, coeffs) in enumerate(compiled):
            if len(coeffs) == 0:
                out[i] = 0.0
            else:
                out[i] = float(np.dot(coeffs, np.prod(x ** expos, axis=1)))
        return out

    return fun


def compile_field(f: PolyVectorField) -> Callable[[np.ndarray], np.ndarray]:
    return compile_polys(f.components)


def _compile_matrix(
    m: Sequence[Sequence[ScalarPoly]], phi_dim: int
) -> Callable[[np.ndarray], np.ndarray]:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    compiled = [[_compile_scalar(p) for p in row] for row in m]

    def fun(phi: np.ndarray) -> np.ndarray:
        out = np.zeros((rows, cols))
        for i in range(rows):
            for j in range(cols):
                expos, coeffs = compiled[i][j]
                if len(coeffs):
                    out[i, j] = float(np.dot(coeffs, np.prod(phi ** expos, axis=1)))
        return out

    return fun


def evaluate_polys(polys: Sequence[ScalarPoly], x: Sequence[float]) -> np.ndarray:
    return compile_polys(polys)(np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# RK4


def _rk4(
    fun: Callable[[float, np.ndarray], np.ndarray],
    x0: Sequence[float],
    T: float,
    dt: float,
    blow_up: float,
    scheme: str = "rk4",
) -> Trajectory:
    if dt <= 0 or T <= 0:
        raise ValueError("need positive horizon and step")
    steps = max(1, int(round(T / dt)))
    x = np.asarray(x0, dtype=float)
    times = [0.0]
    states = [x]
    diverged = False
    for k in range(steps):
        t = k * dt
        k1 = fun(t, x)
        k2 = fun(t + dt / 2, x + (dt / 2) * k1)
        k3 = fun(t + dt / 2, x + (dt / 2) * k2)
        k4 = fun(t + dt, x + dt * k3)
        x = x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)) or float(np.linalg.norm(x)) > blow_up:
            diverged = True
            break
        times.append((k + 1) * dt)
        states.append(x)
    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        meta={"dt": dt, "scheme": scheme, "diverged": diverged, "blow_up": blow_up},
    )


def integrate(
    f: PolyVectorField,
    x0: Sequence[float],
    T: float,
    dt: float,
    blow_up: float = BLOW_UP_DEFAULT,
) -> Trajectory:
    """Fixed-step RK4 for an autonomous polynomial field."""
    fun = compile_field(f)
    return _rk4(lambda t, x: fun(x), x0, T, dt, blow_up)


# ---------------------------------------------------------------------------
# conjugacy error and truncation scaling


def transform_map(r: NormalFormResult) -> Callable[[np.ndarray], np.ndarray]:
    """Φ(y) = y + (computed near-identity tail), as a float map."""
    tail = compile_field(r.transform)
    return lambda y: y + tail(y)


@dataclass
class ErrorSummary:
    times: np.ndarray
    errors: np.ndarray
    max_error: float
    diverged: bool


def conjugacy_error(
    original: PolyVectorField,
    r: NormalFormResult,
    y0: Sequence[float],
    T: float,
    dt: float,
    blow_up: float = BLOW_UP_DEFAULT,
) -> ErrorSummary:
    """max_t |Φ(y(t)) − x(t)|: y flows under the normal form from y0,
    x under the original system from Φ(y0)."""
    phi = transform_map(r)
    y_traj = integrate(r.normal_form, np.asarray(y0, dtype=float), T, dt, blow_up)
    x_traj = integrate(original, phi(np.asarray(y0, dtype=float)), T, dt, blow_up)
    m = min(len(y_traj.times), len(x_traj.times))
    mapped = np.array([phi(y) for y in y_traj.states[:m]])
    errors = np.linalg.norm(mapped - x_traj.states[:m], axis=1)
    return ErrorSummary(
        times=y_traj.times[:m],
        errors=errors,
        max_error=float(errors.max()) if len(errors) else math.inf,
        diverged=y_traj.diverged or x_traj.diverged,
    )


@dataclass
class ScalingFit:
    status: str  # "ok" | "exact" | "no fit"
    slope: Optional[float]
    intercept: Optional[float]
    samples: Tuple[Tuple[float, float], ...]  # (eps, max error) kept
    excluded: Tuple[float, ...]  # eps values whose runs diverged

    NOISE_FLOOR = 1.0e-12


def truncation_scaling(
    original: PolyVectorField,
    r: NormalFormResult,
    eps_list: Sequence[float],
    T: float,
    dt: float,
    direction: Optional[Sequence[float]] = None,
    blow_up: float = BLOW_UP_DEFAULT,
) -> ScalingFit:
    """Least-squares slope of log max-error against log ε.

    A degree-N normalization of a generic perturbation should show
    slope ≈ N + 1; diverged samples drop out; a noise-floor result is
    reported as "exact" rather than fitted.
    """
    n = original.dim
    if direction is None:
        d = np.ones(n) / math.sqrt(n)
    else:
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
    samples: List[Tuple[float, float]] = []
    excluded: List[float] = []
    for eps in eps_list:
        summary = conjugacy_error(original, r, eps * d, T, dt, blow_up)
        if summary.diverged:
            excluded.append(float(eps))
        else:
            samples.append((float(eps), summary.max_error))
    kept = tuple(samples)
    if len(samples) < 3:
        return ScalingFit("no fit", None, None, kept, tuple(excluded))
    if all(err <= ScalingFit.NOISE_FLOOR for _, err in samples):
        return ScalingFit("exact", None, None, kept, tuple(excluded))
    xs = np.log([e for e, _ in samples])
    ys = np.log([max(err, 1e-300) for _, err in samples])
    slope, intercept = np.polyfit(xs, ys, 1)
    return ScalingFit("ok", float(slope), float(intercept), kept, tuple(excluded))


# ---------------------------------------------------------------------------
# orbit-space demonstration


@dataclass
class OrbitSpaceReport:
    times: np.ndarray
    phi: np.ndarray  # φ(t) on the report grid
    x_direct: np.ndarray
    x_reconstructed: np.ndarray
    w_reconstructed: np.ndarray
    max_x_deviation: float
    max_w_deviation: float
    phi_limit: Optional[np.ndarray]  # tail value when φ settles
    regime: Optional[AsymptoticRegime]
    diverged: bool


def _match_regime(
    u: UnfoldedSystem, phi_end: np.ndarray, tol: float
) -> Optional[AsymptoticRegime]:
    try:
        regimes = asymptotic_linearization(u)
    except ValueError:
        return None
    for reg in regimes:
        if reg.phi_star is not None:
            star = np.array([float(c.re) for c in reg.phi_star])
            if np.linalg.norm(star - phi_end) <= tol:
                return reg
        elif reg.interval is not None and len(phi_end) == 1:
            lo, hi = reg.interval
            if float(lo) - tol <= phi_end[0] <= float(hi) + tol:
                return reg
    return None


def orbit_space_demo(
    u: UnfoldedSystem,
    x0: Sequence[float],
    T: float,
    dt: float,
    w0: Optional[Sequence[float]] = None,
    phi0: Optional[Sequence[float]] = None,
    identification_tol: float = 1.0e-9,
    settle_tol: float = 1.0e-6,
    blow_up: float = BLOW_UP_DEFAULT,
) -> OrbitSpaceReport:
    """Integrate φ̇ = h(φ), then the time-dependent linear (x, w) blocks
    along φ(t), and compare with direct integration.

    The direct field is reconstructed exactly from the blocks
    (ẋ_i = Σ F_ij(I(x)) x_j + Σ B_ij(I(x)) R_j(x)), which is the normal
    form itself, so no separate field argument is needed.  Supplied w0
    or φ0 are checked against the identities w = R(x), φ = I(x).
    """
    n = u.dim
    s = u.ident_w.s
    r = u.ident_phi.r
    x0a = np.asarray(x0, dtype=float)
    if len(x0a) != n:
        raise ValueError("initial state has wrong dimension")

    phi_init = evaluate_polys(u.ident_phi.generators, x0a) if r else np.zeros(1)
    if phi0 is not None:
        if np.linalg.norm(np.asarray(phi0, dtype=float) - phi_init) > identification_tol:
            raise ValueError("inconsistent initial identification: phi0 != I(x0)")
    w_init = (
        evaluate_polys([m for m in u.ident_w.monomials()], x0a)
        if s
        else np.zeros(0)
    )
    if w0 is not None:
        if np.linalg.norm(np.asarray(w0, dtype=float) - w_init) > identification_tol:
            raise ValueError("inconsistent initial identification: w0 != R(x0)")

    steps = max(1, int(round(T / dt)))
    phi_dim = u.phi_dim
    # φ on the half-step grid so RK4 stages of the linear pass line up
    if r:
        h_fun = compile_polys(u.h)
        phi_half = _rk4(lambda t, p: h_fun(p), phi_init, T, dt / 2, blow_up)
        phi_states = phi_half.states
    else:
        phi_states = np.zeros((2 * steps + 1, phi_dim))
    phi_diverged = len(phi_states) < 2 * steps + 1

    f_at = _compile_matrix(u.F, phi_dim)
    b_at = _compile_matrix(u.B, phi_dim) if s else None
    g_at = _compile_matrix(u.G, phi_dim) if s else None
    d_at = _compile_matrix(u.D, phi_dim) if s else None

    def joint_rhs(idx: int, z: np.ndarray) -> np.ndarray:
        phi = phi_states[idx]
        x, w = z[:n], z[n:]
        dx = f_at(phi) @ x
        if s:
            dx = dx + b_at(phi) @ w
            dw = g_at(phi) @ w + d_at(phi) @ x
            return np.concatenate([dx, dw])
        return dx

    z = np.concatenate([x0a, w_init])
    lin_steps = min(steps, (len(phi_states) - 1) // 2)
    times = [0.0]
    zs = [z]
    lin_diverged = False
    for k in range(lin_steps):
        k1 = joint_rhs(2 * k, z)
        k2 = joint_rhs(2 * k + 1, z + (dt / 2) * k1)
        k3 = joint_rhs(2 * k + 1, z + (dt / 2) * k2)
        k4 = joint_rhs(2 * k + 2, z + dt * k3)
        z = z + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(z)) or float(np.linalg.norm(z)) > blow_up:
            lin_diverged = True
            break
        times.append((k + 1) * dt)
        zs.append(z)
    zs = np.array(zs)

    direct_components = []
    gens = list(u.ident_phi.generators)
    aux = list(u.ident_w.monomials())
    for i in range(n):
        comp = ScalarPoly.zero(n)
        for j in range(n):
            comp = comp + _substitute_invariants(u.F[i][j], gens, n) * ScalarPoly.variable(n, j)
        for j in range(s):
            comp = comp + _substitute_invariants(u.B[i][j], gens, n) * aux[j]
        direct_components.append(comp)
    direct_field = PolyVectorField(direct_components)
    direct = integrate(direct_field, x0a, T, dt, blow_up)

    m = min(len(zs), len(direct.states))
    x_rec = zs[:m, :n]
    w_rec = zs[:m, n:]
    x_dir = direct.states[:m]
    x_dev = (
        float(np.linalg.norm(x_rec - x_dir, axis=1).max()) if m else math.inf
    )
    if s and m:
        aux_fun = compile_polys(aux)
        w_true = np.array([aux_fun(x) for x in x_dir])
        w_dev = float(np.linalg.norm(w_rec - w_true, axis=1).max())
    else:
        w_dev = 0.0

    diverged = phi_diverged or lin_diverged or direct.diverged
    phi_report = phi_states[: 2 * m - 1 : 2] if m else phi_states[:0]
    phi_limit: Optional[np.ndarray] = None
    regime: Optional[AsymptoticRegime] = None
    if not diverged and len(phi_report) > 2:
        tail, mid = phi_report[-1], phi_report[len(phi_report) // 2]
        if np.linalg.norm(tail - mid) <= settle_tol:
            phi_limit = tail
            regime = _match_regime(u, tail, max(settle_tol * 10, 1e-5))
    return OrbitSpaceReport(
        times=np.array(times[:m]),
        phi=phi_report,
        x_direct=x_dir,
        x_reconstructed=x_rec,
        w_reconstructed=w_rec,
        max_x_deviation=x_dev,
        max_w_deviation=w_dev,
        phi_limit=phi_limit,
        regime=regime,
        diverged=diverged,
    )


def _substitute_invariants(
    p: ScalarPoly, gens: Sequence[ScalarPoly], n: int
) -> ScalarPoly:
    """p(φ) with φ_a := I_a(x); constants pass through for empty φ data."""
    out = ScalarPoly.zero(n)
    for mu, c in p.terms.items():
        term = ScalarPoly.constant(n, c)
        for a, e in enumerate(mu):
            for _ in range(e):
                term = term * gens[a]
        out = out + term
    return out


# ---------------------------------------------------------------------------
# frequency read-off and the planar limit-cycle helpers


def rotation_frequency(traj: Trajectory, i: int = 0, j: int = 1) -> float:
    """Mean angular velocity in the (i, j) plane over the second half of
    the trajectory (transient discarded)."""
    half = len(traj.times) // 2
    theta = np.unwrap(np.arctan2(traj.states[half:, j], traj.states[half:, i]))
    slope, _ = np.polyfit(traj.times[half:], theta, 1)
    return float(slope)


def hopf_system(
    mu: Fraction = Fraction(1),
    omega0: Fraction = Fraction(1),
    b: Fraction = Fraction(0),
    c: Fraction = Fraction(1),
) -> PolyVectorField:
    """Planar limit-cycle normal form in real coordinates:
    ẋ = (μ − cρ)x − (ω₀ + bρ)y, ẏ = (ω₀ + bρ)x + (μ − cρ)y, ρ = x² + y²."""
    terms = []
    for i, ang in ((0, -1), (1, 1)):
        other = 1 - i
        terms.append((i, tuple(1 if k == i else 0 for k in range(2)), mu))
        terms.append((i, tuple(1 if k == other else 0 for k in range(2)), ang * omega0))
        for rho_mu in ((2, 0), (0, 2)):
            cubic_self = tuple(rho_mu[k] + (1 if k == i else 0) for k in range(2))
            cubic_other = tuple(rho_mu[k] + (1 if k == other else 0) for k in range(2))
            terms.append((i, cubic_self, -c))
            terms.append((i, cubic_other, ang * b))
    return PolyVectorField.from_terms(2, terms)


def hopf_unfolding(
    mu: Fraction = Fraction(1),
    omega0: Fraction = Fraction(1),
    b: Fraction = Fraction(0),
    c: Fraction = Fraction(1),
) -> UnfoldedSystem:
    """Hand-built orbit-space form of `hopf_system` over φ = x² + y²:
    ẋ = F(φ)x with F = [[μ−cφ, −(ω₀+bφ)], [ω₀+bφ, μ−cφ]], φ̇ = 2φ(μ−cφ).

    The linear part has complex eigenvalues, so this does not come out
    of the diagonal-coordinates builder; it exists for real-coordinate
    demonstrations (limit cycle, rotation frequency)."""
    lin = ScalarPoly.constant(1, mu) - ScalarPoly.monomial(1, (1,), c)
    rot = ScalarPoly.constant(1, omega0) + ScalarPoly.monomial(1, (1,), b)
    f = ((lin, ScalarPoly.zero(1) - rot), (rot, lin))
    rho = ScalarPoly.monomial(2, (2, 0)) + ScalarPoly.monomial(2, (0, 2))
    ident_phi = InvariantSet(dim=2, generators=(rho,), exponents=None, nonneg=(True,))
    ident_w = AuxiliarySet(dim=2, components=(), exponents=())
    h = (
        ScalarPoly.monomial(1, (1,), 2 * mu) - ScalarPoly.monomial(1, (2,), 2 * c),
    )
    return UnfoldedSystem(
        spectrum=Spectrum((_gr_pair(mu, omega0), _gr_pair(mu, -omega0))),
        ident_phi=ident_phi,
        ident_w=ident_w,
        F=f,
        B=((), ()),
        G=(),
        D=(),
        h=h,
    )


def _gr_pair(re: Fraction, im: Fraction):
    from dulac.algebra import GaussianRational

    return GaussianRational(Fraction(re), Fraction(im))


# ---------------------------------------------------------------------------
# figure rendering (report path); matplotlib loaded only on demand


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_trajectory(traj: Trajectory, path: str) -> str:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for i in range(traj.states.shape[1]):
        ax.plot(traj.times, traj.states[:, i], label=f"x{i + 1}")
    ax.set_xlabel("t")
    ax.set_ylabel("state")
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_scaling(fit: ScalingFit, path: str) -> str:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 4))
    if fit.samples:
        eps = [e for e, _ in fit.samples]
        err = [max(v, 1e-300) for _, v in fit.samples]
        ax.loglog(eps, err, "o-", label="max conjugacy error")
        if fit.status == "ok":
            xs = np.array([min(eps), max(eps)])
            ax.loglog(
                xs,
                np.exp(fit.intercept) * xs ** fit.slope,
                "--",
                label=f"slope {fit.slope:.2f}",
            )
    ax.set_xlabel("epsilon")
    ax.set_ylabel("error")
    ax.legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_orbit_space(report: OrbitSpaceReport, path: str) -> str:
    plt = _pyplot()
    fig, axes = plt.subplots(1, 2, figsize=(9, 4))
    t = report.times
    for i in range(report.x_direct.shape[1]):
        axes[0].plot(t, report.x_direct[:, i], lw=2, alpha=0.5, label=f"direct x{i + 1}")
        axes[0].plot(t, report.x_reconstructed[:, i], "--", label=f"orbit-space x{i + 1}")
    axes[0].set_xlabel("t")
    axes[0].legend(loc="best", fontsize="x-small")
    for a in range(report.phi.shape[1]):
        axes[1].plot(t[: len(report.phi)], report.phi[:, a], label=f"phi{a + 1}")
    axes[1].set_xlabel("t")
    axes[1].set_ylabel("phi")
    axes[1].legend(loc="best", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
