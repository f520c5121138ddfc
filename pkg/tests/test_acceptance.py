"""Acceptance gate: ten criteria, one test (and one pass/fail line) each.

Each test pins the tolerance and wall-clock budget it must meet; a failure
here means the package no longer reproduces the behavior it promises.
"""

from __future__ import annotations

import math
import os
import random
import time
from fractions import Fraction

from dulac.algebra import (
    ExactMatrix,
    GaussianRational,
    PolyVectorField,
    gr,
    iter_multiindices,
)
from dulac.cli import parse_system, run
from dulac.convergence import poincare_criterion
from dulac.normalform import complexify, normalize
from dulac.numerics import (
    Trajectory,
    hopf_system,
    integrate,
    orbit_space_demo,
    rotation_frequency,
    truncation_scaling,
)
from dulac.resonance import Spectrum, invariance_basis, resonance_report
from dulac.symmetry import (
    FiniteGroup,
    covariant_space_dimension,
    gradient_property_check,
    invariant_space_dimension,
    joint_centralizer,
    molien_coefficients,
)
from dulac.unfold import build_unfolding, verify_unfolding

GR_I = GaussianRational(0, 1)
SYSTEMS = os.path.join(os.path.dirname(__file__), "..", "systems")

A_PAIR = ExactMatrix.from_rows(
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
)
EXCHANGE = ExactMatrix.from_rows(
    [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
)


class _Budget:
    """Context manager asserting the stated wall-clock budget."""

    def __init__(self, seconds: float):
        self.limit = seconds

    def __enter__(self):
        self.t0 = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.monotonic() - self.t0
        if exc == (None, None, None):
            assert self.elapsed < self.limit, (
                f"budget exceeded: {self.elapsed:.2f}s >= {self.limit}s"
            )
        return False


def _report(n: int, detail: str) -> None:
    print(f"criterion {n}: PASS - {detail}")


def _random_perturbation(rng: random.Random, k: int) -> PolyVectorField:
    """Every monomial of degree 2..k in both components, random coefficients."""
    terms = []
    for deg in range(2, k + 1):
        for mu in iter_multiindices(2, deg):
            for comp in range(2):
                coeff = GaussianRational(
                    Fraction(rng.randint(-3, 3), rng.choice((1, 2))),
                    Fraction(rng.randint(-3, 3), rng.choice((1, 2))),
                )
                terms.append((comp, mu, coeff))
    return PolyVectorField.from_terms(2, terms)


def test_criterion_01_single_resonant_term_survives():
    rng = random.Random(11)
    with _Budget(5.0) as b:
        survivors = []
        for k in (2, 3):
            s = Spectrum((gr(1), gr(k)))
            f = PolyVectorField.linear(s.matrix()) + _random_perturbation(rng, k)
            nf = normalize(f, s, k + 1)
            tail = [
                (i, mu, c) for i, mu, c in nf.normal_form.terms() if sum(mu) > 1
            ]
            assert len(tail) == 1, f"k={k}: expected one nonlinear term, got {tail}"
            comp, mu, c = tail[0]
            assert comp == 1 and mu == (k, 0), f"k={k}: wrong survivor {tail[0]}"
            assert not c.is_zero()
            survivors.append((k, str(c)))
    _report(1, f"survivors c*x1^k in component 2: {survivors}, {b.elapsed:.2f}s")


def test_criterion_02_one_one_resonance_invariance_basis():
    with _Budget(5.0) as b:
        s = Spectrum((-GR_I, GR_I, -GR_I, GR_I))
        rep = resonance_report(s, max_degree=3)
        generators = set(rep.invariance_basis.generators)
        assert generators == {
            (1, 1, 0, 0), (0, 0, 1, 1), (1, 0, 0, 1), (0, 1, 1, 0)
        }
        assert len(rep.invariance_basis.generators) == 4
        assert rep.invariance_basis.complete
        assert rep.sporadic == ()
    _report(2, f"four generators, zero sporadic, {b.elapsed:.2f}s")


def test_criterion_03_centralizer_dimensions():
    with _Budget(5.0) as b:
        alone = len(joint_centralizer([A_PAIR]))
        joint = len(joint_centralizer([A_PAIR, EXCHANGE]))
        assert alone == 8
        assert joint == 4
    _report(3, f"dim C(A) = {alone}, dim C(A, E) = {joint}, {b.elapsed:.2f}s")


def _pipeline_unfolding(name: str, order: int = 3):
    with open(os.path.join(SYSTEMS, name + ".system"), encoding="utf-8") as fh:
        field, spectrum, options = parse_system(fh.read())
    work = field
    if options.blocks:
        layout = [("pair", i, j) for i, j, _, _ in options.blocks]
        paired = {k for blk in options.blocks for k in blk[:2]}
        layout += [("real", k) for k in range(field.dim) if k not in paired]
        work, _ = complexify(field, layout)
    nf = normalize(work, spectrum, order)
    rep = resonance_report(spectrum, order)
    return build_unfolding(nf, rep), nf


def test_criterion_04_unfolding_residuals_vanish():
    names = ["ex1", "ex2", "ex3", "ex4", "hopf", "hamiltonian_hopf"]
    with _Budget(30.0) as b:
        for name in names:
            u, nf = _pipeline_unfolding(name)
            check = verify_unfolding(u, nf.normal_form)
            assert check.ok, f"{name}: offenders {check.offenders}"
            assert not check.offenders
    _report(4, f"zero residuals on {', '.join(names)}, {b.elapsed:.2f}s")


def test_criterion_05_hopf_asymptotics():
    mu, omega0, b_coef, c = gr(1), gr(1), gr(Fraction(1, 2)), gr(1)
    with _Budget(30.0) as bud:
        f = hopf_system(mu, omega0, b_coef, c)
        traj = integrate(f, [0.1, 0.0], T=20.0, dt=0.01)
        assert not traj.diverged
        rho_final = traj.final[0] ** 2 + traj.final[1] ** 2
        assert abs(rho_final - 1.0) <= 1e-6, f"rho(20) = {rho_final}"
        half = len(traj.times) // 2
        tail = Trajectory(traj.times[half:], traj.states[half:], traj.meta)
        freq = rotation_frequency(tail)
        expected = 1.0 + 0.5 * 1.0  # omega0 + b * rho_star
        assert abs(freq - expected) <= 1e-4, f"frequency {freq}"
    _report(
        5,
        f"|rho(20)-1| = {abs(rho_final - 1.0):.2e}, "
        f"|freq-{expected}| = {abs(freq - expected):.2e}, {bud.elapsed:.2f}s",
    )


def test_criterion_06_truncation_scaling_slope():
    with _Budget(60.0) as b:
        s = Spectrum((gr(1), gr(2)))
        f = PolyVectorField.from_terms(
            2,
            [(0, (1, 0), 1), (1, (0, 1), 2), (1, (2, 0), 1), (0, (0, 2), 1)],
        )
        nf = normalize(f, s, 3)
        fit = truncation_scaling(
            f, nf, [0.02, 0.04, 0.08, 0.16], T=0.75, dt=1e-3
        )
        assert fit.status == "ok", fit.status
        assert not fit.excluded
        assert fit.slope >= 3.5, f"slope {fit.slope}"
    _report(6, f"slope {fit.slope:.3f} >= 3.5 (theoretical 4), {b.elapsed:.2f}s")


def test_criterion_07_randomized_property_suite():
    with _Budget(120.0) as b:
        code, text = run(["selftest", "--cases", "200", "--seed", "0"])
        assert code == 0, text
        assert "result | pass" in text
        for prop in (
            "lie-poisson-antisymmetry",
            "jacobi-identity",
            "bargman-adjointness",
            "normalized-tail-equivariance",
            "normalize-idempotence",
            "resonance-bruteforce-agreement",
        ):
            assert f"property | {prop} | pass" in text, prop
    _report(7, f"six properties x 200 seeded cases, {b.elapsed:.2f}s")


def test_criterion_08_poincare_unit_cases():
    with _Budget(1.0) as b:
        cases = [
            (Spectrum((gr(1), gr(2))), True),
            (Spectrum((-GR_I, GR_I)), False),
            (Spectrum((GaussianRational(1, 1), GaussianRational(1, -1), gr(2))),
             True),
        ]
        for s, expected in cases:
            assert poincare_criterion(s) is expected, s.eigenvalues
        # the domain criterion forbids invariance relations
        rng = random.Random(3)
        checked = 0
        for _ in range(40):
            dim = rng.randint(1, 3)
            evs = tuple(
                GaussianRational(rng.randint(-2, 2), rng.randint(-2, 2))
                for _ in range(dim)
            )
            if all(e.is_zero() for e in evs):
                continue
            s = Spectrum(evs)
            if poincare_criterion(s):
                basis = invariance_basis(s)
                assert basis.complete and basis.generators == ()
                checked += 1
        assert checked > 0
    _report(8, f"3 unit cases + {checked} hull-implies-no-relations draws, "
               f"{b.elapsed:.2f}s")


def test_criterion_09_molien_versus_brute_force():
    with _Budget(10.0) as b:
        neg = FiniteGroup.generate([ExactMatrix.from_rows([[-1, 0], [0, -1]])])
        z3 = FiniteGroup.generate([ExactMatrix.from_rows([[0, -1], [1, -1]])])
        for g in (neg, z3):
            table = molien_coefficients(g, 6)
            for n in range(7):
                assert table.c0[n] == invariant_space_dimension(g, n), (g, n)
                assert table.c1[n] == covariant_space_dimension(g, n), (g, n)
        k_basis = joint_centralizer(list(z3.elements))
        rows = gradient_property_check(z3, 2, k_basis)
        degree2 = rows[1]
        assert degree2.degree == 2
        assert degree2.c1 == 2 and degree2.s_times_c0_next == 4
        assert not degree2.counting_ok
        assert degree2.gradient_span_dim == 2 and degree2.rank_ok
    _report(9, "Molien == Reynolds ranks (n <= 6, both groups); Z3 degree-2 "
               f"counting fails (2 != 4), rank passes, {b.elapsed:.2f}s")


def test_criterion_10_unfolded_system_closed_form():
    with _Budget(10.0) as b:
        s = Spectrum((gr(1), gr(2)))
        f = PolyVectorField.from_terms(
            2, [(0, (1, 0), 1), (1, (0, 1), 2), (1, (2, 0), 1)]
        )
        nf = normalize(f, s, 3)
        u = build_unfolding(nf, resonance_report(s, 3))
        x0, y0 = 0.1, 0.2
        report = orbit_space_demo(
            u, [x0, y0], T=2.0, dt=1e-3, w0=[x0 * x0]
        )
        assert not report.diverged
        worst = 0.0
        for t, state in zip(report.times, report.x_reconstructed):
            ex = x0 * math.exp(t)
            ey = (y0 + x0 * x0 * t) * math.exp(2 * t)
            worst = max(worst, abs(state[0] - ex), abs(state[1] - ey))
        assert worst <= 1e-6, f"max deviation {worst}"
    _report(10, f"closed-form match, max |error| = {worst:.2e} <= 1e-6, "
                f"{b.elapsed:.2f}s")
