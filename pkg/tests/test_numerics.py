"""RK4 harness, conjugacy scaling, and the orbit-space demonstration."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest

from dulac.algebra import GaussianRational, PolyVectorField
from dulac.normalform import normalize
from dulac.numerics import (
    conjugacy_error,
    hopf_system,
    hopf_unfolding,
    integrate,
    orbit_space_demo,
    render_orbit_space,
    render_scaling,
    render_trajectory,
    rotation_frequency,
    truncation_scaling,
)
from dulac.resonance import Spectrum, resonance_report
from dulac.unfold import build_unfolding

G = GaussianRational
F = Fraction

S12 = Spectrum((G(1), G(2)))
EX1_CORE = [(0, (1, 0), 1), (1, (0, 1), 2), (1, (2, 0), 1)]
# Example-1 resonant skeleton plus one removable quadratic; y² feeds ẋ
# only, so nothing self-amplifies on the tested horizon
EX1_PERTURBED = PolyVectorField.from_terms(2, EX1_CORE + [(0, (0, 2), 1)])
EPS_LIST = [0.02, 0.04, 0.08, 0.16]
SCALING_T = 0.75


def ex1_unfolding(order: int = 3):
    nf = normalize(PolyVectorField.from_terms(2, EX1_CORE), S12, order)
    return build_unfolding(nf, resonance_report(S12, order))


class TestIntegrate:
    def test_linear_flow_oracle(self):
        f = PolyVectorField.from_terms(2, [(0, (1, 0), 1), (1, (0, 1), 2)])
        traj = integrate(f, [1.0, 1.0], 1.0, 1e-3)
        assert abs(traj.final[0] - math.e) < 1e-8
        assert abs(traj.final[1] - math.e ** 2) < 1e-8

    def test_zero_field_constant(self):
        f = PolyVectorField.zero(3)
        traj = integrate(f, [1.0, -2.0, 0.5], 1.0, 0.1)
        assert np.all(traj.states == traj.states[0])
        assert not traj.diverged

    def test_hopf_limit_cycle(self):
        traj = integrate(hopf_system(F(1), F(1), F(0), F(1)), [0.1, 0.0], 40.0, 1e-2)
        assert abs(np.linalg.norm(traj.final) - 1.0) < 1e-6

    def test_blow_up_flags_and_truncates(self):
        f = PolyVectorField.from_terms(1, [(0, (2,), 1)])  # pole at t = 1
        traj = integrate(f, [1.0], 2.0, 1e-3)
        assert traj.diverged
        assert traj.times[-1] < 1.5
        assert np.all(np.isfinite(traj.states))
        assert np.all(np.abs(traj.states) <= 1e6)

    def test_deterministic(self):
        f = hopf_system()
        a = integrate(f, [0.3, -0.2], 2.0, 1e-2)
        b = integrate(f, [0.3, -0.2], 2.0, 1e-2)
        assert np.array_equal(a.states, b.states)
        assert np.array_equal(a.times, b.times)

    def test_trajectory_invariants(self):
        traj = integrate(hopf_system(), [0.2, 0.1], 1.0, 1e-2)
        assert np.all(np.diff(traj.times) > 0)
        assert traj.states.shape == (len(traj.times), 2)
        assert traj.meta["scheme"] == "rk4"

    def test_rejects_bad_steps(self):
        f = PolyVectorField.zero(1)
        with pytest.raises(ValueError):
            integrate(f, [1.0], 1.0, 0.0)
        with pytest.raises(ValueError):
            integrate(f, [1.0], -1.0, 0.1)

    def test_rejects_complex_coefficients(self):
        f = PolyVectorField.from_terms(1, [(0, (1,), G(0, 1))])
        with pytest.raises(ValueError, match="realify"):
            integrate(f, [1.0], 1.0, 0.1)

    def test_rk4_order_via_step_halving(self):
        f = PolyVectorField.from_terms(2, [(0, (1, 0), 1), (1, (0, 1), 2)])
        exact = np.array([math.e, math.e ** 2])
        errs = []
        for dt in (4e-3, 2e-3):
            traj = integrate(f, [1.0, 1.0], 1.0, dt)
            errs.append(np.linalg.norm(traj.final - exact))
        ratio = errs[0] / errs[1]
        assert 10.0 < ratio < 24.0  # fourth order: ≈ 16


class TestConjugacyError:
    def test_already_normal_is_noise_level(self):
        f = PolyVectorField.from_terms(2, EX1_CORE)
        nf = normalize(f, S12, 3)
        assert nf.transform.is_zero()
        summary = conjugacy_error(f, nf, [0.05, 0.05], 1.0, 1e-3)
        assert summary.max_error < 1e-10
        assert not summary.diverged

    def test_error_scales_like_eps_fourth(self):
        nf = normalize(EX1_PERTURBED, S12, 3)
        e_small = conjugacy_error(EX1_PERTURBED, nf, [0.02, 0.02], SCALING_T, 1e-3)
        e_big = conjugacy_error(EX1_PERTURBED, nf, [0.04, 0.04], SCALING_T, 1e-3)
        ratio = e_big.max_error / e_small.max_error
        assert 10.0 < ratio < 26.0  # 2⁴ = 16 up to flow distortion

    def test_zeroed_transform_negative_control(self):
        nf = normalize(EX1_PERTURBED, S12, 3)
        gutted = type(nf)(
            original=nf.original,
            spectrum=nf.spectrum,
            order=nf.order,
            steps=nf.steps,
            normal_form=nf.normal_form,
            transform=PolyVectorField.zero(2),
        )
        honest = conjugacy_error(EX1_PERTURBED, nf, [0.05, 0.05], SCALING_T, 1e-3)
        broken = conjugacy_error(EX1_PERTURBED, gutted, [0.05, 0.05], SCALING_T, 1e-3)
        assert broken.max_error > 1e-3
        assert broken.max_error > 100 * honest.max_error

    def test_divergence_propagates(self):
        nf = normalize(EX1_PERTURBED, S12, 3)
        summary = conjugacy_error(EX1_PERTURBED, nf, [40.0, 40.0], 2.0, 1e-3)
        assert summary.diverged


class TestTruncationScaling:
    def test_example1_order3_slope(self):
        nf = normalize(EX1_PERTURBED, S12, 3)
        fit = truncation_scaling(EX1_PERTURBED, nf, EPS_LIST, SCALING_T, 1e-3)
        assert fit.status == "ok"
        assert fit.excluded == ()
        assert fit.slope >= 3.5
        assert fit.slope < 4.8

    def test_lower_order_scales_slower(self):
        nf3 = normalize(EX1_PERTURBED, S12, 3)
        nf2 = normalize(EX1_PERTURBED, S12, 2)
        s3 = truncation_scaling(EX1_PERTURBED, nf3, EPS_LIST, SCALING_T, 1e-3).slope
        s2 = truncation_scaling(EX1_PERTURBED, nf2, EPS_LIST, SCALING_T, 1e-3).slope
        assert 2.6 < s2 < 3.5  # theoretical 3
        assert s3 > s2 + 0.5

    def test_linear_system_reports_exact(self):
        f = PolyVectorField.from_terms(2, [(0, (1, 0), 1), (1, (0, 1), 2)])
        nf = normalize(f, S12, 3)
        fit = truncation_scaling(f, nf, EPS_LIST, 1.0, 1e-3)
        assert fit.status == "exact"
        assert fit.slope is None

    def test_diverged_samples_excluded(self):
        nf = normalize(EX1_PERTURBED, S12, 3)
        fit = truncation_scaling(
            EX1_PERTURBED, nf, [0.02, 40.0, 0.04, 0.08], SCALING_T, 1e-3,
            blow_up=1e3,
        )
        assert fit.status == "ok"
        assert fit.excluded == (40.0,)
        assert len(fit.samples) == 3

    def test_too_few_valid_samples(self):
        nf = normalize(EX1_PERTURBED, S12, 3)
        fit = truncation_scaling(
            EX1_PERTURBED, nf, [20.0, 40.0, 80.0, 160.0], 2.0, 1e-3, blow_up=1e3
        )
        assert fit.status == "no fit"
        assert fit.slope is None
        assert len(fit.excluded) == 4


class TestOrbitSpaceDemo:
    def test_example1_reconstruction_matches_direct(self):
        rep = orbit_space_demo(ex1_unfolding(), [0.3, 0.2], 2.0, 1e-3)
        assert not rep.diverged
        assert rep.max_x_deviation < 1e-9
        assert rep.max_w_deviation < 1e-9
        assert rep.regime is not None and rep.regime.stability == "trivial"

    def test_example1_closed_form_oracle(self):
        x0, y0, c = 0.5, 0.25, 1.0
        rep = orbit_space_demo(ex1_unfolding(), [x0, y0], 2.0, 1e-3, w0=[x0 ** 2])
        t = rep.times
        exact = np.column_stack([
            x0 * np.exp(t),
            (y0 + c * x0 ** 2 * t) * np.exp(2 * t),
        ])
        assert np.max(np.abs(rep.x_reconstructed - exact)) < 1e-6
        # w rides along as x₀²e^{2t}
        assert np.max(np.abs(rep.w_reconstructed[:, 0] - x0 ** 2 * np.exp(2 * t))) < 1e-6

    def test_inconsistent_w0_rejected(self):
        with pytest.raises(ValueError, match="inconsistent"):
            orbit_space_demo(ex1_unfolding(), [0.3, 0.2], 1.0, 1e-3, w0=[0.5])

    def test_inconsistent_phi0_rejected(self):
        u = hopf_unfolding()
        with pytest.raises(ValueError, match="inconsistent"):
            orbit_space_demo(u, [0.1, 0.0], 1.0, 1e-2, phi0=[7.0])

    def test_hopf_relaxation_and_regime(self):
        u = hopf_unfolding(F(1), F(1), F(1, 2), F(1))
        rep = orbit_space_demo(u, [0.1, 0.0], 30.0, 1e-2)
        assert not rep.diverged
        assert rep.max_x_deviation < 1e-7
        assert rep.phi_limit is not None
        assert abs(rep.phi_limit[0] - 1.0) < 1e-6
        assert rep.regime is not None
        assert rep.regime.stability == "stable"
        rot = rep.regime.frozen_F
        assert rot.entries[0][1] == G(F(-3, 2))  # −(ω₀ + b·ρ*) at ρ* = 1
        assert rot.entries[1][0] == G(F(3, 2))

    def test_hopf_radial_closed_form(self):
        u = hopf_unfolding(F(1), F(1), F(0), F(1))
        rho0 = 0.04
        x0 = [math.sqrt(rho0), 0.0]
        rep = orbit_space_demo(u, x0, 10.0, 1e-2)
        t = rep.times[: len(rep.phi)]
        exact = rho0 / (rho0 + (1 - rho0) * np.exp(-2 * t))
        assert np.max(np.abs(rep.phi[:, 0] - exact)) < 1e-7

    def test_hopf_rotation_frequency(self):
        f = hopf_system(F(1), F(1), F(1, 2), F(1))
        traj = integrate(f, [0.1, 0.0], 40.0, 1e-2)
        assert abs(rotation_frequency(traj) - 1.5) < 1e-4

    def test_invariant_drift_tracks_orbit_space_flow(self):
        # ρ evaluated on the direct trajectory equals the separately
        # integrated φ(t), which realizes the invariant-evolution law
        u = hopf_unfolding(F(1), F(1), F(0), F(1))
        rep = orbit_space_demo(u, [0.25, 0.1], 15.0, 1e-2)
        rho_on_traj = rep.x_direct[:, 0] ** 2 + rep.x_direct[:, 1] ** 2
        assert np.max(np.abs(rho_on_traj - rep.phi[:, 0])) < 1e-7

    def test_linear_system_all_routes_coincide(self):
        nf = normalize(PolyVectorField.from_terms(2, [(0, (1, 0), 1), (1, (0, 1), 2)]), S12, 3)
        u = build_unfolding(nf, resonance_report(S12, 3))
        rep = orbit_space_demo(u, [1.0, -0.5], 1.0, 1e-3)
        assert rep.max_x_deviation < 1e-9
        assert rep.max_w_deviation < 1e-9  # w = x² rides along even here

    def test_complex_unfolding_needs_realification(self):
        s = Spectrum((G(0, 1), G(0, -1)))
        f = PolyVectorField.from_terms(2, [
            (0, (1, 0), G(0, 1)), (1, (0, 1), G(0, -1)),
            (0, (2, 1), G(0, 1)), (1, (1, 2), G(0, -1)),
        ])
        u = build_unfolding(normalize(f, s, 3), resonance_report(s, 3))
        with pytest.raises(ValueError, match="realify"):
            orbit_space_demo(u, [0.1, 0.1], 1.0, 1e-2)

    def test_rotation_frequency_pure_rotation(self):
        f = PolyVectorField.from_terms(2, [(0, (0, 1), -2), (1, (1, 0), 2)])
        traj = integrate(f, [1.0, 0.0], 10.0, 1e-3)
        assert abs(rotation_frequency(traj) - 2.0) < 1e-6


class TestRendering:
    def test_figures_written(self, tmp_path):
        traj = integrate(hopf_system(), [0.2, 0.0], 5.0, 1e-2)
        p1 = render_trajectory(traj, str(tmp_path / "traj.png"))
        nf = normalize(EX1_PERTURBED, S12, 3)
        fit = truncation_scaling(EX1_PERTURBED, nf, EPS_LIST, SCALING_T, 1e-3)
        p2 = render_scaling(fit, str(tmp_path / "scaling.png"))
        rep = orbit_space_demo(hopf_unfolding(), [0.1, 0.0], 5.0, 1e-2)
        p3 = render_orbit_space(rep, str(tmp_path / "orbit.png"))
        for p in (p1, p2, p3):
            assert (tmp_path / p.split("/")[-1]).stat().st_size > 0
