"""Convergence diagnostics: hull test, small divisors, advisories."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from dulac.algebra import (
    ExactMatrix,
    GaussianRational,
    PolyVectorField,
    ScalarPoly,
    iter_multiindices,
)
from dulac.convergence import (
    Advisory,
    ConvergenceReport,
    OmegaEntry,
    condition_omega_partial,
    convergence_report,
    poincare_criterion,
    spectrum_lattice_denominator,
)
from dulac.normalform import normalize
from dulac.resonance import Spectrum, enumerate_resonances, invariance_basis

G = GaussianRational
F = Fraction


def spectrum(*vals) -> Spectrum:
    return Spectrum(tuple(G(v) if not isinstance(v, G) else v for v in vals))


def origin_outside_oracle(points):
    """Independent complete test: 0 lies outside the hull iff some point's
    perpendicular gives a closed supporting half-plane whose boundary
    contacts only points strictly on that point's own ray."""
    for p in points:
        for d in ((-p[1], p[0]), (p[1], -p[0])):
            if all(d[0] * q[0] + d[1] * q[1] >= 0 for q in points):
                on_line = [q for q in points if d[0] * q[0] + d[1] * q[1] == 0]
                if all(q[0] * p[0] + q[1] * p[1] > 0 for q in on_line):
                    return True
    return False


def random_spectrum(rng: random.Random, dim: int) -> Spectrum:
    while True:
        evs = [
            G(F(rng.randint(-3, 3), rng.randint(1, 3)),
              F(rng.randint(-3, 3), rng.randint(1, 3)))
            for _ in range(dim)
        ]
        if any(not e.is_zero() for e in evs):
            return Spectrum(tuple(evs))


class TestPoincareCriterion:
    def test_unit_cases(self):
        assert poincare_criterion(spectrum(1, 2)) is True
        assert poincare_criterion(spectrum(G(0, -1), G(0, 1))) is False
        assert poincare_criterion(spectrum(G(1, 1), G(1, -1), 2)) is True

    def test_zero_eigenvalue_is_a_hull_point(self):
        assert poincare_criterion(spectrum(0, 1)) is False

    def test_origin_interior_to_a_segment(self):
        assert poincare_criterion(spectrum(1, -2)) is False

    def test_segment_missing_the_origin(self):
        assert poincare_criterion(spectrum(1, G(0, 1))) is True

    def test_origin_inside_a_triangle(self):
        assert poincare_criterion(spectrum(G(1, 1), G(1, -1), -1)) is False

    def test_collinear_one_sided(self):
        assert poincare_criterion(spectrum(1, 2, 3, F(1, 2))) is True

    def test_agrees_with_supporting_ray_oracle(self):
        rng = random.Random(71)
        for _ in range(300):
            s = random_spectrum(rng, rng.randint(1, 5))
            pts = [(e.re, e.im) for e in s.eigenvalues]
            assert poincare_criterion(s) == origin_outside_oracle(pts)

    def test_invariant_under_permutation_and_positive_scaling(self):
        rng = random.Random(9)
        for _ in range(60):
            s = random_spectrum(rng, 4)
            base = poincare_criterion(s)
            evs = list(s.eigenvalues)
            rng.shuffle(evs)
            assert poincare_criterion(Spectrum(tuple(evs))) == base
            c = F(rng.randint(1, 5), rng.randint(1, 5))
            scaled = Spectrum(tuple(e * G(c) for e in s.eigenvalues))
            assert poincare_criterion(scaled) == base

    def test_duplicating_an_eigenvalue_changes_nothing(self):
        rng = random.Random(23)
        for _ in range(40):
            s = random_spectrum(rng, 3)
            bigger = Spectrum(s.eigenvalues + (s.eigenvalues[0],))
            assert poincare_criterion(bigger) == poincare_criterion(s)

    def test_poincare_spectra_have_no_invariance_relations(self):
        # the criterion forces an empty invariance monoid and finitely
        # many resonances; check both on fixed and random spectra
        s = spectrum(1, 2)
        assert invariance_basis(s).generators == ()
        assert all(r.degree == 2 for r in enumerate_resonances(s, 9))
        rng = random.Random(41)
        found = 0
        for _ in range(80):
            cand = random_spectrum(rng, 3)
            if poincare_criterion(cand):
                found += 1
                assert invariance_basis(cand).generators == ()
        assert found > 5


class TestConditionOmega:
    def test_known_values(self):
        for e in condition_omega_partial(spectrum(1, 2), 3):
            assert e.omega_sq == 1
        for e in condition_omega_partial(spectrum(G(0, -1), G(0, 1)), 2):
            assert e.omega_sq == 1
        entries = condition_omega_partial(spectrum(1, F(1, 3)), 2)
        assert entries[0].omega_sq == F(1, 9)  # |(1,1)·λ − λ_1| = 1/3
        assert entries[1].omega_sq == F(1, 9)

    def test_agrees_with_direct_enumeration(self):
        rng = random.Random(5)
        for _ in range(15):
            s = random_spectrum(rng, rng.randint(1, 3))
            entries = condition_omega_partial(s, 3)
            for e in entries:
                best = None
                for deg in range(2, 2 ** e.k + 1):
                    for q in iter_multiindices(s.dim, deg):
                        v = s.dot(q)
                        for lam in s.eigenvalues:
                            d2 = (v - lam).abs2()
                            if d2 != 0 and (best is None or d2 < best):
                                best = d2
                assert e.omega_sq == (best if best is not None else 1)

    def test_non_increasing_and_lattice_bounded(self):
        rng = random.Random(17)
        for _ in range(20):
            s = random_spectrum(rng, 2)
            entries = condition_omega_partial(s, 4)
            d = spectrum_lattice_denominator(s)
            for prev, cur in zip(entries, entries[1:]):
                assert cur.omega_sq <= prev.omega_sq
            for e in entries:
                assert e.omega_sq >= F(1, d * d)

    def test_partial_sums_accumulate(self):
        entries = condition_omega_partial(spectrum(1, F(1, 3)), 4)
        total = 0.0
        for e in entries:
            total += e.term
            assert e.cumulative == pytest.approx(total)

    def test_rejects_bad_kmax(self):
        with pytest.raises(ValueError):
            condition_omega_partial(spectrum(1, 2), 0)

    def test_lattice_denominator(self):
        assert spectrum_lattice_denominator(spectrum(1, F(1, 3))) == 3
        assert spectrum_lattice_denominator(spectrum(F(1, 2), G(F(1, 3), F(1, 5)))) == 30


def _advisory(report: ConvergenceReport, topic: str) -> Advisory:
    for a in report.advisories:
        if a.topic == topic:
            return a
    raise AssertionError(f"no advisory for {topic!r}")


def _hopf_like(c: GaussianRational, order: int = 3):
    """z' = iz + c z²z̄ together with its conjugate copy, pre-normalized."""
    s = spectrum(G(0, 1), G(0, -1))
    f = PolyVectorField.from_terms(2, [
        (0, (1, 0), G(0, 1)), (1, (0, 1), G(0, -1)),
        (0, (2, 1), c), (1, (1, 2), c.conjugate()),
    ])
    return normalize(f, s, order), s


class TestConvergenceReport:
    def test_poincare_route(self):
        s = spectrum(1, 2)
        f = PolyVectorField.from_terms(2, [
            (0, (1, 0), 1), (1, (0, 1), 2), (1, (2, 0), 1),
        ])
        rep = convergence_report(normalize(f, s, 3), omega_kmax=2)
        assert rep.poincare_domain is True
        assert rep.condition_alpha is None
        assert _advisory(rep, "Poincare criterion").status == "established"
        conv1 = _advisory(rep, "Proposition conv.1")
        assert conv1.status == "established"
        assert "Poincare criterion" in conv1.detail
        hyp2 = _advisory(rep, "Proposition conv.3 hypothesis 2")
        assert hyp2.status == "undecidable"
        assert "decomposition" in hyp2.detail
        assert len(rep.omega_partial) == 2
        assert all(isinstance(e, OmegaEntry) for e in rep.omega_partial)
        assert rep.lattice_denominator == 1

    def test_condition_alpha_route(self):
        nf, _ = _hopf_like(G(0, 1))  # purely imaginary cubic coefficient
        rep = convergence_report(nf, omega_kmax=1)
        assert rep.poincare_domain is False
        assert rep.condition_alpha == ScalarPoly.monomial(2, (1, 1))
        assert _advisory(rep, "Proposition conv.1").status == (
            "hypothesis established at degree 3"
        )
        assert "condition alpha" in _advisory(rep, "Proposition conv.1").detail

    def test_neither_route(self):
        nf, _ = _hopf_like(G(1, 1))  # radial part present: alpha fails
        rep = convergence_report(nf, omega_kmax=1)
        assert rep.condition_alpha is None
        assert _advisory(rep, "Proposition conv.1").status == "not established"

    def test_hypothesis2_trivial_only(self):
        nf, _ = _hopf_like(G(1, 1))
        rep = convergence_report(nf, omega_kmax=1)
        hyp2 = _advisory(rep, "Proposition conv.3 hypothesis 2")
        assert hyp2.status == "undecidable"
        assert "only trivial" in hyp2.detail

    def test_hypothesis2_refuted_by_decoupled_direction(self):
        # λ = (i,−i,2i,−2i) with a single z₁²z₂ term: S = (z₃z₄)·E₃₃x
        # commutes with F-hat exactly, so triviality genuinely fails
        s = spectrum(G(0, 1), G(0, -1), G(0, 2), G(0, -2))
        f = PolyVectorField.from_terms(4, [
            (0, (1, 0, 0, 0), G(0, 1)), (1, (0, 1, 0, 0), G(0, -1)),
            (2, (0, 0, 1, 0), G(0, 2)), (3, (0, 0, 0, 1), G(0, -2)),
            (0, (2, 1, 0, 0), 1),
        ])
        rep = convergence_report(normalize(f, s, 3), omega_kmax=1)
        hyp2 = _advisory(rep, "Proposition conv.3 hypothesis 2")
        assert hyp2.status == "refuted"
        assert "dimension 3" in hyp2.detail

    def test_hypothesis2_fhat_zero(self):
        nf, _ = _hopf_like(G(0, 1))
        rep = convergence_report(nf, omega_kmax=1)
        hyp2 = _advisory(rep, "Proposition conv.3 hypothesis 2")
        assert hyp2.status == "not applicable"
        assert "F-hat = 0" in hyp2.detail

    def test_symmetry_branches_proportional(self):
        nf, _ = _hopf_like(G(1, 1))
        g = PolyVectorField.from_terms(2, [
            (0, (1, 0), G(0, 2)), (1, (0, 1), G(0, -2)),
            (0, (2, 1), 3), (1, (1, 2), 3),
        ])
        rep = convergence_report(nf, sym=g, omega_kmax=1)
        # B = 2A has ±2i on the diagonal: hull contains the origin
        assert _advisory(rep, "Proposition conv.2 branch (i)").status == "refuted"
        branch_ii = _advisory(rep, "Proposition conv.2 branch (ii)")
        assert branch_ii.status == "not established at degree 3"
        hyp1 = _advisory(rep, "Proposition conv.3 hypothesis 1")
        assert hyp1.status == "established"
        assert "k = 2" in hyp1.detail

    def test_symmetry_poincare_branch_established(self):
        nf, _ = _hopf_like(G(1, 1))
        g = PolyVectorField.from_terms(2, [(0, (1, 0), 1), (1, (0, 1), 2)])
        rep = convergence_report(nf, sym=g, omega_kmax=1)
        assert _advisory(rep, "Proposition conv.2 branch (i)").status == "established"
        # diag(1,2) is no multiple of diag(i,−i)
        assert _advisory(rep, "Proposition conv.3 hypothesis 1").status == "refuted"

    def test_symmetry_branch_ii_alpha(self):
        # symmetry = the field itself in its condition-alpha variant
        nf, _ = _hopf_like(G(0, 1))
        g = PolyVectorField.from_terms(2, [
            (0, (1, 0), G(0, 1)), (1, (0, 1), G(0, -1)),
            (0, (2, 1), G(0, 1)), (1, (1, 2), G(0, -1)),
        ])
        rep = convergence_report(nf, sym=g, omega_kmax=1)
        assert _advisory(rep, "Proposition conv.2 branch (ii)").status == (
            "established at degree 3"
        )

    def test_symmetry_nondiagonal_linear_part(self):
        nf, _ = _hopf_like(G(1, 1))
        g = PolyVectorField.from_terms(2, [(0, (0, 1), 1), (1, (1, 0), 1)])
        rep = convergence_report(nf, sym=g, omega_kmax=1)
        assert _advisory(rep, "Proposition conv.2").status == "undecidable"

    def test_symmetry_purely_nonlinear(self):
        # B = 0 is the k = 0 case of proportionality
        nf, _ = _hopf_like(G(1, 1))
        g = PolyVectorField.from_terms(2, [(0, (2, 1), 1), (1, (1, 2), 1)])
        rep = convergence_report(nf, sym=g, omega_kmax=1)
        assert _advisory(rep, "Proposition conv.3 hypothesis 1").status == "established"
        assert "k = 0" in _advisory(rep, "Proposition conv.3 hypothesis 1").detail
        assert _advisory(rep, "Proposition conv.2").status == "undecidable"

    def test_symmetry_with_constant_terms(self):
        nf, _ = _hopf_like(G(1, 1))
        g = PolyVectorField.from_terms(2, [
            (0, (1, 0), G(0, 2)), (1, (0, 1), G(0, -2)), (0, (0, 0), 1),
        ])
        rep = convergence_report(nf, sym=g, omega_kmax=1)
        hyp1 = _advisory(rep, "Proposition conv.3 hypothesis 1")
        assert hyp1.status == "refuted"
        assert "below degree 2" in hyp1.detail

    def test_rejects_dimension_mismatch(self):
        nf, _ = _hopf_like(G(1, 1))
        g = PolyVectorField.from_terms(3, [(0, (1, 0, 0), 1)])
        with pytest.raises(ValueError, match="dimension"):
            convergence_report(nf, sym=g, omega_kmax=1)

    def test_rejects_tampered_normal_form(self):
        nf, _ = _hopf_like(G(1, 1))
        bad = type(nf)(
            original=nf.original,
            spectrum=nf.spectrum,
            order=nf.order,
            steps=nf.steps,
            normal_form=nf.normal_form + PolyVectorField.from_terms(
                2, [(0, (0, 2), 1)]
            ),
            transform=nf.transform,
        )
        with pytest.raises(ValueError, match="verification"):
            convergence_report(bad, omega_kmax=1)
