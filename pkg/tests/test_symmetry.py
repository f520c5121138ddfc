"""Finite symmetry groups: centralizers, Molien counts, equivariant flows."""

from __future__ import annotations

import pytest

from dulac.algebra import (
    ExactMatrix,
    GR_I,
    GR_ONE,
    GaussianRational,
    PolyVectorField,
    ScalarPoly,
    gr,
)
from dulac.normalform import normalize, verify_normal_form
from dulac.resonance import InvarianceBasis, Spectrum, invariance_basis
from dulac.symmetry import (
    FiniteGroup,
    MolienTable,
    covariant_space_dimension,
    equivariance_check,
    gradient_property_check,
    group_equivariance_residual,
    invariant_space_dimension,
    joint_centralizer,
    molien_coefficients,
    normalize_equivariant,
    reynolds_field,
    reynolds_scalar,
    symmetric_invariants,
)

C3 = ExactMatrix.from_rows([[0, -1], [1, -1]])  # order-3 rotation, rational model
NEG = ExactMatrix.from_rows([[-1, 0], [0, -1]])
J2 = ExactMatrix.from_rows([[0, -1], [1, 0]])
A_PAIR = ExactMatrix.from_rows(
    [[0, -1, 0, 0], [1, 0, 0, 0], [0, 0, 0, -1], [0, 0, 1, 0]]
)
EXCHANGE = ExactMatrix.from_rows(
    [[0, 0, 1, 0], [0, 0, 0, 1], [1, 0, 0, 0], [0, 1, 0, 0]]
)


class TestFiniteGroup:
    def test_generate_cyclic(self):
        g = FiniteGroup.generate([C3])
        assert len(g) == 3

    def test_identity_required(self):
        with pytest.raises(ValueError, match="identity"):
            FiniteGroup([NEG])

    def test_closure_required(self):
        with pytest.raises(ValueError, match="closed"):
            FiniteGroup([ExactMatrix.identity(2), C3])

    def test_singular_element_rejected(self):
        bad = ExactMatrix.from_rows([[1, 0], [0, 0]])
        with pytest.raises(ValueError):
            FiniteGroup([ExactMatrix.identity(2), bad])

    def test_duplicates_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            FiniteGroup([ExactMatrix.identity(2), ExactMatrix.identity(2)])

    def test_infinite_generation_bails(self):
        shear = ExactMatrix.from_rows([[1, 1], [0, 1]])
        with pytest.raises(ValueError, match="finite"):
            FiniteGroup.generate([shear], max_order=64)

    def test_inverses_aligned(self):
        g = FiniteGroup.generate([C3])
        ident = ExactMatrix.identity(2)
        for t, t_inv in zip(g.elements, g.inverses):
            assert (t @ t_inv) == ident


class TestEquivarianceCheck:
    def test_resonant_field_commutes_with_diagonal(self):
        s = Spectrum((1, 2))
        f = PolyVectorField.linear(s.matrix()) + PolyVectorField.monomial(
            2, 1, (2, 0), gr(5)
        )
        ok, residual = equivariance_check(f, s.matrix())
        assert ok and residual.is_zero()

    def test_nonresonant_residual(self):
        f = PolyVectorField.monomial(2, 0, (0, 2))
        ok, residual = equivariance_check(f, ExactMatrix.diagonal([1, 2]))
        assert not ok
        assert residual == PolyVectorField.monomial(2, 0, (0, 2), gr(3))

    def test_linear_self_commutation(self):
        b = ExactMatrix.from_rows([[1, 3], [0, -2]])
        ok, _ = equivariance_check(PolyVectorField.linear(b), b)
        assert ok


class TestJointCentralizer:
    def test_distinct_diagonal(self):
        basis = joint_centralizer([ExactMatrix.diagonal([1, 2])])
        assert len(basis) == 2
        assert basis[0] == ExactMatrix.diagonal([1, 0])
        assert basis[1] == ExactMatrix.diagonal([0, 1])

    def test_rotation_generator(self):
        basis = joint_centralizer([J2])
        assert len(basis) == 2
        # span contains both I and J
        def in_span(m):
            rows = [
                [b.entries[i][j] for i in range(2) for j in range(2)]
                for b in basis
            ]
            target = [m.entries[i][j] for i in range(2) for j in range(2)]
            wide = ExactMatrix(rows + [target])
            return wide.rank() == ExactMatrix(rows).rank()

        assert in_span(ExactMatrix.identity(2))
        assert in_span(J2)

    def test_two_oscillator_pair(self):
        assert len(joint_centralizer([A_PAIR])) == 8
        assert len(joint_centralizer([A_PAIR, EXCHANGE])) == 4

    def test_output_commutes(self):
        for mats in ([A_PAIR], [A_PAIR, EXCHANGE], [C3]):
            for m in joint_centralizer(mats):
                for a in mats:
                    assert (m @ a) == (a @ m)


class TestMolien:
    def test_z3_table(self):
        g = FiniteGroup.generate([C3])
        t = molien_coefficients(g, 6)
        assert t.c0 == (1, 0, 1, 2, 1, 2, 3)
        assert t.c1[1] == 2 and t.s == 2

    def test_plus_minus_identity(self):
        g = FiniteGroup.generate([NEG])
        t = molien_coefficients(g, 5)
        assert t.c0 == (1, 0, 3, 0, 5, 0)
        assert t.c1 == (0, 4, 0, 8, 0, 12)

    def test_trivial_group_counts_everything(self):
        g = FiniteGroup([ExactMatrix.identity(2)])
        t = molien_coefficients(g, 4)
        assert t.c0 == (1, 2, 3, 4, 5)

    def test_complex_unitary_cyclic(self):
        g = FiniteGroup.generate([ExactMatrix.diagonal([GR_I, -GR_I])])
        assert len(g) == 4
        t = molien_coefficients(g, 4)
        assert t.c0[2] == 1 and t.c0[4] == 3

    def test_agrees_with_brute_force(self):
        groups = [
            FiniteGroup.generate([C3]),
            FiniteGroup.generate([NEG]),
            FiniteGroup([ExactMatrix.identity(2)]),
            FiniteGroup.generate([ExactMatrix.diagonal([GR_I, -GR_I])]),
            FiniteGroup.generate(
                [
                    ExactMatrix.from_rows([[0, 1, 0], [0, 0, 1], [1, 0, 0]]),
                    ExactMatrix.from_rows([[0, 1, 0], [1, 0, 0], [0, 0, 1]]),
                ]
            ),
        ]
        for g in groups:
            assert len(g) <= 8
            t = molien_coefficients(g, 6)
            for d in range(7):
                assert t.c0[d] == invariant_space_dimension(g, d), (g.dim, d)
            for d in range(4):
                assert t.c1[d] == covariant_space_dimension(g, d), (g.dim, d)


class TestGradientProperty:
    def test_z3_rows(self):
        g = FiniteGroup.generate([C3])
        k_basis = joint_centralizer(list(g.elements))
        assert len(k_basis) == 2
        rows = gradient_property_check(g, 2, k_basis)
        first, second = rows
        assert first.degree == 1 and first.counting_ok and first.rank_ok
        assert first.c1 == 2 and first.s_times_c0_next == 2
        # the count overshoots at n = 2, the exact rank does not
        assert second.c1 == 2 and second.s_times_c0_next == 4
        assert not second.counting_ok
        assert second.gradient_span_dim == 2 and second.rank_ok

    def test_trivial_group_linear_fields(self):
        g = FiniteGroup([ExactMatrix.identity(2)])
        k_basis = joint_centralizer([ExactMatrix.identity(2)])
        (row,) = gradient_property_check(g, 1, k_basis)
        assert row.c1 == 4
        assert row.gradient_span_dim == 4 and row.rank_ok

    def test_complex_representation_rejected(self):
        g = FiniteGroup.generate([ExactMatrix.diagonal([GR_I, -GR_I])])
        with pytest.raises(ValueError, match="real"):
            gradient_property_check(g, 1, [ExactMatrix.identity(2)])


class TestNormalizeEquivariant:
    def _example4_field(self):
        s = Spectrum((GR_I, -GR_I, GR_I, -GR_I))
        f = PolyVectorField.linear(s.matrix())
        # resonant, exchange-symmetric: z |z|^2 pattern on both oscillators
        for i, mu in [(0, (2, 1, 0, 0)), (1, (1, 2, 0, 0)),
                      (2, (0, 0, 2, 1)), (3, (0, 0, 1, 2))]:
            f = f + PolyVectorField.monomial(4, i, mu, gr(2))
        # nonresonant, exchange-symmetric quadratic
        for i, mu in [(0, (2, 0, 0, 0)), (1, (0, 2, 0, 0)),
                      (2, (0, 0, 2, 0)), (3, (0, 0, 0, 2))]:
            f = f + PolyVectorField.monomial(4, i, mu, GR_ONE)
        return s, f

    def test_exchange_symmetric_normal_form(self):
        s, f = self._example4_field()
        g = FiniteGroup.generate([EXCHANGE])
        assert group_equivariance_residual(f, g).is_zero()
        nf = normalize_equivariant(f, s, g, 3)
        assert verify_normal_form(nf).ok
        assert group_equivariance_residual(nf.normal_form, g).is_zero()
        assert group_equivariance_residual(nf.transform, g).is_zero()

    def test_trivial_group_matches_plain(self):
        s, f = self._example4_field()
        g = FiniteGroup([ExactMatrix.identity(4)])
        plain = normalize(f, s, 3)
        equi = normalize_equivariant(f, s, g, 3)
        assert equi.normal_form == plain.normal_form
        assert equi.transform == plain.transform

    def test_equivariant_input_required(self):
        s, f = self._example4_field()
        f = f + PolyVectorField.monomial(4, 0, (0, 0, 2, 1), gr(7))
        g = FiniteGroup.generate([EXCHANGE])
        with pytest.raises(ValueError, match="equivariant"):
            normalize_equivariant(f, s, g, 3)

    def test_group_must_commute_with_linear_part(self):
        s = Spectrum((1, 2, 3, 4))
        f = PolyVectorField.linear(s.matrix())
        g = FiniteGroup.generate([EXCHANGE])
        with pytest.raises(ValueError, match="commute"):
            normalize_equivariant(f, s, g, 3)


class TestReynolds:
    def test_field_projector_idempotent(self):
        g = FiniteGroup.generate([EXCHANGE])
        f = PolyVectorField.monomial(4, 0, (2, 1, 0, 0), gr(3)) + \
            PolyVectorField.monomial(4, 2, (1, 0, 1, 0), GR_I)
        once = reynolds_field(g, f)
        assert reynolds_field(g, once) == once

    def test_scalar_projector_idempotent(self):
        g = FiniteGroup.generate([C3])
        p = ScalarPoly.monomial(2, (2, 1), gr(4)) + ScalarPoly.monomial(2, (1, 0))
        once = reynolds_scalar(g, p)
        assert reynolds_scalar(g, once) == once

    def test_average_is_equivariant(self):
        g = FiniteGroup.generate([EXCHANGE])
        f = PolyVectorField.monomial(4, 1, (1, 1, 1, 0), gr(2))
        assert group_equivariance_residual(reynolds_field(g, f), g).is_zero()


class TestSymmetricInvariants:
    def test_exchange_on_two_oscillators(self):
        # complex coordinates (z1, z1b, z2, z2b); swapping the oscillators
        # keeps rho1+rho2 and the real cross term, kills the imaginary one
        s = Spectrum((GR_I, -GR_I, GR_I, -GR_I))
        basis = invariance_basis(s)
        assert basis.generators == (
            (1, 1, 0, 0), (1, 0, 0, 1), (0, 1, 1, 0), (0, 0, 1, 1),
        )
        g = FiniteGroup.generate([EXCHANGE])
        kept = symmetric_invariants(g, basis, 4)
        assert len(kept) == 2
        half = gr(1) / gr(2)
        assert kept[0] == ScalarPoly(
            4, {(1, 1, 0, 0): half, (0, 0, 1, 1): half}
        )
        assert kept[1] == ScalarPoly(
            4, {(1, 0, 0, 1): half, (0, 1, 1, 0): half}
        )

    def test_trivial_group_keeps_all(self):
        s = Spectrum((GR_I, -GR_I))
        basis = invariance_basis(s)
        g = FiniteGroup([ExactMatrix.identity(2)])
        kept = symmetric_invariants(g, basis, 4)
        assert kept == [ScalarPoly.monomial(2, (1, 1))]

    def test_odd_generator_averages_away(self):
        basis = invariance_basis(Spectrum((1, -2)))
        assert basis.generators == ((2, 1),)
        g = FiniteGroup.generate([NEG])
        assert symmetric_invariants(g, basis, 5) == []

    def test_degree_bound_filters(self):
        basis = InvarianceBasis(generators=((2, 1),), complete=True, degree_cap=10)
        g = FiniteGroup([ExactMatrix.identity(2)])
        assert symmetric_invariants(g, basis, 2) == []
