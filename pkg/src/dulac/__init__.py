"""Exact normal-form engine for polynomial vector fields near equilibrium."""

from dulac.algebra import (
    ExactMatrix,
    GaussianRational,
    PolyVectorField,
    ScalarPoly,
    bargman_inner,
    compose_shift,
    directional_derivative,
    evaluate,
    gr,
    invert_shift,
    lie_poisson,
    matrix_apply,
    truncate,
)
from dulac.convergence import (
    Advisory,
    ConvergenceReport,
    condition_omega_partial,
    convergence_report,
    poincare_criterion,
    spectrum_lattice_denominator,
)
from dulac.normalform import (
    ComplexificationMap,
    NormalFormResult,
    NormalFormVerification,
    centralizer_decompose,
    complexify,
    normalize,
    realify,
    verify_normal_form,
)
from dulac.numerics import (
    Trajectory,
    conjugacy_error,
    hopf_system,
    hopf_unfolding,
    integrate,
    orbit_space_demo,
    rotation_frequency,
    truncation_scaling,
)
from dulac.resonance import (
    InvarianceBasis,
    Resonance,
    ResonanceReport,
    Spectrum,
    enumerate_resonances,
    invariance_basis,
    resonance_report,
)
from dulac.symmetry import (
    FiniteGroup,
    MolienTable,
    gradient_property_check,
    group_equivariance_residual,
    joint_centralizer,
    molien_coefficients,
    normalize_equivariant,
    symmetric_invariants,
)
from dulac.unfold import (
    AsymptoticRegime,
    UnfoldedSystem,
    asymptotic_linearization,
    build_unfolding,
    verify_unfolding,
)

__all__ = [
    "Advisory",
    "AsymptoticRegime",
    "ComplexificationMap",
    "ConvergenceReport",
    "ExactMatrix",
    "FiniteGroup",
    "GaussianRational",
    "InvarianceBasis",
    "MolienTable",
    "NormalFormResult",
    "NormalFormVerification",
    "PolyVectorField",
    "Resonance",
    "ResonanceReport",
    "ScalarPoly",
    "Spectrum",
    "Trajectory",
    "UnfoldedSystem",
    "asymptotic_linearization",
    "bargman_inner",
    "build_unfolding",
    "centralizer_decompose",
    "complexify",
    "compose_shift",
    "condition_omega_partial",
    "conjugacy_error",
    "convergence_report",
    "directional_derivative",
    "enumerate_resonances",
    "evaluate",
    "gr",
    "gradient_property_check",
    "group_equivariance_residual",
    "hopf_system",
    "hopf_unfolding",
    "integrate",
    "invariance_basis",
    "invert_shift",
    "joint_centralizer",
    "lie_poisson",
    "matrix_apply",
    "molien_coefficients",
    "normalize",
    "normalize_equivariant",
    "orbit_space_demo",
    "poincare_criterion",
    "realify",
    "resonance_report",
    "rotation_frequency",
    "spectrum_lattice_denominator",
    "symmetric_invariants",
    "truncate",
    "truncation_scaling",
    "verify_normal_form",
    "verify_unfolding",
]

__version__ = "0.1.0"
