"""Pulsed two-spin exchange gates and their effective anisotropy.

Builds the 4x4 gates generated by H(t) = J(t) (S1.S2 + A(t)) for pulsed
exchange J(t) with anisotropy A(t), compresses a completed pulse into a
single exponential exp(-i lam (S1.S2 + Abar)) through pulse-measure
quadratures, and provides tomography, frame rotations, pulse tailoring
and scaling diagnostics on top.
"""

from .algebra import (
    CROSS,
    HEISENBERG,
    MINUS,
    PAIR,
    PLUS,
    S1,
    S2,
    SWAP,
    AnisotropyParams,
    GateDistance,
    assemble_anisotropy,
    build_spin_operators,
    decompose_anisotropy,
    gate_distance,
    heisenberg_term,
    matrix_exp,
    matrix_log_branched,
)
from .analysis import (
    GateReport,
    ScalingStudy,
    TomographyResult,
    extract_params,
    model_gate,
    run_comparison,
    scale_profile,
    scaling_study,
)
from .effective import (
    EffectiveGate,
    QuadratureInfo,
    QuadratureSpec,
    alpha_bar,
    beta_bar,
    closed_form_beta_bar,
    closed_form_residual_gamma,
    effective_gate,
    effective_params,
    gamma_bar,
    mu_bar,
    resonance_distance,
    rotate_frame,
    rotation_matrix,
)
from .errors import (
    BetaTooLarge,
    BranchAmbiguous,
    ConfigError,
    IsotropicCoefficientAnomalous,
    LambdaOutOfRange,
    NoConvergence,
    NonPositiveReference,
    NonSymmetricResidual,
    NotHermitian,
    NotTraceless,
    NotUnitary,
    OutOfTable,
    QuadratureNoConvergence,
    ResonantLambda,
    SpinPulseError,
    UnitarityLost,
)
from .propagation import (
    PropagationResult,
    hamiltonian_at,
    propagate,
    propagate_interaction_picture,
    unperturbed_gate,
)
from .pulses import (
    TRUNCATION_RATIO,
    AnisotropyProfile,
    SechPulse,
    TabulatedPulse,
    TimeGrid,
    eval_J,
    eval_beta,
    eval_gamma,
    eval_x,
    is_time_symmetric,
    shape_factor,
    tailored_params,
    tailored_sech,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # algebra
    "CROSS", "HEISENBERG", "MINUS", "PAIR", "PLUS", "S1", "S2", "SWAP",
    "AnisotropyParams", "GateDistance", "assemble_anisotropy",
    "build_spin_operators", "decompose_anisotropy", "gate_distance",
    "heisenberg_term", "matrix_exp", "matrix_log_branched",
    # pulses
    "TRUNCATION_RATIO", "AnisotropyProfile", "SechPulse", "TabulatedPulse",
    "TimeGrid", "eval_J", "eval_beta", "eval_gamma", "eval_x",
    "is_time_symmetric", "shape_factor", "tailored_params", "tailored_sech",
    # propagation
    "PropagationResult", "hamiltonian_at", "propagate",
    "propagate_interaction_picture", "unperturbed_gate",
    # effective
    "EffectiveGate", "QuadratureInfo", "QuadratureSpec", "alpha_bar",
    "beta_bar", "closed_form_beta_bar", "closed_form_residual_gamma",
    "effective_gate", "effective_params", "gamma_bar", "mu_bar",
    "resonance_distance", "rotate_frame", "rotation_matrix",
    # analysis
    "GateReport", "ScalingStudy", "TomographyResult", "extract_params",
    "model_gate", "run_comparison", "scale_profile", "scaling_study",
    # errors
    "SpinPulseError", "NotHermitian", "NotTraceless", "NotUnitary",
    "BranchAmbiguous", "LambdaOutOfRange", "NonPositiveReference",
    "OutOfTable", "NoConvergence", "UnitarityLost", "ResonantLambda",
    "QuadratureNoConvergence", "BetaTooLarge", "NonSymmetricResidual",
    "IsotropicCoefficientAnomalous", "ConfigError",
]
