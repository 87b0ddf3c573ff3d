"""Gate-level diagnostics: tomography, model comparison, scaling fits.

Tomography inverts a unitary back to its anisotropy parameters through
the branch-resolved matrix logarithm; comparisons measure how far the
time-ordered gate sits from its single-exponential model; scaling
studies scale the anisotropy and fit the power law of that distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .algebra import (
    AnisotropyParams,
    GateDistance,
    HEISENBERG,
    assemble_anisotropy,
    decompose_anisotropy,
    gate_distance,
    matrix_exp,
    matrix_log_branched,
)
from .effective import EffectiveGate, QuadratureSpec, effective_gate, effective_params
from .errors import IsotropicCoefficientAnomalous
from .propagation import PropagationResult, propagate
from .pulses import AnisotropyProfile, eval_beta

__all__ = [
    "TomographyResult",
    "GateReport",
    "ScalingStudy",
    "extract_params",
    "model_gate",
    "run_comparison",
    "scale_profile",
    "scaling_study",
]

_TR_P2 = float(np.einsum("ij,ji->", HEISENBERG, HEISENBERG).real)
_PEAK_LIMIT = 0.05


@dataclass(frozen=True)
class TomographyResult:
    """Parameters read back from a gate, with the isotropic coefficient."""

    lam: float
    params: AnisotropyParams
    isotropic_coeff: float


@dataclass(frozen=True)
class GateReport:
    """Side-by-side record of the time-ordered and model gates."""

    lam: float
    numeric: PropagationResult
    effective: EffectiveGate
    distance: GateDistance
    extracted: Optional[TomographyResult]
    param_gap: Optional[float]


@dataclass(frozen=True)
class ScalingStudy:
    """Distances versus anisotropy strength and the fitted power law."""

    lam: float
    order: int
    scales: np.ndarray
    strengths: np.ndarray
    distances: np.ndarray
    slope: Optional[float]
    floor: float


def extract_params(gate: np.ndarray, lam: float, margin: float = 0.1) -> TomographyResult:
    """Read the anisotropy parameters back out of a gate.

    Takes the branch-resolved logarithm of the gate at strength ``lam``,
    measures the isotropic coefficient (the exchange weight, which must
    stay within 0.2 of 1), subtracts exactly one unit of exchange and
    decomposes the remainder on the 15-parameter basis.  Any deviation of
    the isotropic weight from 1 therefore lands in the trace of the
    returned tensor, which makes the assemble/extract round trip exact.

    Raises
    ------
    IsotropicCoefficientAnomalous
        If the exchange weight strays more than 0.2 from 1, which signals
        a branch or normalization problem rather than anisotropy.
    """
    generator = matrix_log_branched(gate, lam, margin=margin)
    # The trace of the generator is the gate's global phase; distances are
    # phase-free, so tomography discards it rather than failing on it.
    generator = generator - (np.trace(generator) / 4.0) * np.eye(4)
    iso = float(np.einsum("ij,ji->", generator, HEISENBERG).real) / _TR_P2
    if abs(iso - 1.0) > 0.2:
        raise IsotropicCoefficientAnomalous(
            f"isotropic coefficient {iso:.6g} is more than 0.2 away from 1"
        )
    params = decompose_anisotropy(generator - HEISENBERG)
    return TomographyResult(lam=float(lam), params=params, isotropic_coeff=iso)


def model_gate(lam: float, params: AnisotropyParams) -> np.ndarray:
    """Single-exponential gate exp(-i lam (S1.S2 + A(params)))."""
    return matrix_exp(HEISENBERG + assemble_anisotropy(params), scale=float(lam))


def run_comparison(
    pulse,
    profile: Optional[AnisotropyProfile],
    spec: Optional[QuadratureSpec] = None,
    tol: float = 1e-11,
    margin: float = 0.1,
) -> GateReport:
    """Propagate a pulse and compare against its single-exponential model.

    Returns a GateReport holding both gates, their phase-free distance
    and, when the strength permits a branch-resolved logarithm, the
    parameters read back from the time-ordered gate together with the
    largest gap between read-back and model parameters.
    """
    effective = effective_gate(pulse, profile, spec)
    numeric = propagate(pulse, profile, tol=tol)
    distance = gate_distance(numeric.gate, effective.gate)
    lam = float(pulse.lam)
    extracted = None
    param_gap = None
    if margin <= lam <= 2.0 * math.pi - margin:
        extracted = extract_params(numeric.gate, lam, margin=margin)
        param_gap = float(
            np.max(
                np.abs(extracted.params.as_vector() - effective.params.as_vector())
            )
        )
    return GateReport(
        lam=lam,
        numeric=numeric,
        effective=effective,
        distance=distance,
        extracted=extracted,
        param_gap=param_gap,
    )


def scale_profile(profile: AnisotropyProfile, factor: float) -> AnisotropyProfile:
    """Scale the first-order anisotropy by ``factor``.

    Linear and callable first-order models scale by ``factor``; a custom
    tensor scales by ``factor**2`` to keep its second-order character,
    while the derived models ("none", "rotated-exchange") follow the
    scaled vector automatically.
    """
    factor = float(factor)
    beta1 = None
    beta_fn = None
    if profile.beta1 is not None:
        beta1 = factor * profile.beta1
    elif profile.beta_fn is not None:
        inner_beta = profile.beta_fn

        def beta_fn(t, _f=factor, _fn=inner_beta):
            return _f * np.asarray(_fn(t), dtype=float)

    gamma_fn = None
    if profile.gamma_model == "custom":
        inner_gamma = profile.gamma_fn

        def gamma_fn(t, _f=factor * factor, _fn=inner_gamma):
            return _f * np.asarray(_fn(t), dtype=float)

    return AnisotropyProfile(
        beta1=beta1,
        beta_fn=beta_fn,
        gamma_model=profile.gamma_model,
        gamma_fn=gamma_fn,
    )


def _peak_strength(pulse, profile: AnisotropyProfile, samples: int = 2049) -> float:
    lo, hi = pulse.window()
    t = np.linspace(lo, hi, samples)
    beta = eval_beta(profile, pulse, t)
    return float(np.max(np.linalg.norm(beta, axis=-1)))


def scaling_study(
    pulse,
    profile: AnisotropyProfile,
    scales: Sequence[float] = (1.0, 2.0, 4.0),
    order: int = 2,
    spec: Optional[QuadratureSpec] = None,
    tol: float = 1e-11,
) -> ScalingStudy:
    """Fit the power law of the model error in the anisotropy strength.

    For each scale the first-order profile is multiplied up, the pulse is
    propagated, and the distance to the model truncated at ``order`` is
    recorded: order 1 keeps only the first-order vectors (distance should
    shrink quadratically), order 2 keeps everything (cubically).

    The slope is a least-squares fit of log-distance against
    log-strength; it is reported as None when fewer than three scales are
    given or any distance sits at or below ten times the propagation
    tolerance, where the fit would measure integrator noise.

    Raises
    ------
    ValueError
        If ``order`` is not 1 or 2, or the largest scaled profile peaks
        above 0.05, outside the window where the power law is clean.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    scales = np.asarray(sorted(float(s) for s in scales))
    if scales.size == 0 or np.any(scales <= 0.0):
        raise ValueError("scales must be positive")
    base_peak = _peak_strength(pulse, profile)
    if base_peak * scales[-1] > _PEAK_LIMIT:
        raise ValueError(
            f"scaling_study: peak anisotropy {base_peak * scales[-1]:.4g} at the "
            f"largest scale exceeds {_PEAK_LIMIT}; distances would leave the "
            f"power-law window"
        )
    lam = float(pulse.lam)
    distances = np.empty_like(scales)
    for i, scale in enumerate(scales):
        scaled = scale_profile(profile, scale)
        params, _ = effective_params(pulse, scaled, spec)
        if order == 1:
            params = AnisotropyParams(
                alpha=params.alpha,
                beta=params.beta,
                mu=np.zeros(3),
                gamma=np.zeros((3, 3)),
            )
        model = model_gate(lam, params)
        numeric = propagate(pulse, scaled, tol=tol)
        distances[i] = gate_distance(numeric.gate, model).frobenius_phase_free
    floor = 10.0 * tol
    slope = None
    if scales.size >= 3 and float(np.min(distances)) > floor:
        design = np.stack([np.log(base_peak * scales), np.ones_like(scales)], axis=1)
        coeffs, *_ = np.linalg.lstsq(design, np.log(distances), rcond=None)
        slope = float(coeffs[0])
    return ScalingStudy(
        lam=lam,
        order=order,
        scales=scales,
        strengths=base_peak * scales,
        distances=distances,
        slope=slope,
        floor=floor,
    )
