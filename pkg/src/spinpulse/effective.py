"""Effective anisotropy of a completed pulse, to second order.

The full gate of a pulsed two-spin Hamiltonian is written as a single
exponential exp(-i lam (S1.S2 + Abar)) whose anisotropy Abar carries
mean first-order vectors alpha-bar and beta-bar, a symmetric tensor
Gamma-bar and a uniform-axis vector mu-bar.  All four are quadratures of
the pulse profile against trigonometric kernels in the pulse measure
s = x(t) / lam, evaluated here by Gauss-Legendre rules under order
doubling.

Sign and normalization conventions follow a single identity: conjugating
the cross product D_a = (S1 x S2)_a by the bare exchange gives

    exp(i x S1.S2) D_a exp(-i x S1.S2)
        = cos(x) D_a + sin(x) (S1 - S2)_a / 2,

so first-order weight leaks between the cross-product and difference
axes with quadrature kernels cos and sin, and the second-order averages
pick up the ordered double integrals implemented below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.special import roots_legendre

from .algebra import (
    _EPS,
    AnisotropyParams,
    HEISENBERG,
    assemble_anisotropy,
    matrix_exp,
)
from .errors import (
    BetaTooLarge,
    NonSymmetricResidual,
    QuadratureNoConvergence,
    ResonantLambda,
)
from .pulses import AnisotropyProfile, eval_beta, eval_gamma, shape_factor

__all__ = [
    "QuadratureSpec",
    "QuadratureInfo",
    "EffectiveGate",
    "alpha_bar",
    "beta_bar",
    "mu_bar",
    "gamma_bar",
    "effective_params",
    "effective_gate",
    "closed_form_beta_bar",
    "closed_form_residual_gamma",
    "rotation_matrix",
    "rotate_frame",
    "resonance_distance",
]

_CAP_1D = 16384
_CAP_2D = 2048
_RESONANCE_MARGIN = 0.1


@dataclass(frozen=True)
class QuadratureSpec:
    """Quadrature rule and refinement targets for the pulse averages."""

    rule: str = "gauss-legendre"
    base_order: int = 64
    rtol: float = 1e-10
    abs_floor: float = 1e-14

    def __post_init__(self):
        if self.rule != "gauss-legendre":
            raise ValueError(f"unsupported quadrature rule {self.rule!r}")
        if self.base_order < 2:
            raise ValueError("base_order must be at least 2")
        if self.rtol <= 0.0 or self.abs_floor < 0.0:
            raise ValueError("need rtol > 0 and abs_floor >= 0")


@dataclass(frozen=True)
class QuadratureInfo:
    """Accepted order (per axis) and the last refinement change."""

    order: int
    change: float


@dataclass(frozen=True)
class EffectiveGate:
    """Single-exponential gate with its parameters and validity metrics."""

    lam: float
    params: AnisotropyParams
    gate: np.ndarray
    validity: dict
    quadrature: dict = field(repr=False)


@lru_cache(maxsize=32)
def _gl01(order: int):
    nodes, weights = roots_legendre(order)
    x = 0.5 * (nodes + 1.0)
    w = 0.5 * weights
    x.flags.writeable = False
    w.flags.writeable = False
    return x, w


def _refine(evaluate: Callable, spec: QuadratureSpec, cap: int, what: str):
    order = spec.base_order
    value = evaluate(order)
    while True:
        order *= 2
        if order > cap:
            raise QuadratureNoConvergence(
                f"{what}: refinement passed order {cap} without settling"
            )
        refined = evaluate(order)
        change = float(np.max(np.abs(refined - value)))
        scale = float(np.max(np.abs(refined)))
        if change <= max(spec.rtol * scale, spec.abs_floor):
            return refined, QuadratureInfo(order=order, change=change)
        value = refined


def resonance_distance(lam: float) -> float:
    """Distance from lam to the nearest nonzero multiple of 2*pi."""
    n = max(1, round(lam / (2.0 * math.pi)))
    return abs(lam - 2.0 * math.pi * n)


def _resonance_guard(lam: float, what: str) -> None:
    if lam <= 0.0:
        raise ValueError(f"{what}: pulse strength must be positive, got {lam:.6g}")
    dist = resonance_distance(lam)
    if dist < _RESONANCE_MARGIN:
        raise ResonantLambda(
            f"{what}: lambda = {lam:.6g} is within {_RESONANCE_MARGIN} of a "
            f"multiple of 2*pi, where the single-exponential form degenerates"
        )


def _first_order(pulse, profile, spec, kernel, what):
    lam = pulse.lam
    _resonance_guard(lam, what)
    prefactor = lam / (2.0 * math.sin(0.5 * lam))

    def evaluate(order):
        x, w = _gl01(order)
        beta = eval_beta(profile, pulse, pulse.time_at_fraction(x))
        return prefactor * ((w * kernel(lam * (x - 0.5))) @ beta)

    return _refine(evaluate, spec, _CAP_1D, what)


def alpha_bar(pulse, profile, spec: Optional[QuadratureSpec] = None):
    """Mean difference-axis vector: the sin-kernel pulse average of beta.

    Returns (vector, QuadratureInfo).  Vanishes at machine level for
    profiles mirror-symmetric about the pulse centre.
    """
    return _first_order(pulse, profile, spec or QuadratureSpec(), np.sin, "alpha_bar")


def beta_bar(pulse, profile, spec: Optional[QuadratureSpec] = None):
    """Mean cross-product vector: the cos-kernel pulse average of beta.

    Returns (vector, QuadratureInfo).
    """
    return _first_order(pulse, profile, spec or QuadratureSpec(), np.cos, "beta_bar")


def _triangle(pulse, profile, lam, evaluate_kernel, spec, cap, what):
    """Ordered double integral over 0 < s2 < s1 < 1 in the pulse measure."""

    def evaluate(order):
        x, w = _gl01(order)
        b_outer = eval_beta(profile, pulse, pulse.time_at_fraction(x))
        s_inner = x[:, np.newaxis] * x[np.newaxis, :]
        b_inner = eval_beta(
            profile, pulse, pulse.time_at_fraction(s_inner.ravel())
        ).reshape(order, order, 3)
        delta = x[:, np.newaxis] * (1.0 - x[np.newaxis, :])
        weight = (w * x)[:, np.newaxis] * w[np.newaxis, :]
        return evaluate_kernel(b_outer, b_inner, lam * delta, weight)

    return _refine(evaluate, spec, cap, what)


def mu_bar(pulse, profile, alpha, beta, spec: Optional[QuadratureSpec] = None):
    """Mean uniform-axis vector from ordered pairs of first-order kicks.

    Parameters
    ----------
    alpha, beta : ndarray
        The converged first-order averages, which feed the counterterm.

    Returns (vector, QuadratureInfo).
    """
    spec = spec or QuadratureSpec()
    lam = pulse.lam
    counter = 2.0 * np.cross(alpha, beta)

    def kernel(b1, b2, phase, weight):
        integrand = np.cross(b1[:, np.newaxis, :], b2) * np.cos(phase)[
            ..., np.newaxis
        ] + counter * np.sin(phase)[..., np.newaxis]
        return 0.25 * lam * np.einsum("ij,ija->a", weight, integrand)

    return _triangle(pulse, profile, lam, kernel, spec, _CAP_2D, "mu_bar")


def gamma_bar(pulse, profile, alpha, beta, spec: Optional[QuadratureSpec] = None):
    """Mean symmetric tensor: local average plus ordered second-order part.

    The local term averages the microscopic tensor over the pulse measure;
    the ordered term folds pairs of first-order kicks against a sin kernel,
    with the means alpha and beta subtracted so the result is the genuine
    second-order remainder.

    Returns (tensor, QuadratureInfo); the info reports the ordered part,
    the local average refines under the same ladder.
    """
    spec = spec or QuadratureSpec()
    lam = pulse.lam
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    mean_sq = float(beta @ beta + alpha @ alpha)
    mean_outer = np.outer(beta, beta) + np.outer(alpha, alpha)

    def evaluate_local(order):
        x, w = _gl01(order)
        gamma = eval_gamma(profile, pulse, pulse.time_at_fraction(x))
        return np.einsum("i,iab->ab", w, gamma)

    local, _ = _refine(evaluate_local, spec, _CAP_1D, "gamma_bar[local]")

    def kernel(b1, b2, phase, weight):
        dots = np.einsum("ia,ija->ij", b1, b2) - mean_sq
        sym = (
            np.einsum("ia,ijb->ijab", b1, b2)
            + np.einsum("ija,ib->ijab", b2, b1)
            - 2.0 * mean_outer
        )
        integrand = 2.0 * dots[..., np.newaxis, np.newaxis] * np.eye(3) - sym
        scaled = np.sin(phase)[..., np.newaxis, np.newaxis] * integrand
        return 0.25 * lam * np.einsum("ij,ijab->ab", weight, scaled)

    ordered, info = _triangle(pulse, profile, lam, kernel, spec, _CAP_2D, "gamma_bar")
    return local + ordered, info


def effective_params(
    pulse,
    profile: Optional[AnisotropyProfile],
    spec: Optional[QuadratureSpec] = None,
):
    """All four pulse averages as one parameter set.

    Returns
    -------
    (AnisotropyParams, dict)
        The parameters and a dict of QuadratureInfo keyed by
        "alpha", "beta", "mu", "gamma".
    """
    spec = spec or QuadratureSpec()
    _resonance_guard(pulse.lam, "effective_params")
    alpha, info_a = alpha_bar(pulse, profile, spec)
    beta, info_b = beta_bar(pulse, profile, spec)
    mu, info_m = mu_bar(pulse, profile, alpha, beta, spec)
    gamma, info_g = gamma_bar(pulse, profile, alpha, beta, spec)
    params = AnisotropyParams(alpha=alpha, beta=beta, mu=mu, gamma=gamma)
    infos = {"alpha": info_a, "beta": info_b, "mu": info_m, "gamma": info_g}
    return params, infos


def effective_gate(
    pulse,
    profile: Optional[AnisotropyProfile],
    spec: Optional[QuadratureSpec] = None,
) -> EffectiveGate:
    """Single-exponential gate exp(-i lam (S1.S2 + Abar)) for the pulse.

    The validity dict reports lambda * |beta-bar|, lambda * |alpha-bar|
    (both should stay well below 1 for the second-order form to hold)
    and the distance of lam from the nearest nonzero multiple of 2*pi.
    """
    params, infos = effective_params(pulse, profile, spec)
    lam = float(pulse.lam)
    generator = HEISENBERG + assemble_anisotropy(params)
    gate = matrix_exp(generator, scale=lam)
    validity = {
        "lambda_beta": abs(lam) * float(np.linalg.norm(params.beta)),
        "lambda_alpha": abs(lam) * float(np.linalg.norm(params.alpha)),
        "near_resonance": resonance_distance(lam),
    }
    return EffectiveGate(
        lam=lam, params=params, gate=gate, validity=validity, quadrature=infos
    )


def closed_form_beta_bar(beta1, j0: float, lam: float) -> np.ndarray:
    """Mean cross-product vector of a sech-squared pulse, in closed form.

    For beta(t) = beta1 * J(t) with J(t) = j0 * sech^2(2 t / tau) and
    lam = j0 * tau:

        beta_bar = beta1 * (4 j0 / lam^2) * (2 - lam cot(lam / 2)).
    """
    beta1 = np.asarray(beta1, dtype=float)
    return beta1 * (4.0 * j0 / lam**2) * shape_factor(lam)


def closed_form_residual_gamma(beta1, j0: float, lam: float) -> np.ndarray:
    """Rotated-frame tensor of a sech-squared rotated-exchange pulse.

    For a pulse whose anisotropy is a pure axis rotation, beta(t) =
    beta1 * J(t) with Gamma(t) = -(|beta|^2 I - beta beta^T) / 2, the
    tensor left after rotating away beta-bar is

        ((8 j0^2) / (3 lam^4)) (lam^2 + 6 lam cot(lam/2) - 12)
            * (|beta1|^2 I - beta1 beta1^T),

    evaluated through its series below lam = 0.1 where the bracket
    cancels to fourth order.
    """
    beta1 = np.asarray(beta1, dtype=float)
    axis = float(beta1 @ beta1) * np.eye(3) - np.outer(beta1, beta1)
    if abs(lam) < 0.1:
        l2 = lam * lam
        coefficient = -(8.0 * j0 * j0 / 3.0) * (
            1.0 / 60.0 + l2 / 2520.0 + l2 * l2 / 100800.0
        )
    else:
        bracket = lam * lam + 6.0 * lam / math.tan(0.5 * lam) - 12.0
        coefficient = (8.0 * j0 * j0 / (3.0 * lam**4)) * bracket
    return coefficient * axis


def rotation_matrix(beta: np.ndarray) -> np.ndarray:
    """Axis rotation removing the mean cross-product vector, to second order.

    R = I + E + Q with E_ab = eps_abc beta_c and
    Q = -(|beta|^2 I - beta beta^T) / 2.  Orthogonal up to terms of
    fourth order in |beta|; refuses |beta| > 0.3 where that budget is
    meaningless.
    """
    beta = np.asarray(beta, dtype=float)
    norm = float(np.linalg.norm(beta))
    if norm > 0.3:
        raise BetaTooLarge(
            f"rotation_matrix: |beta| = {norm:.4g} exceeds 0.3; the "
            f"second-order rotation no longer applies"
        )
    e = np.einsum("abc,c->ab", _EPS, beta)
    q = -0.5 * (norm * norm * np.eye(3) - np.outer(beta, beta))
    return np.eye(3) + e + q


def rotate_frame(params: AnisotropyParams):
    """Absorb the mean cross-product vector into local spin frames.

    Only defined when the difference and uniform axes are empty (the
    time-symmetric case); otherwise raises NonSymmetricResidual.  Returns
    (rotated AnisotropyParams with beta = 0, rotation matrix); the tensor
    picks up the second-order counterterm +(|beta|^2 I - beta beta^T)/2.
    """
    if (
        float(np.linalg.norm(params.alpha)) > 1e-10
        or float(np.linalg.norm(params.mu)) > 1e-10
    ):
        raise NonSymmetricResidual(
            "rotate_frame needs vanishing difference- and uniform-axis "
            "vectors; apply it to time-symmetric profiles only"
        )
    beta = params.beta
    rotation = rotation_matrix(beta)
    counter = 0.5 * (float(beta @ beta) * np.eye(3) - np.outer(beta, beta))
    rotated = AnisotropyParams(
        alpha=np.zeros(3),
        beta=np.zeros(3),
        mu=np.zeros(3),
        gamma=params.gamma + counter,
    )
    return rotated, rotation
