"""Exchange pulse profiles and the anisotropy models that ride on them.

A pulse profile exposes the exchange envelope J(t), its running integral
x(t) and the total strength lam = integral of J over the pulse.  The
anisotropy profile supplies the first-order vector beta(t) and the
second-order symmetric tensor Gamma(t) entering

    H(t) = J(t) * (S1.S2 + beta(t).(S1 x S2) + S1.Gamma(t).S2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import LambdaOutOfRange, NonPositiveReference, OutOfTable

__all__ = [
    "TRUNCATION_RATIO",
    "SechPulse",
    "TabulatedPulse",
    "AnisotropyProfile",
    "TimeGrid",
    "tailored_params",
    "tailored_sech",
    "shape_factor",
    "eval_J",
    "eval_x",
    "eval_beta",
    "eval_gamma",
    "is_time_symmetric",
]

#: envelope ratio J(t_edge) / J0 at which a pulse is truncated
TRUNCATION_RATIO = 1e-14

GAMMA_MODELS = ("none", "rotated-exchange", "custom")


def _sech(v):
    """Overflow-safe sech."""
    e = np.exp(-np.abs(v))
    return 2.0 * e / (1.0 + e * e)


def shape_factor(lam: float) -> float:
    """Evaluate 2 - lam * cot(lam / 2), positive on (0, 2*pi).

    Switches to the series lam^2/6 + lam^4/360 + lam^6/15120 below
    lam = 1e-3, where the direct expression loses all significant digits
    to cancellation.
    """
    lam = float(lam)
    if abs(lam) < 1e-3:
        l2 = lam * lam
        return l2 / 6.0 + l2 * l2 / 360.0 + l2 * l2 * l2 / 15120.0
    return 2.0 - lam / math.tan(lam / 2.0)


def tailored_params(
    lam: float, j0_ref: float = 1.0, tau_ref: float = math.pi
) -> tuple[float, float]:
    """Pulse height and width that keep the mean first-order vector fixed.

    Starting from a reference pulse (j0_ref, tau_ref) at lam = pi, returns

        j0(lam) = j0_ref * (2 lam^2 / pi^2) / (2 - lam cot(lam/2))
        tau(lam) = tau_ref * (pi / 2 lam) * (2 - lam cot(lam/2))

    so that j0 * tau = lam * (j0_ref * tau_ref / pi) and, for a linear
    anisotropy beta(t) = beta1 J(t), the mean vector is independent of lam.

    Raises
    ------
    LambdaOutOfRange
        If lam is not inside (0, 2*pi); the height diverges at 0 and the
        width diverges at 2*pi.
    NonPositiveReference
        If either reference is not strictly positive.
    """
    if not (0.0 < lam < 2.0 * math.pi):
        raise LambdaOutOfRange(
            f"tailored_params: lambda = {lam:.6g} outside (0, {2 * math.pi:.6g})"
        )
    if j0_ref <= 0.0 or tau_ref <= 0.0:
        raise NonPositiveReference(
            f"tailored_params: references must be positive, got "
            f"j0_ref = {j0_ref:.6g}, tau_ref = {tau_ref:.6g}"
        )
    shape = shape_factor(lam)
    j0 = j0_ref * (2.0 * lam * lam / math.pi**2) / shape
    tau = tau_ref * (math.pi / (2.0 * lam)) * shape
    return j0, tau


@dataclass(frozen=True)
class SechPulse:
    """Pulse J(t) = j0 * sech^2(2 (t - t0) / tau) with strength j0 * tau."""

    j0: float
    tau: float
    t0: float = 0.0
    family: str = "sech2"

    def __post_init__(self):
        if self.j0 <= 0.0 or self.tau <= 0.0:
            raise ValueError(
                f"SechPulse needs j0 > 0 and tau > 0, got j0 = {self.j0:.6g}, "
                f"tau = {self.tau:.6g}"
            )

    @property
    def lam(self) -> float:
        return self.j0 * self.tau

    def J(self, t):
        arg = 2.0 * (np.asarray(t, dtype=float) - self.t0) / self.tau
        return self.j0 * _sech(arg) ** 2

    def x(self, t):
        arg = 2.0 * (np.asarray(t, dtype=float) - self.t0) / self.tau
        return 0.5 * self.lam * (1.0 + np.tanh(arg))

    def time_at_fraction(self, s):
        """Invert x(t) = s * lam for s strictly inside (0, 1)."""
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0.0) or np.any(s >= 1.0):
            raise ValueError("pulse fraction must lie strictly inside (0, 1)")
        return self.t0 + 0.5 * self.tau * np.arctanh(2.0 * s - 1.0)

    def window(self, ratio: float = TRUNCATION_RATIO) -> tuple[float, float]:
        """Interval outside which J(t) / j0 stays at or below ``ratio``."""
        half = 0.5 * self.tau * math.acosh(1.0 / math.sqrt(ratio))
        return (self.t0 - half, self.t0 + half)


def tailored_sech(
    lam: float, j0_ref: float = 1.0, tau_ref: float = math.pi, t0: float = 0.0
) -> SechPulse:
    """Sech^2 pulse with height and width from :func:`tailored_params`."""
    j0, tau = tailored_params(lam, j0_ref, tau_ref)
    return SechPulse(j0=j0, tau=tau, t0=t0, family="tailored-sech2")


class TabulatedPulse:
    """Pulse defined by sampled (time, J) pairs, cubic between samples.

    The interpolant is shape-preserving and clamped at zero so J never
    goes negative; x(t) is the exact antiderivative of the interpolant.
    Evaluation outside the table raises OutOfTable.
    """

    family = "custom"

    def __init__(self, times, values, t0: Optional[float] = None):
        times = np.asarray(times, dtype=float)
        values = np.asarray(values, dtype=float)
        if times.ndim != 1 or times.shape != values.shape or times.size < 4:
            raise ValueError("need matching 1-d tables with at least 4 samples")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("times must be strictly increasing")
        if np.any(values < 0.0):
            raise ValueError("J samples must be non-negative")
        if not np.any(values > 0.0):
            raise ValueError("J samples must not all vanish")
        self.times = times
        self.values = values
        self.t_min = float(times[0])
        self.t_max = float(times[-1])
        self.t0 = float(t0) if t0 is not None else 0.5 * (self.t_min + self.t_max)
        self.j0 = float(np.max(values))
        self._interp = PchipInterpolator(times, values, extrapolate=False)
        self._anti = self._interp.antiderivative()
        self._x0 = float(self._anti(self.t_min))
        self.lam = float(self._anti(self.t_max) - self._x0)
        # dense monotone table for inverting x(t)
        dense_t = np.linspace(self.t_min, self.t_max, 4097)
        self._dense_t = dense_t
        self._dense_x = self._anti(dense_t) - self._x0
        # uniform grids land a few ulps past the endpoints; treat that as on
        self._edge_slack = 64.0 * np.finfo(float).eps * max(
            abs(self.t_min), abs(self.t_max), self.t_max - self.t_min
        )

    def _clamped(self, t: np.ndarray) -> np.ndarray:
        if np.any(t < self.t_min - self._edge_slack) or np.any(
            t > self.t_max + self._edge_slack
        ):
            raise OutOfTable(
                f"TabulatedPulse: t outside table [{self.t_min:.6g}, {self.t_max:.6g}]"
            )
        return np.clip(t, self.t_min, self.t_max)

    def J(self, t):
        t = self._clamped(np.asarray(t, dtype=float))
        return np.clip(self._interp(t), 0.0, None)

    def x(self, t):
        t = self._clamped(np.asarray(t, dtype=float))
        return self._anti(t) - self._x0

    def time_at_fraction(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0.0) or np.any(s >= 1.0):
            raise ValueError("pulse fraction must lie strictly inside (0, 1)")
        target = s * self.lam
        t = np.interp(target, self._dense_x, self._dense_t)
        # two Newton polish steps where the envelope is meaningfully positive
        for _ in range(2):
            j = np.clip(self._interp(t), 0.0, None)
            step = np.where(j > 1e-9 * self.j0, (self._anti(t) - self._x0 - target), 0.0)
            t = np.clip(t - np.divide(step, j, out=np.zeros_like(step), where=j > 0),
                        self.t_min, self.t_max)
        return t

    def window(self, ratio: float = TRUNCATION_RATIO) -> tuple[float, float]:
        return (self.t_min, self.t_max)


@dataclass(frozen=True)
class AnisotropyProfile:
    """Anisotropy riding on a pulse.

    ``beta1`` selects the linear model beta(t) = beta1 * J(t); a callable
    ``beta_fn(t) -> (..., 3)`` replaces it for non-linear profiles.  The
    tensor model is one of

    - "none": Gamma(t) = 0,
    - "rotated-exchange": Gamma(t) = -(|beta|^2 I - beta beta^T) / 2,
      the tensor induced when the anisotropy is a pure axis rotation of
      the exchange,
    - "custom": supplied by ``gamma_fn(t) -> (..., 3, 3)``.
    """

    beta1: Optional[np.ndarray] = None
    beta_fn: Optional[Callable] = None
    gamma_model: str = "none"
    gamma_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.beta1 is not None:
            if self.beta_fn is not None:
                raise ValueError("give either beta1 or beta_fn, not both")
            arr = np.asarray(self.beta1, dtype=float)
            if arr.shape != (3,):
                raise ValueError(f"beta1 must be a 3-vector, got shape {arr.shape}")
            object.__setattr__(self, "beta1", arr)
        if self.gamma_model not in GAMMA_MODELS:
            raise ValueError(
                f"gamma_model must be one of {GAMMA_MODELS}, got {self.gamma_model!r}"
            )
        if self.gamma_model == "custom" and self.gamma_fn is None:
            raise ValueError("gamma_model 'custom' needs gamma_fn")


@dataclass(frozen=True)
class TimeGrid:
    """Propagation or sampling interval, in physical time or pulse measure."""

    t_min: float
    t_max: float
    mode: str = "physical-time"

    def __post_init__(self):
        if self.mode not in ("physical-time", "pulse-measure"):
            raise ValueError(f"unknown grid mode {self.mode!r}")
        if not self.t_max > self.t_min:
            raise ValueError("TimeGrid needs t_max > t_min")

    @classmethod
    def from_pulse(cls, pulse, ratio: float = TRUNCATION_RATIO) -> "TimeGrid":
        lo, hi = pulse.window(ratio)
        return cls(t_min=lo, t_max=hi, mode="physical-time")

    @property
    def span(self) -> float:
        return self.t_max - self.t_min

    def linspace(self, n: int) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, n)


def eval_J(pulse, t):
    """Exchange envelope J(t)."""
    return pulse.J(t)


def eval_x(pulse, t):
    """Running pulse integral x(t) = integral of J up to t."""
    return pulse.x(t)


def eval_beta(profile: Optional[AnisotropyProfile], pulse, t) -> np.ndarray:
    """First-order anisotropy vector beta(t), shaped t.shape + (3,)."""
    t = np.asarray(t, dtype=float)
    if profile is None or (profile.beta1 is None and profile.beta_fn is None):
        return np.zeros(t.shape + (3,))
    if profile.beta_fn is not None:
        out = np.asarray(profile.beta_fn(t), dtype=float)
        if out.shape != t.shape + (3,):
            raise ValueError(
                f"beta_fn returned shape {out.shape}, expected {t.shape + (3,)}"
            )
        return out
    return pulse.J(t)[..., np.newaxis] * profile.beta1


def eval_gamma(profile: Optional[AnisotropyProfile], pulse, t) -> np.ndarray:
    """Symmetric anisotropy tensor Gamma(t), shaped t.shape + (3, 3)."""
    t = np.asarray(t, dtype=float)
    if profile is None or profile.gamma_model == "none":
        return np.zeros(t.shape + (3, 3))
    if profile.gamma_model == "custom":
        out = np.asarray(profile.gamma_fn(t), dtype=float)
        if out.shape != t.shape + (3, 3):
            raise ValueError(
                f"gamma_fn returned shape {out.shape}, expected {t.shape + (3, 3)}"
            )
        return out
    beta = eval_beta(profile, pulse, t)
    norm2 = np.einsum("...a,...a->...", beta, beta)
    outer = np.einsum("...a,...b->...ab", beta, beta)
    return -0.5 * (norm2[..., np.newaxis, np.newaxis] * np.eye(3) - outer)


def is_time_symmetric(
    pulse, profile: Optional[AnisotropyProfile] = None, tol: float = 1e-12, n: int = 64
) -> bool:
    """Check J, beta and Gamma for mirror symmetry about the pulse centre.

    Samples ``n`` mirrored point pairs across the truncation window and
    compares absolutely against ``tol``.
    """
    lo, hi = pulse.window()
    half = min(pulse.t0 - lo, hi - pulse.t0)
    offsets = np.linspace(0.0, half, n)
    left = pulse.t0 - offsets
    right = pulse.t0 + offsets
    worst = float(np.max(np.abs(pulse.J(right) - pulse.J(left))))
    if profile is not None:
        worst = max(
            worst,
            float(
                np.max(np.abs(eval_beta(profile, pulse, right) - eval_beta(profile, pulse, left)))
            ),
            float(
                np.max(np.abs(eval_gamma(profile, pulse, right) - eval_gamma(profile, pulse, left)))
            ),
        )
    return worst <= tol
