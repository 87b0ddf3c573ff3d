"""Pulse shapes, running integrals, tailoring, tabulated envelopes."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from spinpulse import (
    TRUNCATION_RATIO,
    AnisotropyProfile,
    SechPulse,
    TabulatedPulse,
    TimeGrid,
    eval_beta,
    eval_gamma,
    is_time_symmetric,
    shape_factor,
    tailored_params,
    tailored_sech,
)
from spinpulse.errors import LambdaOutOfRange, NonPositiveReference, OutOfTable


def test_sech_pulse_basics():
    pulse = SechPulse(j0=1.3, tau=2.0, t0=0.4)
    assert pulse.lam == pytest.approx(2.6)
    assert pulse.J(0.4) == pytest.approx(1.3)
    np.testing.assert_allclose(pulse.J(0.4 + 0.7), pulse.J(0.4 - 0.7), rtol=1e-15)
    assert pulse.x(0.4) == pytest.approx(0.5 * pulse.lam)
    lo, hi = pulse.window()
    assert pulse.x(lo) <= pulse.lam * 1e-13
    assert pulse.x(hi) >= pulse.lam * (1.0 - 1e-13)
    with pytest.raises(ValueError):
        SechPulse(j0=-1.0, tau=1.0)
    with pytest.raises(ValueError):
        SechPulse(j0=1.0, tau=0.0)


def test_running_integral_matches_quadrature():
    pulse = SechPulse(j0=0.8, tau=3.0, t0=-0.2)
    lo, _ = pulse.window()
    for t in (-2.0, -0.2, 0.5, 3.1):
        expected, _ = quad(pulse.J, lo, t, limit=200)
        np.testing.assert_allclose(pulse.x(t) - pulse.x(lo), expected, rtol=1e-10)


def test_total_integral_is_strength():
    pulse = SechPulse(j0=1.1, tau=1.7)
    total, _ = quad(pulse.J, -np.inf, np.inf)
    np.testing.assert_allclose(total, pulse.lam, rtol=1e-10)


def test_time_at_fraction_inverts_integral():
    pulse = SechPulse(j0=2.0, tau=1.5, t0=1.0)
    s = np.array([1e-6, 0.2, 0.5, 0.9, 1.0 - 1e-6])
    t = pulse.time_at_fraction(s)
    np.testing.assert_allclose(pulse.x(t) / pulse.lam, s, atol=1e-13)
    assert pulse.time_at_fraction(0.5) == pytest.approx(1.0)
    for bad in (0.0, 1.0, -0.1, 1.1):
        with pytest.raises(ValueError):
            pulse.time_at_fraction(bad)


def test_window_hits_truncation_ratio():
    pulse = SechPulse(j0=1.0, tau=2.0)
    lo, hi = pulse.window()
    np.testing.assert_allclose(pulse.J(hi) / pulse.j0, TRUNCATION_RATIO, rtol=1e-8)
    assert pulse.J(0.99 * hi) > TRUNCATION_RATIO * pulse.j0
    lo3, hi3 = pulse.window(ratio=1e-3)
    assert hi3 < hi and lo3 > lo


def test_envelope_is_overflow_safe():
    pulse = SechPulse(j0=1.0, tau=1.0)
    with np.errstate(over="raise"):
        values = pulse.J(np.array([-1e7, 1e7]))
    np.testing.assert_array_equal(values, [0.0, 0.0])


def test_shape_factor_values_and_series():
    assert shape_factor(math.pi) == pytest.approx(2.0, abs=1e-14)
    assert shape_factor(math.pi / 2) == pytest.approx(2.0 - math.pi / 2, abs=1e-14)
    # series and direct expression agree where they hand over (shape ~ lam^2)
    below, above = 0.999e-3, 1.001e-3
    np.testing.assert_allclose(shape_factor(below) / below**2,
                               shape_factor(above) / above**2, rtol=1e-8)
    np.testing.assert_allclose(shape_factor(1e-4), 1e-8 / 6.0, rtol=1e-7)


def test_tailored_params_reference_point():
    j0, tau = tailored_params(math.pi, j0_ref=1.0, tau_ref=math.pi)
    assert j0 == pytest.approx(1.0, abs=1e-14)
    assert tau == pytest.approx(math.pi, abs=1e-13)
    j0_half, _ = tailored_params(math.pi / 2, j0_ref=1.0, tau_ref=math.pi)
    np.testing.assert_allclose(j0_half, 0.5 / (2.0 - math.pi / 2), rtol=1e-13)


def test_tailored_strength_is_requested():
    for lam in (0.4, 1.0, math.pi, 5.5):
        pulse = tailored_sech(lam, j0_ref=1.0, tau_ref=math.pi)
        assert pulse.lam == pytest.approx(lam, rel=1e-13)
        assert pulse.family == "tailored-sech2"


def test_tailored_guards():
    for bad in (0.0, -1.0, 2.0 * math.pi, 7.0):
        with pytest.raises(LambdaOutOfRange):
            tailored_params(bad)
    with pytest.raises(NonPositiveReference):
        tailored_params(1.0, j0_ref=0.0)
    with pytest.raises(NonPositiveReference):
        tailored_params(1.0, tau_ref=-2.0)


def _sech_table(j0=1.0, tau=2.0, n=2001):
    reference = SechPulse(j0=j0, tau=tau)
    lo, hi = reference.window(ratio=1e-12)
    times = np.linspace(lo, hi, n)
    return reference, times, reference.J(times)


def test_tabulated_pulse_matches_source():
    reference, times, values = _sech_table()
    pulse = TabulatedPulse(times, values)
    np.testing.assert_allclose(pulse.lam, reference.lam, rtol=1e-7)
    probe = np.linspace(-1.5, 1.5, 17)
    np.testing.assert_allclose(pulse.J(probe), reference.J(probe), rtol=1e-6)
    expected, _ = quad(lambda t: float(pulse.J(t)), pulse.t_min, 0.9, limit=400)
    np.testing.assert_allclose(pulse.x(0.9), expected, rtol=1e-8)


def test_tabulated_fraction_roundtrip():
    _, times, values = _sech_table()
    pulse = TabulatedPulse(times, values)
    s = np.array([0.05, 0.3, 0.5, 0.77, 0.99])
    t = pulse.time_at_fraction(s)
    np.testing.assert_allclose(pulse.x(t) / pulse.lam, s, atol=1e-9)


def test_tabulated_guards():
    _, times, values = _sech_table()
    pulse = TabulatedPulse(times, values)
    with pytest.raises(OutOfTable):
        pulse.J(pulse.t_max + 1.0)
    with pytest.raises(OutOfTable):
        pulse.x(pulse.t_min - 1.0)
    with pytest.raises(ValueError):
        TabulatedPulse(times[:3], values[:3])
    with pytest.raises(ValueError):
        TabulatedPulse(times[::-1], values)
    with pytest.raises(ValueError):
        TabulatedPulse(times, values - 1.0)
    with pytest.raises(ValueError):
        TabulatedPulse(times, np.zeros_like(values))


def test_eval_beta_shapes_and_models():
    pulse = SechPulse(j0=1.0, tau=2.0)
    beta1 = np.array([0.01, 0.0, -0.02])
    profile = AnisotropyProfile(beta1=beta1)
    assert eval_beta(profile, pulse, 0.3).shape == (3,)
    t = np.linspace(-1, 1, 5)
    out = eval_beta(profile, pulse, t)
    assert out.shape == (5, 3)
    np.testing.assert_allclose(out, pulse.J(t)[:, None] * beta1, rtol=1e-15)
    grid = t.reshape(1, 5)
    assert eval_beta(profile, pulse, grid).shape == (1, 5, 3)
    assert np.all(eval_beta(None, pulse, t) == 0.0)

    def fn(times):
        times = np.asarray(times, dtype=float)
        return np.stack([np.sin(times), np.zeros_like(times), np.cos(times)], axis=-1)

    custom = AnisotropyProfile(beta_fn=fn)
    np.testing.assert_allclose(eval_beta(custom, pulse, t), fn(t), rtol=1e-15)
    with pytest.raises(ValueError):
        AnisotropyProfile(beta1=beta1, beta_fn=fn)
    with pytest.raises(ValueError):
        AnisotropyProfile(beta1=np.array([1.0, 2.0]))


def test_eval_gamma_models():
    pulse = SechPulse(j0=1.0, tau=2.0)
    beta1 = np.array([0.0, 0.01, 0.0])
    none = AnisotropyProfile(beta1=beta1, gamma_model="none")
    t = np.array([0.0, 0.7])
    assert np.all(eval_gamma(none, pulse, t) == 0.0)
    rotated = AnisotropyProfile(beta1=beta1, gamma_model="rotated-exchange")
    beta = pulse.J(t)[:, None] * beta1
    for i in range(2):
        expected = -0.5 * (
            beta[i] @ beta[i] * np.eye(3) - np.outer(beta[i], beta[i])
        )
        np.testing.assert_allclose(eval_gamma(rotated, pulse, t)[i], expected,
                                   atol=1e-16)

    def gamma_fn(times):
        times = np.asarray(times, dtype=float)
        return np.tile(0.001 * np.eye(3), times.shape + (1, 1))

    custom = AnisotropyProfile(beta1=beta1, gamma_model="custom", gamma_fn=gamma_fn)
    np.testing.assert_allclose(eval_gamma(custom, pulse, t), gamma_fn(t), rtol=0)
    with pytest.raises(ValueError):
        AnisotropyProfile(beta1=beta1, gamma_model="custom")
    with pytest.raises(ValueError):
        AnisotropyProfile(beta1=beta1, gamma_model="other")


def test_time_symmetry_detection():
    pulse = SechPulse(j0=1.0, tau=2.0)
    assert is_time_symmetric(pulse)
    assert is_time_symmetric(pulse, AnisotropyProfile(beta1=np.array([0, 0, 0.01])))

    def skewed(times):
        times = np.asarray(times, dtype=float)
        ramp = 0.01 * (1.0 + np.tanh(times))
        return np.stack([ramp, np.zeros_like(times), np.zeros_like(times)], axis=-1)

    assert not is_time_symmetric(pulse, AnisotropyProfile(beta_fn=skewed))


def test_time_grid():
    pulse = SechPulse(j0=1.0, tau=2.0, t0=0.5)
    grid = TimeGrid.from_pulse(pulse)
    assert (grid.t_min, grid.t_max) == pulse.window()
    assert grid.span == pytest.approx(grid.t_max - grid.t_min)
    assert grid.linspace(5).shape == (5,)
    with pytest.raises(ValueError):
        TimeGrid(t_min=1.0, t_max=0.0)
    with pytest.raises(ValueError):
        TimeGrid(t_min=0.0, t_max=1.0, mode="weird")
