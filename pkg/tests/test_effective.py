"""Pulse-average quadratures, closed forms, frame rotation."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from spinpulse import (
    AnisotropyParams,
    AnisotropyProfile,
    QuadratureSpec,
    SechPulse,
    alpha_bar,
    beta_bar,
    closed_form_beta_bar,
    closed_form_residual_gamma,
    effective_gate,
    effective_params,
    gamma_bar,
    model_gate,
    mu_bar,
    resonance_distance,
    rotate_frame,
    rotation_matrix,
    tailored_sech,
)
from spinpulse.errors import (
    BetaTooLarge,
    NonSymmetricResidual,
    QuadratureNoConvergence,
    ResonantLambda,
)

BETA1 = np.array([0.0, 0.0, 0.01])


def _sech_at(lam, tau=math.pi):
    return SechPulse(j0=lam / tau, tau=tau)


def _skewed_profile(pulse):
    def fn(t):
        t = np.asarray(t, dtype=float)
        envelope = pulse.J(t)
        ramp = 0.01 * envelope * (1.0 + np.tanh(2.0 * t / pulse.tau))
        flat = 0.007 * envelope
        return np.stack([ramp, flat, np.zeros_like(t)], axis=-1)

    return AnisotropyProfile(beta_fn=fn)


def test_beta_bar_matches_closed_form():
    profile = AnisotropyProfile(beta1=BETA1)
    for lam in np.arange(0.5, 6.01, 0.5):
        pulse = _sech_at(lam)
        value, info = beta_bar(pulse, profile)
        expected = closed_form_beta_bar(BETA1, pulse.j0, lam)
        np.testing.assert_allclose(value, expected, rtol=1e-10, atol=1e-16)
        assert info.change <= max(1e-10 * np.max(np.abs(value)), 1e-14)


def test_symmetric_profiles_have_no_odd_moments():
    profile = AnisotropyProfile(beta1=np.array([0.004, -0.006, 0.01]))
    for lam in (1.0, math.pi, 5.5):
        pulse = _sech_at(lam)
        alpha, _ = alpha_bar(pulse, profile)
        beta, _ = beta_bar(pulse, profile)
        mu, _ = mu_bar(pulse, profile, alpha, beta)
        assert np.max(np.abs(alpha)) <= 1e-12
        assert np.max(np.abs(mu)) <= 1e-12


def test_first_order_against_time_domain_quadrature():
    # independent oracle: same averages in t instead of the pulse measure
    pulse = SechPulse(j0=1.0, tau=math.pi)
    profile = _skewed_profile(pulse)
    lam = pulse.lam
    lo, hi = pulse.window()
    prefactor = 1.0 / (2.0 * math.sin(0.5 * lam))

    def component(kernel, axis):
        def integrand(t):
            weight = kernel(float(pulse.x(t)) - 0.5 * lam)
            beta_t = float(np.asarray(profile.beta_fn(t))[axis])
            return float(pulse.J(t)) * beta_t * weight

        value, _ = quad(integrand, lo, hi, limit=400)
        return prefactor * value

    alpha, _ = alpha_bar(pulse, profile)
    beta, _ = beta_bar(pulse, profile)
    for axis in range(3):
        np.testing.assert_allclose(
            alpha[axis], component(math.sin, axis), rtol=1e-8, atol=1e-14
        )
        np.testing.assert_allclose(
            beta[axis], component(math.cos, axis), rtol=1e-8, atol=1e-14
        )


def test_skewed_profile_regression_values():
    pulse = SechPulse(j0=1.0, tau=math.pi)
    profile = _skewed_profile(pulse)
    params, _ = effective_params(pulse, profile)
    np.testing.assert_allclose(params.alpha[0], 2.74834108e-3, rtol=1e-6)
    np.testing.assert_allclose(params.mu[2], 9.65226505e-6, rtol=1e-6)


def test_local_tensor_average():
    # with no first-order vector the ordered part vanishes and the mean
    # tensor is the J^2-weighted average: integral of J(t)^3 dt / lam
    pulse = SechPulse(j0=1.3, tau=2.0)
    seed = np.array([[0.2, 0.05, 0.0], [0.05, -0.1, 0.02], [0.0, 0.02, -0.1]])

    def gamma_fn(t):
        t = np.asarray(t, dtype=float)
        return pulse.J(t)[..., None, None] ** 2 * seed

    profile = AnisotropyProfile(gamma_model="custom", gamma_fn=gamma_fn)
    value, _ = gamma_bar(pulse, profile, np.zeros(3), np.zeros(3))
    expected = seed * (8.0 * pulse.j0**2 / 15.0)
    np.testing.assert_allclose(value, expected, rtol=1e-10)


def test_residual_tensor_closed_form():
    profile = AnisotropyProfile(beta1=BETA1, gamma_model="rotated-exchange")
    for lam in (math.pi / 2, math.pi, 1.5 * math.pi):
        pulse = _sech_at(lam)
        params, _ = effective_params(pulse, profile)
        rotated, _ = rotate_frame(params)
        expected = closed_form_residual_gamma(BETA1, pulse.j0, lam)
        np.testing.assert_allclose(rotated.gamma, expected, rtol=1e-9, atol=1e-16)


def test_residual_closed_form_series_handover():
    direct = closed_form_residual_gamma(BETA1, 1.0, 0.1001)
    series = closed_form_residual_gamma(BETA1, 1.0, 0.0999)
    np.testing.assert_allclose(direct, series, rtol=1e-4)


def test_resonance_guard():
    profile = AnisotropyProfile(beta1=BETA1)
    for lam in (2.0 * math.pi, 2.0 * math.pi - 0.05, 4.0 * math.pi + 0.08):
        with pytest.raises(ResonantLambda):
            effective_params(_sech_at(lam), profile)
    params, _ = effective_params(_sech_at(2.0 * math.pi + 0.2), profile)
    assert np.all(np.isfinite(params.as_vector()))
    assert resonance_distance(2.0 * math.pi + 0.2) == pytest.approx(0.2)
    assert resonance_distance(0.3) == pytest.approx(2.0 * math.pi - 0.3)


def test_rotation_matrix_defect_budget():
    rng = np.random.default_rng(21)
    direction = rng.standard_normal(3)
    direction /= np.linalg.norm(direction)
    for norm in (0.003, 0.01, 0.03, 0.1):
        r = rotation_matrix(norm * direction)
        defect = np.linalg.norm(r.T @ r - np.eye(3))
        assert defect <= 2.0 * norm**3
        # the defect is exactly the square of the second-order block
        np.testing.assert_allclose(defect, math.sqrt(2.0) / 4.0 * norm**4, rtol=1e-6)
    with pytest.raises(BetaTooLarge):
        rotation_matrix(np.array([0.4, 0.0, 0.0]))


def test_rotate_frame_moves_vector_into_tensor():
    beta = np.array([0.01, -0.02, 0.005])
    params = AnisotropyParams(
        alpha=np.zeros(3), beta=beta, mu=np.zeros(3), gamma=np.diag([0.1, 0.0, -0.1])
    )
    rotated, rotation = rotate_frame(params)
    assert np.all(rotated.beta == 0.0) and np.all(rotated.alpha == 0.0)
    counter = 0.5 * (beta @ beta * np.eye(3) - np.outer(beta, beta))
    np.testing.assert_allclose(rotated.gamma, params.gamma + counter, atol=1e-16)
    np.testing.assert_allclose(rotation, rotation_matrix(beta), atol=1e-16)
    bad = params.replace(alpha=np.array([1e-6, 0.0, 0.0]))
    with pytest.raises(NonSymmetricResidual):
        rotate_frame(bad)
    with pytest.raises(NonSymmetricResidual):
        rotate_frame(params.replace(mu=np.array([0.0, 1e-6, 0.0])))


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        QuadratureSpec(rule="simpson")
    with pytest.raises(ValueError):
        QuadratureSpec(base_order=1)
    with pytest.raises(ValueError):
        QuadratureSpec(rtol=0.0)


def test_quadrature_refinement_cap():
    pulse = SechPulse(j0=1.0, tau=math.pi)

    def jumpy(t):
        # an interior jump keeps the refinement change decaying only like 1/n
        t = np.asarray(t, dtype=float)
        step = 0.01 * np.where(t > 0.3, 1.0, -1.0)
        return np.stack([step, np.zeros_like(t), np.zeros_like(t)], axis=-1)

    with pytest.raises(QuadratureNoConvergence):
        beta_bar(pulse, AnisotropyProfile(beta_fn=jumpy))


def test_effective_gate_bundle():
    pulse = tailored_sech(math.pi)
    profile = AnisotropyProfile(beta1=BETA1)
    bundle = effective_gate(pulse, profile)
    assert bundle.lam == pytest.approx(math.pi)
    np.testing.assert_allclose(
        bundle.gate, model_gate(bundle.lam, bundle.params), atol=1e-15
    )
    assert bundle.validity["lambda_beta"] == pytest.approx(
        math.pi * np.linalg.norm(bundle.params.beta)
    )
    assert bundle.validity["near_resonance"] == pytest.approx(math.pi)
    assert set(bundle.quadrature) == {"alpha", "beta", "mu", "gamma"}
    assert all(info.order >= 128 for info in bundle.quadrature.values())
