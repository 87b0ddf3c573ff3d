"""Tomography roundtrips, comparisons, power-law scaling fits."""

import math

import numpy as np
import pytest

from spinpulse import (
    HEISENBERG,
    AnisotropyParams,
    AnisotropyProfile,
    SechPulse,
    assemble_anisotropy,
    extract_params,
    matrix_exp,
    model_gate,
    propagate,
    run_comparison,
    scale_profile,
    scaling_study,
    tailored_sech,
)
from spinpulse.errors import IsotropicCoefficientAnomalous


def random_params(rng, scale):
    gamma = scale * rng.standard_normal((3, 3))
    return AnisotropyParams(
        alpha=scale * rng.standard_normal(3),
        beta=scale * rng.standard_normal(3),
        mu=scale * rng.standard_normal(3),
        gamma=0.5 * (gamma + gamma.T),
    )


def test_extraction_roundtrip_randomized():
    rng = np.random.default_rng(42)
    for _ in range(25):
        lam = rng.uniform(0.3, 5.9)
        params = random_params(rng, 0.002)
        gate = model_gate(lam, params)
        result = extract_params(gate, lam)
        # the tensor trace projects onto the exchange weight and is put
        # back into the tensor by the subtract-exactly-one convention
        expected_iso = 1.0 + np.trace(params.gamma) / 3.0
        assert result.isotropic_coeff == pytest.approx(expected_iso, abs=1e-12)
        np.testing.assert_allclose(
            result.params.as_vector(), params.as_vector(), atol=1e-12
        )


def test_isotropic_weight_lands_in_tensor_trace():
    lam = math.pi
    params = random_params(np.random.default_rng(1), 0.002)
    generator = 1.08 * HEISENBERG + assemble_anisotropy(params)
    result = extract_params(matrix_exp(generator, scale=lam), lam)
    expected_iso = 1.08 + np.trace(params.gamma) / 3.0
    assert result.isotropic_coeff == pytest.approx(expected_iso, abs=1e-12)
    np.testing.assert_allclose(
        result.params.gamma, params.gamma + 0.08 * np.eye(3), atol=1e-12
    )


def test_anomalous_isotropic_weight_rejected():
    gate = matrix_exp(1.5 * HEISENBERG, scale=math.pi)
    with pytest.raises(IsotropicCoefficientAnomalous):
        extract_params(gate, math.pi)


def test_tomography_agrees_with_quadratures_for_skewed_profile():
    # end-to-end oracle: parameters read back from the brute-force gate
    # must match the quadrature predictions to third-order accuracy
    pulse = SechPulse(j0=1.0, tau=math.pi)

    def fn(t):
        t = np.asarray(t, dtype=float)
        envelope = pulse.J(t)
        ramp = 0.01 * envelope * (1.0 + np.tanh(2.0 * t / pulse.tau))
        flat = 0.007 * envelope
        return np.stack([ramp, flat, np.zeros_like(t)], axis=-1)

    profile = AnisotropyProfile(beta_fn=fn)
    report = run_comparison(pulse, profile, tol=1e-12)
    assert report.extracted is not None
    assert report.param_gap < 1e-6
    # the asymmetric moments are far above that gap, so their signs and
    # normalizations are pinned by the numeric gate
    assert abs(report.effective.params.alpha[0]) > 1e-3
    assert abs(report.effective.params.mu[2]) > 5e-6


def test_run_comparison_report_fields():
    pulse = tailored_sech(math.pi)
    profile = AnisotropyProfile(beta1=np.array([0.0, 0.0, 0.01]))
    report = run_comparison(pulse, profile)
    assert report.lam == pytest.approx(math.pi)
    assert report.distance.frobenius_phase_free < 2e-8
    assert report.distance.fidelity > 1.0 - 1e-12
    assert report.param_gap < 2e-8
    assert report.numeric.unitarity_drift < 1e-12


def test_run_comparison_skips_tomography_outside_branch_window():
    pulse = SechPulse(j0=6.9 / math.pi, tau=math.pi)  # lam past 2*pi - margin
    report = run_comparison(pulse, AnisotropyProfile(beta1=np.array([0, 0, 0.005])))
    assert report.extracted is None and report.param_gap is None
    assert report.distance.frobenius_phase_free < 1e-4


def test_scale_profile_variants():
    pulse = SechPulse(j0=1.0, tau=2.0)
    beta1 = np.array([0.01, 0.0, 0.02])
    linear = scale_profile(AnisotropyProfile(beta1=beta1), 3.0)
    np.testing.assert_allclose(linear.beta1, 3.0 * beta1, rtol=1e-15)

    def fn(t):
        t = np.asarray(t, dtype=float)
        return np.stack([np.cos(t), np.zeros_like(t), np.zeros_like(t)], axis=-1)

    wrapped = scale_profile(AnisotropyProfile(beta_fn=fn), 2.0)
    np.testing.assert_allclose(wrapped.beta_fn(0.3), 2.0 * fn(0.3), rtol=1e-15)

    def gamma_fn(t):
        t = np.asarray(t, dtype=float)
        return np.tile(0.001 * np.eye(3), t.shape + (1, 1))

    custom = scale_profile(
        AnisotropyProfile(beta1=beta1, gamma_model="custom", gamma_fn=gamma_fn), 2.0
    )
    np.testing.assert_allclose(custom.gamma_fn(0.1), 4.0 * gamma_fn(0.1), rtol=1e-15)


def test_scaling_validation():
    pulse = SechPulse(j0=1.0, tau=math.pi)
    profile = AnisotropyProfile(beta1=np.array([0.0, 0.0, 0.02]))
    with pytest.raises(ValueError):
        scaling_study(pulse, profile, order=3)
    with pytest.raises(ValueError):
        scaling_study(pulse, profile, scales=(0.0, 1.0, 2.0))
    with pytest.raises(ValueError):
        # peak reaches 0.08 at the largest scale
        scaling_study(pulse, profile, scales=(1.0, 2.0, 4.0))


def test_scaling_slope_is_none_at_noise_floor():
    pulse = SechPulse(j0=1.0, tau=math.pi)
    profile = AnisotropyProfile(beta1=np.array([0.0, 0.0, 0.002]))
    study = scaling_study(pulse, profile, scales=(1.0, 2.0, 4.0), order=2, tol=1e-6)
    assert study.slope is None
    assert study.floor == pytest.approx(1e-5)
    assert np.all(study.strengths == 0.002 * np.array([1.0, 2.0, 4.0]))


def test_scaling_second_order_slope():
    pulse = SechPulse(j0=1.0, tau=math.pi)
    profile = AnisotropyProfile(beta1=np.array([0.0, 0.0, 0.005]))
    study = scaling_study(pulse, profile, scales=(1.0, 2.0, 4.0), order=2)
    assert study.slope == pytest.approx(3.0, abs=0.3)
    assert np.all(np.diff(study.distances) > 0.0)


def test_model_gate_definition():
    params = random_params(np.random.default_rng(2), 0.01)
    lam = 1.1
    expected = matrix_exp(HEISENBERG + assemble_anisotropy(params), scale=lam)
    np.testing.assert_allclose(model_gate(lam, params), expected, atol=1e-15)
