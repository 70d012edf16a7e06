"""
Tests for the discrete and continuous strike pricers
"""

import math

import numpy as np
import pytest
from scipy.stats import norm

from exceptions import AdmissibilityError, ConfigError, DomainError, QuadratureError
from mgf import increment_cf_grid
from models import JumpSpec, QuadratureConfig, SimConfig, SwapContract
from montecarlo import mc_strike_continuous, mc_strike_rv, simulate
from pricing import (
    PanelQuadrature, auto_omega_max, continuous_strike, discrete_strike, expected_abs_return,
    positive_return_probability, tilted_return_probability
)


def _gaussian_abs_return(v, dt):
    """E|exp(Y) - 1| for Y ~ N(-v dt / 2, v dt)"""
    s = math.sqrt(v * dt)
    return 2.0 * (2.0 * norm.cdf(s / 2.0) - 1.0)


def test_panel_quadrature_polynomial_and_oscillatory():
    def func(x):
        return np.vstack([x ** 3, np.sin(10.0 * x)])

    result = PanelQuadrature(func, nodes=8, rtol=1e-12).integrate(np.linspace(0.0, 2.0, 5))
    assert result.values[0] == pytest.approx(4.0, rel=1e-13)
    assert result.values[1] == pytest.approx((1.0 - math.cos(20.0)) / 10.0, rel=1e-11)
    assert result.panels >= 4


def test_panel_quadrature_refines_only_the_rough_panel():
    def func(x):
        return np.vstack([np.sqrt(x), np.cos(x)])

    result = PanelQuadrature(func, nodes=16, rtol=1e-10, max_rounds=40).integrate(np.linspace(0.0, 1.0, 33))
    assert result.values[0] == pytest.approx(2.0 / 3.0, rel=1e-9)
    assert result.values[1] == pytest.approx(math.sin(1.0), rel=1e-12)
    # one bisection per round, all of it next to the endpoint singularity
    assert result.panels <= 32 + 40
    assert result.evaluations <= 3 * 16 * (32 + 2 * 40)


def test_panel_quadrature_gives_up():
    def func(x):
        return np.sign(x - 0.3)[None, :] * np.abs(x - 0.3) ** -0.9

    with pytest.raises(QuadratureError):
        PanelQuadrature(func, nodes=4, rtol=1e-14, max_rounds=2).integrate(np.linspace(0.0, 1.0, 3))


def test_auto_omega_max(baseline_params):
    dt = 1.0 / 252
    assert auto_omega_max(baseline_params, dt) == pytest.approx(40.0 / math.sqrt(0.04 * dt))
    assert auto_omega_max(baseline_params.replace(theta_v=0.01), dt) == pytest.approx(40.0 / math.sqrt(0.01 * dt))


def test_constant_variance_abs_return(deterministic_params, no_jumps):
    dt = 1.0 / 12
    value = expected_abs_return(deterministic_params, no_jumps, 3, dt)
    assert value == pytest.approx(_gaussian_abs_return(0.04, dt), rel=1e-6)


def test_constant_variance_probabilities(deterministic_params, no_jumps):
    dt = 1.0 / 12
    s = math.sqrt(0.04 * dt)
    up = positive_return_probability(deterministic_params, no_jumps, 1, dt)
    tilted = tilted_return_probability(deterministic_params, no_jumps, 1, dt)
    assert up == pytest.approx(norm.cdf(-s / 2.0), rel=1e-6)
    assert tilted == pytest.approx(norm.cdf(s / 2.0), rel=1e-6)


def test_constant_variance_discrete_strike(deterministic_params, no_jumps):
    contract = SwapContract(t=1.0, n=12)
    result = discrete_strike(deterministic_params, no_jumps, contract)
    expected = 100.0 * math.sqrt(math.pi / 24.0) * 12 * _gaussian_abs_return(0.04, 1.0 / 12)
    assert result.strike == pytest.approx(expected, rel=1e-6)
    assert len(result.contributions) == 12
    assert max(result.contributions) - min(result.contributions) < 1e-8
    assert result.method == "fourier_panels"
    assert result.node_count > 0


def test_constant_variance_continuous_strike(deterministic_params, no_jumps, daily_contract):
    result = continuous_strike(deterministic_params, no_jumps, daily_contract)
    assert result.strike == pytest.approx(20.0, abs=1e-8)
    assert result.method == "laplace_tensor"
    assert len(result.contributions) == QuadratureConfig().time_nodes


def test_continuous_strike_without_substitution(baseline_params, no_jumps, daily_contract):
    mapped = continuous_strike(baseline_params, no_jumps, daily_contract)
    direct = continuous_strike(baseline_params, no_jumps, daily_contract, QuadratureConfig(s_substitution=False))
    assert direct.strike == pytest.approx(mapped.strike, rel=1e-4)


def test_continuous_strike_is_below_root_mean_variance(baseline_params, double_exponential_jumps, daily_contract):
    # Jensen: E[(1/T) int sqrt(V)] <= sqrt(E[(1/T) int V])
    p = baseline_params
    mean_v = p.theta_v + (p.v0 - p.theta_v) * (1.0 - math.exp(-p.kappa_v)) / p.kappa_v
    result = continuous_strike(p, double_exponential_jumps, daily_contract)
    assert 0.0 < result.strike < 100.0 * math.sqrt(mean_v + 0.02)


def test_overflowing_product_transform_is_rejected_quickly(baseline_params):
    spec = JumpSpec.double_exponential(
        p=0.4, eta1=10.0, eta2=5.0, p_prime=0.5, eta3=7.2, eta4=2.0, product_transform=True
    )
    with pytest.raises(AdmissibilityError):
        discrete_strike(baseline_params, spec, SwapContract(t=1.0, n=4))


def test_variance_jump_probability_raises_the_product_form_strike(baseline_params):
    # B = 0.952 + 0.881 p_prime grows with p_prime, and so does the variance jump ln B
    contract = SwapContract(t=1.0, n=4)
    strikes = [
        discrete_strike(baseline_params, JumpSpec.double_exponential(
            p=0.4, eta1=10.0, eta2=5.0, p_prime=p_prime, eta3=2.2, eta4=20.0, product_transform=True
        ), contract).strike
        for p_prime in (0.1, 0.5, 0.9)
    ]
    assert strikes[0] < strikes[1] < strikes[2]


def test_continuous_strike_rejects_downward_variance_jumps(baseline_params, double_exponential_jumps, daily_contract):
    spec = double_exponential_jumps.replace(p_prime=0.5)
    with pytest.raises(AdmissibilityError):
        continuous_strike(baseline_params, spec, daily_contract)


def test_small_frequency_integrand_is_finite(baseline_params, no_jumps):
    u = np.array([1e-8, 1e-6, 1e-3])
    cf = increment_cf_grid(baseline_params, no_jumps, np.concatenate([1j * u + 1.0, 1j * u]), [1], 1.0 / 252)
    integrand = (cf[0, :3] - cf[0, 3:]).imag / u
    assert np.all(np.isfinite(integrand))
    assert integrand[0] == pytest.approx(integrand[1], rel=1e-3)


def test_reporting_scale(deterministic_params, no_jumps):
    contract = SwapContract(t=1.0, n=4)
    points = discrete_strike(deterministic_params, no_jumps, contract)
    natural = discrete_strike(deterministic_params, no_jumps, contract.replace(vol_points_scale=1.0))
    assert natural.strike == pytest.approx(points.strike / 100.0, rel=1e-12)


def test_truncation_too_low_is_reported(deterministic_params, no_jumps):
    with pytest.raises(QuadratureError):
        expected_abs_return(deterministic_params, no_jumps, 1, 1.0 / 252, QuadratureConfig(omega_max=5.0))


def test_bad_inputs_are_rejected(baseline_params, no_jumps):
    with pytest.raises(DomainError):
        expected_abs_return(baseline_params, no_jumps, 0, 0.01)
    with pytest.raises(DomainError):
        positive_return_probability(baseline_params, no_jumps, 1, 0.0)
    with pytest.raises(ConfigError):
        discrete_strike(baseline_params.replace(kappa_v=-1.0), no_jumps, SwapContract(n=4))
    with pytest.raises(ConfigError):
        discrete_strike(baseline_params, no_jumps, SwapContract(n=4), QuadratureConfig(rtol=0.0))


def test_probabilities_are_probabilities(baseline_params, double_exponential_jumps):
    for i in (1, 100):
        up = positive_return_probability(baseline_params, double_exponential_jumps, i, 1.0 / 252)
        tilted = tilted_return_probability(baseline_params, double_exponential_jumps, i, 1.0 / 252)
        assert 0.0 <= up <= 1.0
        assert 0.0 <= tilted <= 1.0
        assert tilted > up


def test_jumps_raise_the_strike(baseline_params, no_jumps, double_exponential_jumps):
    contract = SwapContract(t=1.0, n=52)
    plain = discrete_strike(baseline_params, no_jumps, contract).strike
    jumpy = discrete_strike(baseline_params, double_exponential_jumps, contract).strike
    assert jumpy > plain


@pytest.mark.slow
def test_continuous_strike_against_simulation(baseline_params, no_jumps):
    contract = SwapContract(t=1.0, n=50)
    batch = simulate(baseline_params, no_jumps, contract,
                     SimConfig(paths=20000, steps_per_interval=10, seed=11, chunk_paths=5000))
    estimate = mc_strike_continuous(batch, contract)
    assert estimate.within(continuous_strike(baseline_params, no_jumps, contract).strike, n_se=4.0)


@pytest.mark.slow
@pytest.mark.parametrize('law', ['no_jumps', 'double_exponential_jumps', 'gaussian_exponential_jumps'])
def test_discrete_strike_against_simulation(request, baseline_params, daily_contract, law):
    spec = request.getfixturevalue(law)
    batch = simulate(baseline_params, spec, daily_contract,
                     SimConfig(paths=20000, steps_per_interval=2, seed=12, chunk_paths=5000))
    estimate = mc_strike_rv(batch, daily_contract)
    assert estimate.within(discrete_strike(baseline_params, spec, daily_contract).strike, n_se=4.0)


@pytest.mark.slow
def test_discrete_strike_decreases_to_continuous(baseline_params, double_exponential_jumps):
    strikes = [
        discrete_strike(baseline_params, double_exponential_jumps, SwapContract(t=1.0, n=n)).strike
        for n in (4, 12, 52, 252, 1000)
    ]
    limit = continuous_strike(baseline_params, double_exponential_jumps, SwapContract(t=1.0, n=1000)).strike
    assert all(earlier > later for earlier, later in zip(strikes, strikes[1:]))
    assert abs(strikes[-1] - limit) / limit < 0.005


@pytest.mark.slow
def test_intensity_sensitivities(baseline_params, double_exponential_jumps):
    contract = SwapContract(t=1.0, n=52)

    def strike(**changes):
        return discrete_strike(baseline_params.replace(**changes), double_exponential_jumps, contract).strike

    by_kappa = [strike(kappa_l=k, theta_l=0.05) for k in (1.0, 3.0, 9.0)]
    by_theta = [strike(theta_l=t) for t in (0.01, 0.05, 0.2)]
    by_sigma = [strike(sigma_l=s) for s in (0.0, 0.1, 0.3)]
    assert by_kappa[0] < by_kappa[1] < by_kappa[2]
    assert by_theta[0] < by_theta[1] < by_theta[2]
    assert all(later <= earlier + 1e-6 for earlier, later in zip(by_sigma, by_sigma[1:]))


@pytest.mark.slow
def test_more_upward_jumps_lower_the_strike(baseline_params, double_exponential_jumps):
    contract = SwapContract(t=1.0, n=52)
    strikes = [
        discrete_strike(baseline_params, double_exponential_jumps.replace(p=p), contract).strike
        for p in (0.1, 0.5, 0.9)
    ]
    assert strikes[0] > strikes[1] > strikes[2]
