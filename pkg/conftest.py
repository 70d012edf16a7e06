"""
Shared fixtures for the VolStrike test suites
"""

import json

import pytest

from models import JumpSpec, ModelParams, QuadratureConfig, SimConfig, SwapContract


@pytest.fixture
def baseline_params():
    """Baseline diffusion parameters with the default intensity coefficients"""
    return ModelParams()


@pytest.fixture
def deterministic_params():
    """Constant variance V = 0.04, zero carry, no intensity"""
    return ModelParams(
        r=0.02, d=0.02, v0=0.04, lambda0=0.0,
        kappa_v=10.0, theta_v=0.04, sigma_v=1e-8,
        kappa_l=3.0, theta_l=0.0, sigma_l=0.0, rho=0.0,
    )


@pytest.fixture
def no_jumps():
    return JumpSpec.none()


@pytest.fixture
def double_exponential_jumps():
    """Baseline double-exponential law with upward variance jumps only"""
    return JumpSpec.double_exponential(p=0.4, eta1=10.0, eta2=5.0, p_prime=1.0, eta3=25.0, eta4=25.0)


@pytest.fixture
def gaussian_exponential_jumps():
    return JumpSpec.gaussian_exponential(nu=-0.05, delta=0.1, rho_j=-0.5, eta=0.05)


@pytest.fixture
def daily_contract():
    return SwapContract(t=1.0, n=252)


@pytest.fixture
def quad():
    return QuadratureConfig()


@pytest.fixture
def small_sim():
    """Fast Monte Carlo settings for structural checks"""
    return SimConfig(paths=2000, steps_per_interval=2, seed=7, chunk_paths=500)


@pytest.fixture
def write_config(tmp_path):
    """Write a run configuration dict to a JSON file and return its path"""
    def _write(data, name='run.json'):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding='utf-8')
        return str(path)
    return _write
