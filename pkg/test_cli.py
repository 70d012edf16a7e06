"""
Tests for the command-line front end
"""

import io
import os

import pandas as pd
import pytest

from cli import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, RunConfig, load_config, main
from exceptions import ConfigError

CONFIG_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "configs")

CONSTANT_VARIANCE = {
    "model": {"r": 0.02, "d": 0.02, "V0": 0.04, "lambda0": 0.0, "kappaV": 10.0, "thetaV": 0.04,
              "sigmaV": 1e-8, "rho": 0.0, "kappaL": 3.0, "thetaL": 0.0, "sigmaL": 0.0},
    "jumps": {"variant": "none"},
    "contract": {"T": 1.0, "N": 12},
    "sim": {"paths": 500, "stepsPerInterval": 2, "seed": 5, "chunkPaths": 250},
}


def _with(**sections):
    data = {key: dict(value) for key, value in CONSTANT_VARIANCE.items()}
    for key, value in sections.items():
        data[key] = {**data.get(key, {}), **value}
    return data


def test_config_aliases(write_config):
    config = load_config(write_config(_with(jumps={"variant": "double_exponential", "pPrime": 0.5})))
    spec = config.jumps.to_spec()
    assert spec.p_prime == 0.5
    assert config.model.to_params().kappa_v == 10.0
    assert config.contract.to_contract().n == 12
    assert config.sim.to_sim().chunk_paths == 250


def test_shipped_configs_parse():
    for name in ('baseline', 'heston', 'table1', 'table2', 'figure1', 'figure2_pprime', 'powervar'):
        assert isinstance(load_config(os.path.join(CONFIG_DIR, f"{name}.json")), RunConfig)


def test_unreadable_config(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding='utf-8')
    with pytest.raises(ConfigError):
        load_config(str(broken))


def test_price_constant_variance(write_config, capsys):
    code = main(['price', '--config', write_config(CONSTANT_VARIANCE), '--quiet'])
    assert code == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == ['discrete_strike', 'continuous_strike']
    assert frame['continuous_strike'][0] == pytest.approx(20.0, abs=1e-6)
    assert 19.0 < frame['discrete_strike'][0] < 21.0


def test_price_reports_progress(write_config, capsys):
    assert main(['price', '--config', write_config(CONSTANT_VARIANCE)]) == EXIT_OK
    assert "Discrete strike" in capsys.readouterr().out


def test_invalid_parameter_is_a_config_error(write_config, capsys):
    code = main(['price', '--config', write_config(_with(model={"kappaV": -1.0}))])
    assert code == EXIT_CONFIG
    assert "kappaV" in capsys.readouterr().err


def test_unknown_key_is_a_config_error(write_config, capsys):
    code = main(['price', '--config', write_config(_with(model={"kappa": 1.0}))])
    assert code == EXIT_CONFIG
    assert "ValidationError" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(['price', '--config', str(tmp_path / "absent.json")]) == EXIT_CONFIG
    assert "ConfigError" in capsys.readouterr().err


def test_bad_seed(write_config):
    assert main(['mc', '--config', write_config(CONSTANT_VARIANCE), '--seed', '-3']) == EXIT_CONFIG


def test_low_truncation_is_a_numerical_error(write_config, capsys):
    data = _with(contract={"N": 252}, quadrature={"omegaMax": 5.0})
    assert main(['price', '--config', write_config(data), '--quiet']) == EXIT_NUMERICAL
    assert "QuadratureError" in capsys.readouterr().err


def test_sweep_needs_a_sweep_section(write_config):
    assert main(['sweep', '--config', write_config(CONSTANT_VARIANCE), '--quiet']) == EXIT_CONFIG


def test_sweep_is_reproducible(write_config, tmp_path):
    path = write_config(_with(sweep={"axis": "N", "values": [4, 12], "continuous": True}))
    outputs = []
    for name in ('first.csv', 'second.csv'):
        out = tmp_path / name
        assert main(['sweep', '--config', path, '--out', str(out), '--quiet']) == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    frame = pd.read_csv(io.BytesIO(outputs[0]))
    assert list(frame.columns) == ['N', 'discrete_strike', 'continuous_strike']
    # constant variance: the sampled strike sits just below sqrt(V)
    assert (frame["discrete_strike"] < frame["continuous_strike"]).all()


def test_matrix_sweep(write_config, capsys):
    data = _with(sweep={"axis": "N", "values": [4, 8], "axis2": "T", "values2": [0.5, 1.0]})
    assert main(['sweep', '--config', write_config(data), '--quiet']) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame.columns) == ['N', 'T=0.5', 'T=1']
    assert frame.shape == (2, 3)


def test_matrix_sweep_rejects_continuous(write_config):
    data = _with(sweep={"axis": "N", "values": [4], "axis2": "T", "values2": [1.0], "continuous": True})
    assert main(['sweep', '--config', write_config(data)]) == EXIT_CONFIG


def test_mc_is_reproducible(write_config, tmp_path):
    dump = tmp_path / "paths.csv"
    path = write_config(_with(sim={"dumpPath": str(dump)}))
    outputs = []
    for name in ('first.csv', 'second.csv'):
        out = tmp_path / name
        assert main(['mc', '--config', path, '--out', str(out), '--quiet']) == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    frame = pd.read_csv(io.BytesIO(outputs[0]))
    assert frame['paths'][0] == 500
    assert frame['continuous'][0] == pytest.approx(20.0, abs=1e-4)
    assert {'rv', 'rv_standard_error', 'rv_star', 'martingale'} <= set(frame.columns)
    assert len(pd.read_csv(dump)) == 500


def test_mc_seed_override(write_config, tmp_path):
    path = write_config(CONSTANT_VARIANCE)
    first, second = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(['mc', '--config', path, '--seed', '1', '--out', str(first), '--quiet']) == EXIT_OK
    assert main(['mc', '--config', path, '--seed', '2', '--out', str(second), '--quiet']) == EXIT_OK
    assert first.read_bytes() != second.read_bytes()


def test_powervar(write_config, capsys):
    data = _with(powervar={"orders": [1.0], "multipliers": [1, 2]})
    assert main(['powervar', '--config', write_config(data), '--quiet']) == EXIT_OK
    frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
    assert list(frame['steps_per_interval']) == [2, 4]
    assert (frame['mean_relative_error'] < 0.5).all()


@pytest.mark.slow
@pytest.mark.parametrize('name', ['table1', 'table2'])
def test_shipped_table_sweeps(name, tmp_path):
    out = tmp_path / f"{name}.csv"
    path = os.path.join(CONFIG_DIR, f"{name}.json")
    assert main(['sweep', '--config', path, '--out', str(out), '--quiet']) == EXIT_OK
    frame = pd.read_csv(out)
    strikes = frame.drop(columns=frame.columns[0]).to_numpy()
    assert strikes.shape == (7, 7)
    assert (strikes.max() - strikes.min()) / strikes.min() < 0.01


@pytest.mark.slow
def test_shipped_variance_jump_probability_sweep(tmp_path):
    out = tmp_path / "figure2_pprime.csv"
    path = os.path.join(CONFIG_DIR, "figure2_pprime.json")
    assert main(['sweep', '--config', path, '--out', str(out), '--quiet']) == EXIT_OK
    frame = pd.read_csv(out)
    assert list(frame['pPrime']) == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    # the product-form variance jump ln B grows with pPrime
    assert frame['discrete_strike'].is_monotonic_increasing
