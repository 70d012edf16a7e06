"""
Monte Carlo simulation of the jump-diffusion with a Cox jump process

Full-truncation Euler for V and lambda, exact Poisson jump counts per substep
with mean lambda+ * dt', and the estimators that serve as the oracle for the
analytic pricers: RV, RV*, the continuous strike, the joint MGF and the
realized power variation.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np
import pandas as pd

from exceptions import ConfigError, DomainError
from jumps import mean_price_jump, sample_jumps
from models import (
    FrequencyArgument, JumpSpec, McStrike, ModelParams, PathBatch, SimConfig, SwapContract, vol_points
)
from validation import check_inputs

logger = logging.getLogger(__name__)


def mu_abs_moment(u: float) -> float:
    """E|Z|^u for a standard normal Z: 2^(u/2) Gamma((u+1)/2) / Gamma(1/2)"""
    return 2.0 ** (u / 2.0) * math.gamma((u + 1.0) / 2.0) / math.sqrt(math.pi)


def _chunk_generator(seed: int, chunk: int) -> np.random.Generator:
    """Counter-based stream for one chunk of paths"""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(chunk,))))


class PathSimulator:
    """
    Simulates chunks of paths for one model, jump law and contract

    Chunks are independent: each draws from its own Philox stream keyed by
    (seed, chunk index), so the batch does not depend on how many workers
    run them or in which order.
    """

    def __init__(self, params: ModelParams, spec: JumpSpec, contract: SwapContract, sim: SimConfig):
        self.params = params
        self.spec = spec
        self.contract = contract
        self.sim = sim
        self.h = contract.dt / sim.steps_per_interval
        self.substeps = contract.n * sim.steps_per_interval
        self.m = mean_price_jump(spec)

    def chunk_sizes(self) -> Tuple[int, ...]:
        full, rest = divmod(self.sim.paths, self.sim.chunk_paths)
        return (self.sim.chunk_paths,) * full + ((rest,) if rest else ())

    def run_chunk(self, chunk: int, size: int) -> Dict[str, np.ndarray]:
        """Simulate one chunk of `size` paths"""
        p = self.params
        sim = self.sim
        rng = _chunk_generator(sim.seed, chunk)
        h = self.h
        sqrt_h = math.sqrt(h)
        rho_bar = math.sqrt(max(1.0 - p.rho ** 2, 0.0))
        spi = sim.steps_per_interval
        record = sim.record_substeps
        base = size // 2 if sim.antithetic else size

        x = np.full(size, math.log(p.s0))
        v = np.full(size, p.v0)
        lam = np.full(size, p.lambda0)
        int_sqrt_v = np.zeros(size)
        jump_count = np.zeros(size, dtype=np.int64)
        x_dates = np.empty((size, self.contract.n + 1))
        x_dates[:, 0] = x
        if record:
            x_sub = np.empty((size, self.substeps + 1))
            v_sub = np.empty((size, self.substeps + 1))
            lam_sub = np.empty((size, self.substeps + 1))
            count_sub = np.zeros((size, self.substeps), dtype=np.int64)
            size_sub = np.zeros((size, self.substeps))
            x_sub[:, 0], v_sub[:, 0], lam_sub[:, 0] = x, v, lam

        owners = np.arange(size)
        for step in range(self.substeps):
            z = rng.standard_normal((3, base))
            if sim.antithetic:
                z = np.concatenate([z, -z], axis=1)
            v_pos = np.maximum(v, 0.0)
            lam_pos = np.maximum(lam, 0.0)
            sqrt_v = np.sqrt(v_pos)

            counts = rng.poisson(lam_pos * h)
            js, jv = sample_jumps(self.spec, rng, int(counts.sum()))
            if sim.simple_return_jump:
                js = np.expm1(js)
            owner = np.repeat(owners, counts)
            js_sum = np.bincount(owner, weights=js, minlength=size)
            jv_sum = np.bincount(owner, weights=jv, minlength=size)

            x = x + (p.r - p.d - lam_pos * self.m - 0.5 * v_pos) * h + sqrt_v * sqrt_h * z[0] + js_sum
            v = (v + p.kappa_v * (p.theta_v - v_pos) * h
                 + p.sigma_v * sqrt_v * sqrt_h * (p.rho * z[0] + rho_bar * z[1]) + jv_sum)
            lam = lam + p.kappa_l * (p.theta_l - lam_pos) * h + p.sigma_l * np.sqrt(lam_pos) * sqrt_h * z[2]
            int_sqrt_v += sqrt_v * h
            jump_count += counts

            if (step + 1) % spi == 0:
                x_dates[:, (step + 1) // spi] = x
            if record:
                x_sub[:, step + 1] = x
                v_sub[:, step + 1] = np.maximum(v, 0.0)
                lam_sub[:, step + 1] = np.maximum(lam, 0.0)
                count_sub[:, step] = counts
                size_sub[:, step] = js_sum

        out = {
            'x': x_dates,
            'v_terminal': np.maximum(v, 0.0),
            'lam_terminal': np.maximum(lam, 0.0),
            'int_sqrt_v': int_sqrt_v,
            'jump_count': jump_count,
        }
        if record:
            out.update(x_sub=x_sub, v_sub=v_sub, lam_sub=lam_sub,
                       jump_count_sub=count_sub, jump_size_sub=size_sub)
        return out


def simulate(params: ModelParams, spec: JumpSpec, contract: SwapContract, sim: SimConfig) -> PathBatch:
    """
    Simulate paths of (X, V, lambda) with jumps

    Args:
        params: Model parameters
        spec: Jump law
        contract: Swap terms; sampling dates are the contract's t_i
        sim: Monte Carlo settings

    Returns:
        PathBatch with log-prices at the sampling dates and path summaries
    """
    check_inputs(params=params, spec=spec, contract=contract, sim=sim)
    simulator = PathSimulator(params, spec, contract, sim)
    sizes = simulator.chunk_sizes()
    logger.info(
        "Simulating %d paths in %d chunks, %d substeps of %.3e",
        sim.paths, len(sizes), simulator.substeps, simulator.h,
    )

    if sim.workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=sim.workers) as pool:
            chunks = list(pool.map(simulator.run_chunk, range(len(sizes)), sizes))
    else:
        chunks = [simulator.run_chunk(i, size) for i, size in enumerate(sizes)]

    merged = {key: np.concatenate([chunk[key] for chunk in chunks]) for key in chunks[0]}
    return PathBatch(
        substep_dt=simulator.h,
        seed=sim.seed,
        stream_ids=tuple(range(len(sizes))),
        antithetic=sim.antithetic,
        **merged,
    )


def _estimate(samples: np.ndarray) -> McStrike:
    """Mean with compensated summation and its standard error"""
    n = samples.size
    mean = math.fsum(samples) / n
    se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return McStrike(estimate=mean, standard_error=se, paths=n)


def _simple_returns(batch: PathBatch, contract: SwapContract) -> np.ndarray:
    if batch.x.shape[1] != contract.n + 1:
        raise ConfigError(
            f"Batch holds {batch.x.shape[1] - 1} intervals, contract needs {contract.n}"
        )
    return np.expm1(np.diff(batch.x, axis=1))


def realized_volatility(batch: PathBatch, contract: SwapContract) -> np.ndarray:
    """Per-path RV = sqrt(pi / (2 N T)) * sum |S_{t_i}/S_{t_{i-1}} - 1|, in volatility points"""
    returns = _simple_returns(batch, contract)
    factor = math.sqrt(math.pi / (2.0 * contract.n * contract.t))
    return vol_points(factor * np.abs(returns).sum(axis=1), contract)


def realized_volatility_star(batch: PathBatch, contract: SwapContract) -> np.ndarray:
    """Per-path RV* = sqrt((AF / N) * sum returns^2) with AF = N / T, in volatility points"""
    returns = _simple_returns(batch, contract)
    return vol_points(np.sqrt((returns ** 2).sum(axis=1) / contract.t), contract)


def mc_strike_rv(batch: PathBatch, contract: SwapContract) -> McStrike:
    """Monte Carlo fair strike under the RV definition"""
    return _estimate(realized_volatility(batch, contract))


def mc_strike_rvstar(batch: PathBatch, contract: SwapContract) -> McStrike:
    """Monte Carlo expectation of RV*"""
    return _estimate(realized_volatility_star(batch, contract))


def mc_strike_continuous(batch: PathBatch, contract: SwapContract) -> McStrike:
    """Monte Carlo expectation of (1/T) int sqrt(V_t) dt, in volatility points"""
    return _estimate(vol_points(batch.int_sqrt_v / contract.t, contract))


def mc_mgf(batch: PathBatch, q: FrequencyArgument) -> Tuple[complex, float]:
    """
    Sample mean of exp(omega X_T + phi V_T + psi lambda_T + chi)

    Returns:
        Tuple of (estimate, standard_error); the error combines the real and
        imaginary parts
    """
    values = np.exp(q.omega * batch.x[:, -1] + q.phi * batch.v_terminal + q.psi * batch.lam_terminal + q.chi)
    n = values.size
    estimate = complex(math.fsum(values.real) / n, math.fsum(values.imag) / n)
    se = math.sqrt((np.var(values.real, ddof=1) + np.var(values.imag, ddof=1)) / n)
    return estimate, se


def martingale_check(batch: PathBatch, params: ModelParams, contract: SwapContract) -> McStrike:
    """Sample mean of exp(-(r - d) T) S_T, which should match S0"""
    discounted = np.exp(batch.x[:, -1] - (params.r - params.d) * contract.t)
    return _estimate(discounted)


@dataclass(frozen=True)
class PowerVariation:
    """Per-path realized power variation with its integrated-variance reference"""
    order: float
    dt: float
    estimate: np.ndarray  # dt^(1 - u/2) * sum |Y|^u
    reference: np.ndarray  # mu_u * int V^(u/2) ds

    @property
    def mean_relative_error(self) -> float:
        return float(np.mean(np.abs(self.estimate - self.reference) / self.reference))

    @property
    def mean_abs_deviation(self) -> float:
        return float(np.mean(np.abs(self.estimate - self.reference)))


def _substep_stride(batch: PathBatch, dt: float) -> int:
    if batch.x_sub is None or batch.v_sub is None:
        raise ConfigError("Power variation needs a batch simulated with record_substeps")
    stride = int(round(dt / batch.substep_dt))
    if stride < 1 or not math.isclose(stride * batch.substep_dt, dt, rel_tol=1e-9):
        raise DomainError(f"dt={dt} is not a multiple of the substep {batch.substep_dt}")
    return stride


def power_variation(batch: PathBatch, u: float, dt: Optional[float] = None) -> PowerVariation:
    """
    Realized u-th power variation of the log-price

    Args:
        batch: Paths simulated with record_substeps
        u: Order in (0, 2)
        dt: Sampling step, a multiple of the simulation substep (default: the substep)

    Returns:
        PowerVariation with dt^(1 - u/2) * sum |Y_i|^u per path next to
        mu_u * int_0^T V_s^(u/2) ds from the simulated variance
    """
    if not 0.0 < u < 2.0:
        raise DomainError(f"Power variation order must lie in (0, 2), got {u}")
    dt = batch.substep_dt if dt is None else dt
    stride = _substep_stride(batch, dt)

    increments = np.diff(batch.x_sub[:, ::stride], axis=1)
    estimate = dt ** (1.0 - u / 2.0) * (np.abs(increments) ** u).sum(axis=1)
    reference = mu_abs_moment(u) * (batch.v_sub[:, :-1] ** (u / 2.0)).sum(axis=1) * batch.substep_dt
    return PowerVariation(order=u, dt=dt, estimate=estimate, reference=reference)


def implied_spot_variance(batch: PathBatch, u: float, window: int, dt: Optional[float] = None) -> np.ndarray:
    """
    Local variance read off the growth rate of the power variation

    Over each window of `window` sampling steps, V ~ (mu_u^-1 * dPV/dt)^(2/u).

    Returns:
        Array of shape (paths, windows)
    """
    if not 0.0 < u < 2.0:
        raise DomainError(f"Power variation order must lie in (0, 2), got {u}")
    if window < 1:
        raise DomainError(f"window must be >= 1, got {window}")
    dt = batch.substep_dt if dt is None else dt
    stride = _substep_stride(batch, dt)

    increments = np.diff(batch.x_sub[:, ::stride], axis=1)
    windows = increments.shape[1] // window
    if windows == 0:
        raise DomainError("window is longer than the simulated horizon")
    powers = (np.abs(increments[:, :windows * window]) ** u).reshape(batch.paths, windows, window)
    rate = dt ** (1.0 - u / 2.0) * powers.sum(axis=2) / (window * dt)
    return (rate / mu_abs_moment(u)) ** (2.0 / u)


def dump_batch_csv(batch: PathBatch, contract: SwapContract, path: str) -> pd.DataFrame:
    """Write one row per path: path_id, RV, RV*, terminal X, jump count"""
    frame = pd.DataFrame({
        'path_id': np.arange(batch.paths),
        'rv': realized_volatility(batch, contract),
        'rv_star': realized_volatility_star(batch, contract),
        'terminal_x': batch.x[:, -1],
        'jump_count': batch.jump_count,
    })
    frame.to_csv(path, index=False, float_format="%.10g")
    logger.info("Wrote %d path summaries to %s", batch.paths, path)
    return frame
