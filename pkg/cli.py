#!/usr/bin/env python3
"""
VolStrike command-line front end

Commands:
    price     discrete and continuous fair strikes (optionally the MC strike)
    sweep     strikes over one or two parameter axes (tables and figures)
    mc        Monte Carlo strikes (RV, RV*, continuous) with standard errors
    powervar  power-variation convergence over orders and substep multipliers

Usage:
    python cli.py price --config configs/baseline.json
    python cli.py sweep --config configs/table1.json --out table1.csv
"""

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config import settings
from exceptions import AdmissibilityError, ConfigError, VolStrikeError
from models import JumpSpec, JumpVariant, ModelParams, QuadratureConfig, SimConfig, SwapContract
from montecarlo import (
    martingale_check, mc_strike_continuous, mc_strike_rv, mc_strike_rvstar, dump_batch_csv,
    power_variation, simulate
)
from pricing import continuous_strike, discrete_strike

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

CSV_FLOAT_FORMAT = "%.10g"


class _Section(BaseModel):
    model_config = ConfigDict(extra='forbid', populate_by_name=True)


class ModelSection(_Section):
    """Model parameters; the intensity defaults are artifact choices"""
    r: float = 0.05
    d: float = 0.005
    v0: float = Field(0.04, gt=0, alias='V0')
    lambda0: float = Field(0.02, ge=0)
    kappa_v: float = Field(10.0, gt=0, alias='kappaV')
    theta_v: float = Field(0.05, gt=0, alias='thetaV')
    sigma_v: float = Field(0.6, gt=0, alias='sigmaV')
    kappa_l: float = Field(3.0, gt=0, alias='kappaL')
    theta_l: float = Field(0.02, ge=0, alias='thetaL')
    sigma_l: float = Field(0.1, ge=0, alias='sigmaL')
    rho: float = Field(-0.64, ge=-1.0, le=1.0)
    s0: float = Field(100.0, gt=0, alias='S0')

    def to_params(self) -> ModelParams:
        return ModelParams(**self.model_dump())


class JumpSection(_Section):
    """Jump law; unused fields of the other variant are ignored"""
    variant: str = 'double_exponential'
    p: float = Field(0.4, ge=0, le=1)
    eta1: float = Field(10.0, gt=0)
    eta2: float = Field(5.0, gt=0)
    p_prime: float = Field(1.0, ge=0, le=1, alias='pPrime')
    eta3: float = Field(25.0, gt=0)
    eta4: float = Field(25.0, gt=0)
    nu: float = 0.0
    delta: float = Field(0.0, ge=0)
    rho_j: float = Field(0.0, alias='rhoJ')
    eta: float = Field(0.05, gt=0)
    product_transform: Optional[bool] = Field(None, alias='productTransform')

    @field_validator('variant')
    @classmethod
    def validate_variant(cls, v):
        valid = [variant.value for variant in JumpVariant]
        if v not in valid:
            raise ValueError(f"variant must be one of {valid}")
        return v

    def to_spec(self) -> JumpSpec:
        chosen = self.product_transform
        if chosen is None:
            chosen = settings.product_transform
        data = self.model_dump()
        data.update(variant=JumpVariant(self.variant), product_transform=chosen)
        return JumpSpec(**data)


class ContractSection(_Section):
    t: float = Field(1.0, gt=0, alias='T')
    n: int = Field(252, ge=1, alias='N')
    notional: float = 1.0
    vol_points_scale: float = Field(100.0, gt=0, alias='volPointsScale')

    def to_contract(self) -> SwapContract:
        return SwapContract(**self.model_dump())


class QuadratureSection(_Section):
    """Quadrature settings; unset values fall back to the environment settings"""
    omega_max: Optional[float] = Field(None, gt=0, alias='omegaMax')
    omega_min: Optional[float] = Field(None, gt=0, alias='omegaMin')
    rtol: Optional[float] = Field(None, gt=0)
    panel_nodes: Optional[int] = Field(None, ge=2, alias='panelNodes')
    initial_panels: int = Field(24, ge=1, alias='initialPanels')
    max_rounds: int = Field(14, ge=1, alias='maxRounds')
    s_substitution: bool = Field(True, alias='sSubstitution')
    laplace_rtol: Optional[float] = Field(None, gt=0, alias='laplaceRtol')
    time_nodes: Optional[int] = Field(None, ge=1, alias='timeNodes')
    cache: bool = True

    def to_quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(
            omega_max=self.omega_max if self.omega_max is not None else settings.omega_max,
            omega_min=self.omega_min or settings.omega_min,
            rtol=self.rtol or settings.freq_rtol,
            panel_nodes=self.panel_nodes or settings.panel_nodes,
            initial_panels=self.initial_panels,
            max_rounds=self.max_rounds,
            s_substitution=self.s_substitution,
            laplace_rtol=self.laplace_rtol or settings.laplace_rtol,
            time_nodes=self.time_nodes or settings.time_nodes,
            cache=self.cache,
        )


class SimSection(_Section):
    """Monte Carlo settings; unset values fall back to the environment settings"""
    paths: Optional[int] = Field(None, ge=1)
    steps_per_interval: Optional[int] = Field(None, ge=1, alias='stepsPerInterval')
    seed: Optional[int] = Field(None, ge=0, lt=2 ** 64)
    antithetic: bool = False
    chunk_paths: Optional[int] = Field(None, ge=1, alias='chunkPaths')
    simple_return_jump: Optional[bool] = Field(None, alias='simpleReturnJump')
    workers: Optional[int] = Field(None, ge=1)
    dump_path: Optional[str] = Field(None, alias='dumpPath')

    def to_sim(self, seed: Optional[int] = None, paths: Optional[int] = None, **changes) -> SimConfig:
        chosen = self.simple_return_jump
        sim = SimConfig(
            paths=paths or self.paths or settings.default_paths,
            steps_per_interval=self.steps_per_interval or settings.steps_per_interval,
            seed=seed if seed is not None else (self.seed if self.seed is not None else settings.default_seed),
            antithetic=self.antithetic,
            chunk_paths=self.chunk_paths or settings.chunk_paths,
            simple_return_jump=settings.simple_return_jump if chosen is None else chosen,
            workers=self.workers or settings.workers,
        )
        return sim.replace(**changes) if changes else sim


SWEEP_AXES = {
    'p': ('jumps', 'p'),
    'pPrime': ('jumps', 'p_prime'),
    'eta1': ('jumps', 'eta1'),
    'eta2': ('jumps', 'eta2'),
    'eta3': ('jumps', 'eta3'),
    'eta4': ('jumps', 'eta4'),
    'kappaL': ('model', 'kappa_l'),
    'thetaL': ('model', 'theta_l'),
    'sigmaL': ('model', 'sigma_l'),
    'N': ('contract', 'n'),
    'T': ('contract', 't'),
}


class SweepSection(_Section):
    """One axis gives a strike column, a second axis gives a matrix"""
    axis: str
    values: List[float] = Field(..., min_length=1)
    axis2: Optional[str] = None
    values2: Optional[List[float]] = None
    continuous: bool = False
    monte_carlo: bool = Field(False, alias='monteCarlo')

    @field_validator('axis', 'axis2')
    @classmethod
    def validate_axis(cls, v):
        if v is not None and v not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {sorted(SWEEP_AXES)}")
        return v

    @model_validator(mode='after')
    def check_second_axis(self):
        if (self.axis2 is None) != (self.values2 is None):
            raise ValueError("axis2 and values2 must be given together")
        if self.axis2 is not None and (self.continuous or self.monte_carlo):
            raise ValueError("Matrix sweeps report the discrete strike only")
        return self


class PowerVarSection(_Section):
    orders: List[float] = Field(default_factory=lambda: [0.5, 1.0, 1.5], min_length=1)
    multipliers: List[int] = Field(default_factory=lambda: [1, 4, 16], min_length=1)

    @field_validator('orders')
    @classmethod
    def validate_orders(cls, v):
        if any(not 0 < u < 2 for u in v):
            raise ValueError("power variation orders must lie in (0, 2)")
        return v


class RunConfig(_Section):
    """A complete run: model, jumps, contract, numerics and at most one command section"""
    model: ModelSection = Field(default_factory=ModelSection)
    jumps: JumpSection = Field(default_factory=JumpSection)
    contract: ContractSection = Field(default_factory=ContractSection)
    quadrature: QuadratureSection = Field(default_factory=QuadratureSection)
    sim: SimSection = Field(default_factory=SimSection)
    sweep: Optional[SweepSection] = None
    powervar: Optional[PowerVarSection] = None
    output: Optional[str] = None

    @model_validator(mode='after')
    def check_single_command(self):
        if self.sweep is not None and self.powervar is not None:
            raise ValueError("A run config holds either a sweep or a powervar section, not both")
        return self


def load_config(path: str) -> RunConfig:
    """Parse a JSON run configuration"""
    try:
        with open(path, encoding='utf-8') as handle:
            data = json.load(handle)
    except OSError as e:
        raise ConfigError(f"Cannot read config {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ConfigError(f"Config {path} is not valid JSON: {e}") from e
    return RunConfig.model_validate(data)


def _with_axis(config: RunConfig, axis: str, value: float) -> RunConfig:
    section_name, field_name = SWEEP_AXES[axis]
    if field_name == 'n':
        value = int(value)
    section = getattr(config, section_name).model_copy(update={field_name: value})
    return config.model_copy(update={section_name: section})


def _write_csv(frame: pd.DataFrame, out: Optional[str]) -> None:
    if out:
        frame.to_csv(out, index=False, float_format=CSV_FLOAT_FORMAT)
        logger.info("Wrote %d rows to %s", len(frame), out)
    else:
        sys.stdout.write(frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT))


def _say(args, line: str) -> None:
    if not args.quiet:
        print(line)


def _strikes(config: RunConfig, args, continuous: bool, monte_carlo: bool) -> Dict[str, Optional[float]]:
    params = config.model.to_params()
    spec = config.jumps.to_spec()
    contract = config.contract.to_contract()
    quad = config.quadrature.to_quadrature()

    row = {'discrete_strike': discrete_strike(params, spec, contract, quad).strike}
    if continuous:
        try:
            row['continuous_strike'] = continuous_strike(params, spec, contract, quad).strike
        except AdmissibilityError as e:
            logger.warning("Continuous strike unavailable: %s", e)
            row['continuous_strike'] = None
    if monte_carlo:
        batch = simulate(params, spec, contract, config.sim.to_sim(args.seed, args.paths))
        estimate = mc_strike_rv(batch, contract)
        row['mc_strike'] = estimate.estimate
        row['mc_standard_error'] = estimate.standard_error
    return row


def cmd_price(config: RunConfig, args) -> int:
    """Discrete, continuous and (with --mc) Monte Carlo strikes"""
    contract = config.contract
    row = _strikes(config, args, continuous=True, monte_carlo=args.mc)

    _say(args, "=" * 60)
    _say(args, f"Volatility swap strike (T={contract.t:g}, N={contract.n})")
    _say(args, "=" * 60)
    _say(args, f"✅ Discrete strike:    {row['discrete_strike']:10.4f}")
    if row['continuous_strike'] is None:
        _say(args, "⚠️  Continuous strike: unavailable (jump transform diverges)")
    else:
        _say(args, f"✅ Continuous strike:  {row['continuous_strike']:10.4f}")
    if args.mc:
        _say(args, f"✅ Monte Carlo strike: {row['mc_strike']:10.4f} ± {row['mc_standard_error']:.4f}")

    _write_csv(pd.DataFrame([row]), args.out or config.output)
    return EXIT_OK


def cmd_sweep(config: RunConfig, args) -> int:
    """Strikes over the sweep grid"""
    sweep = config.sweep
    if sweep is None:
        raise ConfigError("sweep command needs a 'sweep' section")

    if sweep.axis2 is not None:
        rows = []
        for value in sweep.values:
            row = {sweep.axis: value}
            for value2 in sweep.values2:
                point = _with_axis(_with_axis(config, sweep.axis, value), sweep.axis2, value2)
                row[f"{sweep.axis2}={value2:g}"] = _strikes(point, args, False, False)['discrete_strike']
            rows.append(row)
            _say(args, f"✅ {sweep.axis}={value:g}: " + " ".join(
                f"{v:.4f}" for k, v in row.items() if k != sweep.axis
            ))
        frame = pd.DataFrame(rows)
    else:
        rows = []
        for value in sweep.values:
            row = {sweep.axis: value}
            row.update(_strikes(_with_axis(config, sweep.axis, value), args, sweep.continuous, sweep.monte_carlo))
            rows.append(row)
            _say(args, f"✅ {sweep.axis}={value:g}: discrete strike {row['discrete_strike']:.4f}")
        frame = pd.DataFrame(rows)

    _write_csv(frame, args.out or config.output)
    return EXIT_OK


def cmd_mc(config: RunConfig, args) -> int:
    """Monte Carlo strikes with standard errors"""
    params = config.model.to_params()
    spec = config.jumps.to_spec()
    contract = config.contract.to_contract()
    batch = simulate(params, spec, contract, config.sim.to_sim(args.seed, args.paths))

    estimates = {
        'rv': mc_strike_rv(batch, contract),
        'rv_star': mc_strike_rvstar(batch, contract),
        'continuous': mc_strike_continuous(batch, contract),
        'martingale': martingale_check(batch, params, contract),
    }
    row = {'paths': batch.paths, 'seed': batch.seed}
    for name, estimate in estimates.items():
        row[name] = estimate.estimate
        row[f"{name}_standard_error"] = estimate.standard_error
        _say(args, f"✅ {name:<11} {estimate.estimate:12.6f} ± {estimate.standard_error:.6f}")

    if config.sim.dump_path:
        dump_batch_csv(batch, contract, config.sim.dump_path)
        _say(args, f"✅ Path summaries written to {config.sim.dump_path}")

    _write_csv(pd.DataFrame([row]), args.out or config.output)
    return EXIT_OK


def cmd_powervar(config: RunConfig, args) -> int:
    """Power-variation error against mu_u * int V^(u/2) ds as the substep shrinks"""
    section = config.powervar or PowerVarSection()
    params = config.model.to_params()
    spec = config.jumps.to_spec()
    contract = config.contract.to_contract()
    base = config.sim.to_sim(args.seed, args.paths)

    rows = []
    for multiplier in section.multipliers:
        sim = base.replace(steps_per_interval=base.steps_per_interval * multiplier, record_substeps=True)
        batch = simulate(params, spec, contract, sim)
        for order in section.orders:
            result = power_variation(batch, order)
            rows.append({
                'order': order,
                'steps_per_interval': sim.steps_per_interval,
                'substep_dt': batch.substep_dt,
                'mean_estimate': float(result.estimate.mean()),
                'mean_reference': float(result.reference.mean()),
                'mean_relative_error': result.mean_relative_error,
                'mean_abs_deviation': result.mean_abs_deviation,
            })
            _say(args, f"✅ u={order:g} steps={sim.steps_per_interval}: "
                       f"mean relative error {result.mean_relative_error:.6f}")

    _write_csv(pd.DataFrame(rows), args.out or config.output)
    return EXIT_OK


COMMANDS = {
    'price': cmd_price,
    'sweep': cmd_sweep,
    'mc': cmd_mc,
    'powervar': cmd_powervar,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description='Price volatility swaps under jumps with stochastic intensity')
    parser.add_argument('command', choices=sorted(COMMANDS), help='Command to run')
    parser.add_argument('--config', default='configs/baseline.json', help='JSON run configuration')
    parser.add_argument('--out', help='CSV output path (default: stdout)')
    parser.add_argument('--seed', type=int, help='Monte Carlo root seed')
    parser.add_argument('--paths', type=int, help='Monte Carlo path count')
    parser.add_argument('--mc', action='store_true', help='Add the Monte Carlo strike to price')
    parser.add_argument('--quiet', action='store_true', help='Only warnings and the CSV')
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING if args.quiet else settings.log_level,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )

    try:
        if args.seed is not None and not 0 <= args.seed < 2 ** 64:
            raise ConfigError(f"--seed must be an unsigned 64-bit integer, got {args.seed}")
        if args.paths is not None and args.paths < 1:
            raise ConfigError(f"--paths must be >= 1, got {args.paths}")
        config = load_config(args.config)
        return COMMANDS[args.command](config, args)
    except (ConfigError, ValidationError) as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except VolStrikeError as e:
        print(f"{type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == '__main__':
    sys.exit(main())
