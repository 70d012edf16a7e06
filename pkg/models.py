"""
Core data models for VolStrike - volatility swaps under stochastic volatility
with simultaneous price/variance jumps and a CIR jump intensity
"""

from enum import Enum
from typing import Optional, Tuple
from dataclasses import dataclass, field, asdict

import numpy as np


class JumpVariant(Enum):
    """Distributional laws available for the jump pair (J^S, J^V)"""
    NONE = "none"
    DOUBLE_EXPONENTIAL = "double_exponential"
    GAUSSIAN_EXPONENTIAL = "gaussian_exponential"


class Scheme(Enum):
    """Discretisation schemes for the Monte Carlo simulator"""
    FULL_TRUNCATION_EULER = "full_truncation_euler"


@dataclass(frozen=True)
class ModelParams:
    """Diffusion and intensity coefficients plus initial states (annualised decimals)"""
    r: float = 0.05  # risk-free rate
    d: float = 0.005  # dividend yield
    v0: float = 0.04  # initial instantaneous variance
    lambda0: float = 0.02  # initial jump intensity
    kappa_v: float = 10.0
    theta_v: float = 0.05
    sigma_v: float = 0.6  # vol-of-variance
    kappa_l: float = 3.0
    theta_l: float = 0.02
    sigma_l: float = 0.1  # vol-of-intensity
    rho: float = -0.64  # correlation of W^S and W^V
    s0: float = 100.0  # spot, only used by the simulator

    def replace(self, **changes) -> 'ModelParams':
        """Return a copy with some fields changed"""
        data = asdict(self)
        data.update(changes)
        return ModelParams(**data)

    def to_dict(self) -> dict:
        """Convert parameters to dictionary for serialization"""
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'ModelParams':
        """Create parameters from dictionary"""
        return cls(**data)


@dataclass(frozen=True)
class JumpSpec:
    """
    Law of the jump pair (J^S, J^V)

    Double exponential: independent asymmetric double-exponential laws,
    up-probability p with rate eta1, down rate eta2 for the price and
    p_prime, eta3, eta4 for the variance.
    Gaussian exponential: J^V ~ exponential with mean eta and
    J^S | J^V ~ N(nu + rho_j * J^V, delta^2).
    """
    variant: JumpVariant = JumpVariant.NONE
    p: float = 0.5
    eta1: float = 10.0
    eta2: float = 5.0
    p_prime: float = 1.0
    eta3: float = 25.0
    eta4: float = 25.0
    nu: float = 0.0
    delta: float = 0.0
    rho_j: float = 0.0
    eta: float = 0.0
    product_transform: bool = False

    @property
    def q(self) -> float:
        return 1.0 - self.p

    @property
    def q_prime(self) -> float:
        return 1.0 - self.p_prime

    @property
    def has_jumps(self) -> bool:
        return self.variant is not JumpVariant.NONE

    @classmethod
    def none(cls) -> 'JumpSpec':
        """Jump-free model"""
        return cls(variant=JumpVariant.NONE)

    @classmethod
    def double_exponential(
        cls,
        p: float,
        eta1: float,
        eta2: float,
        p_prime: float,
        eta3: float,
        eta4: float,
        product_transform: bool = False
    ) -> 'JumpSpec':
        """Independent double-exponential price and variance jumps"""
        return cls(
            variant=JumpVariant.DOUBLE_EXPONENTIAL,
            p=p, eta1=eta1, eta2=eta2,
            p_prime=p_prime, eta3=eta3, eta4=eta4,
            product_transform=product_transform,
        )

    @classmethod
    def gaussian_exponential(cls, nu: float, delta: float, rho_j: float, eta: float) -> 'JumpSpec':
        """Exponential variance jump with conditionally Gaussian price jump"""
        return cls(
            variant=JumpVariant.GAUSSIAN_EXPONENTIAL,
            nu=nu, delta=delta, rho_j=rho_j, eta=eta,
        )

    def replace(self, **changes) -> 'JumpSpec':
        """Return a copy with some fields changed"""
        data = asdict(self)
        data.update(changes)
        return JumpSpec(**data)

    def to_dict(self) -> dict:
        """Convert jump spec to dictionary for serialization"""
        data = asdict(self)
        data['variant'] = self.variant.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'JumpSpec':
        """Create jump spec from dictionary"""
        data = dict(data)
        data['variant'] = JumpVariant(data.get('variant', JumpVariant.NONE.value))
        return cls(**data)


@dataclass(frozen=True)
class SwapContract:
    """Volatility swap terms: tenor, sampling count, notional and reporting scale"""
    t: float = 1.0  # tenor in years
    n: int = 252  # number of sampling intervals
    notional: float = 1.0  # currency per volatility point
    vol_points_scale: float = 100.0

    @property
    def dt(self) -> float:
        return self.t / self.n

    @property
    def sampling_times(self) -> np.ndarray:
        return np.arange(self.n + 1) * self.dt

    def replace(self, **changes) -> 'SwapContract':
        """Return a copy with some fields changed"""
        data = asdict(self)
        data.update(changes)
        return SwapContract(**data)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'SwapContract':
        """Create contract terms from dictionary"""
        return cls(**data)


@dataclass(frozen=True)
class FrequencyArgument:
    """The quadruple q = (omega, phi, psi, chi) of the joint MGF"""
    omega: complex = 0j  # log-price exponent
    phi: complex = 0j  # variance exponent
    psi: complex = 0j  # intensity exponent
    chi: complex = 0j  # constant offset

    def is_finite(self) -> bool:
        return all(map(np.isfinite, (self.omega, self.phi, self.psi, self.chi)))


@dataclass(frozen=True)
class SolverDiagnostics:
    """Bookkeeping from one affine solve"""
    method: str = "closed_form"
    steps: int = 0
    nfev: int = 0
    max_error_norm: float = 0.0  # largest scaled local error of an accepted step (<= 1), nan if not exposed


@dataclass(frozen=True)
class AffineCoefficients:
    """The triple (C, D, E) at time-to-maturity tau"""
    tau: float
    c: complex
    d: complex
    e: complex
    diagnostics: SolverDiagnostics = field(default_factory=SolverDiagnostics)


@dataclass(frozen=True)
class QuadratureConfig:
    """Integration settings for the discrete and continuous pricers"""
    omega_max: Optional[float] = None  # None: 40 / sqrt(min(V0, thetaV) * dt)
    omega_min: float = 1e-8
    rtol: float = 1e-8
    panel_nodes: int = 16
    initial_panels: int = 24
    max_rounds: int = 14
    s_substitution: bool = True  # integrate over u with s = u^2
    laplace_rtol: float = 1e-11
    time_nodes: int = 64
    cache: bool = True

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> 'QuadratureConfig':
        """Create quadrature settings from dictionary"""
        return cls(**data)


@dataclass(frozen=True)
class StrikeResult:
    """Fair strike in volatility points plus quadrature diagnostics"""
    strike: float
    tail_estimate: float = 0.0
    error_estimate: float = 0.0
    node_count: int = 0
    contributions: Tuple[float, ...] = ()  # per-interval or per-time-node terms
    method: str = ""

    def to_dict(self) -> dict:
        return {
            'strike': self.strike,
            'tail_estimate': self.tail_estimate,
            'error_estimate': self.error_estimate,
            'node_count': self.node_count,
            'method': self.method,
        }


@dataclass(frozen=True)
class SimConfig:
    """Monte Carlo settings"""
    paths: int = 20000
    steps_per_interval: int = 10
    seed: int = 20190101
    scheme: Scheme = Scheme.FULL_TRUNCATION_EULER
    antithetic: bool = False
    chunk_paths: int = 8192
    record_substeps: bool = False
    simple_return_jump: bool = False
    workers: int = 1

    def replace(self, **changes) -> 'SimConfig':
        data = asdict(self)
        data.update(changes)
        return SimConfig(**data)

    def to_dict(self) -> dict:
        """Convert settings to dictionary for serialization"""
        data = asdict(self)
        data['scheme'] = self.scheme.value
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'SimConfig':
        """Create settings from dictionary"""
        data = dict(data)
        data['scheme'] = Scheme(data.get('scheme', Scheme.FULL_TRUNCATION_EULER.value))
        return cls(**data)


@dataclass
class PathBatch:
    """
    Simulated trajectories

    x holds log-prices at the contract's sampling dates. The *_sub arrays are
    only filled when SimConfig.record_substeps is set.
    """
    x: np.ndarray  # (paths, N+1)
    v_terminal: np.ndarray  # (paths,)
    lam_terminal: np.ndarray  # (paths,)
    int_sqrt_v: np.ndarray  # (paths,) integral of sqrt(V+) dt
    jump_count: np.ndarray  # (paths,)
    substep_dt: float
    seed: int
    stream_ids: Tuple[int, ...]
    antithetic: bool = False
    x_sub: Optional[np.ndarray] = None  # (paths, M+1)
    v_sub: Optional[np.ndarray] = None
    lam_sub: Optional[np.ndarray] = None
    jump_count_sub: Optional[np.ndarray] = None  # (paths, M)
    jump_size_sub: Optional[np.ndarray] = None  # (paths, M) summed J^S per substep

    @property
    def paths(self) -> int:
        return self.x.shape[0]

    @property
    def jump_times(self) -> Optional[np.ndarray]:
        """Substep end times at which at least one jump occurred, per path (ragged via nonzero)"""
        if self.jump_count_sub is None:
            return None
        rows, cols = np.nonzero(self.jump_count_sub)
        return np.column_stack([rows, (cols + 1) * self.substep_dt])


@dataclass(frozen=True)
class McStrike:
    """Monte Carlo estimate with its standard error"""
    estimate: float
    standard_error: float
    paths: int

    def within(self, value: float, n_se: float = 3.0) -> bool:
        """True when value lies inside estimate +/- n_se standard errors"""
        return abs(value - self.estimate) <= n_se * self.standard_error

    def to_dict(self) -> dict:
        return asdict(self)


def vol_points(value: float, contract: SwapContract) -> float:
    """Scale a natural-unit volatility into the contract's reporting convention"""
    return value * contract.vol_points_scale

