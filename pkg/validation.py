"""
Validation logic for model parameters, jump laws, contracts and run settings
"""

import logging
import math
from typing import Dict, Optional, Tuple

from exceptions import ConfigError
from models import (
    JumpSpec, JumpVariant, ModelParams, QuadratureConfig, SimConfig, SwapContract
)

logger = logging.getLogger(__name__)

ValidationResult = Tuple[bool, str, Optional[Dict]]


class ModelValidator:
    """Checks the invariants of every input type before any pricing or simulation"""

    def validate_params(self, params: ModelParams) -> ValidationResult:
        """
        Validate model parameters

        Args:
            params: Model parameters to validate

        Returns:
            Tuple of (is_valid, message, validation_data); validation_data
            carries the Feller margins, which only produce warnings
        """
        for name in ('r', 'd', 'v0', 'lambda0', 'kappa_v', 'theta_v', 'sigma_v',
                     'kappa_l', 'theta_l', 'sigma_l', 'rho', 's0'):
            value = getattr(params, name)
            if not math.isfinite(value):
                return (False, f"{name} must be finite, got {value}", None)

        strictly_positive = ('v0', 'kappa_v', 'kappa_l', 'theta_v', 'sigma_v', 's0')
        for name in strictly_positive:
            if getattr(params, name) <= 0:
                return (False, f"{name} must be > 0, got {getattr(params, name)}", None)

        for name in ('lambda0', 'theta_l', 'sigma_l'):
            if getattr(params, name) < 0:
                return (False, f"{name} must be >= 0, got {getattr(params, name)}", None)

        if not -1.0 <= params.rho <= 1.0:
            return (False, f"rho must lie in [-1, 1], got {params.rho}", None)

        return (True, "Parameters validated", self._feller_margins(params))

    def _feller_margins(self, params: ModelParams) -> Dict:
        """Feller conditions in the squared form 2*kappa*theta >= sigma^2 (warnings only)"""
        variance_margin = 2 * params.kappa_v * params.theta_v - params.sigma_v ** 2
        intensity_margin = 2 * params.kappa_l * params.theta_l - params.sigma_l ** 2
        if variance_margin < 0:
            logger.warning(
                "Variance violates the Feller condition (2*kappaV*thetaV=%.4f < sigmaV^2=%.4f)",
                2 * params.kappa_v * params.theta_v, params.sigma_v ** 2,
            )
        if intensity_margin < 0:
            logger.warning(
                "Intensity violates the Feller condition (2*kappaL*thetaL=%.4f < sigmaL^2=%.4f)",
                2 * params.kappa_l * params.theta_l, params.sigma_l ** 2,
            )
        return {
            'feller_variance_margin': variance_margin,
            'feller_intensity_margin': intensity_margin,
        }

    def validate_jump_spec(self, spec: JumpSpec) -> ValidationResult:
        """Validate a jump law against the constraints of its variant"""
        if spec.variant == JumpVariant.NONE:
            return (True, "Jump-free model", {})
        elif spec.variant == JumpVariant.DOUBLE_EXPONENTIAL:
            return self._validate_double_exponential(spec)
        elif spec.variant == JumpVariant.GAUSSIAN_EXPONENTIAL:
            return self._validate_gaussian_exponential(spec)
        return (False, f"Unknown jump variant {spec.variant}", None)

    def _validate_double_exponential(self, spec: JumpSpec) -> ValidationResult:
        """Rates must exceed 1 on the upward sides so that E[exp(J)] is finite"""
        if not 0.0 <= spec.p <= 1.0:
            return (False, f"p must lie in [0, 1], got {spec.p}", None)
        if not 0.0 <= spec.p_prime <= 1.0:
            return (False, f"p_prime must lie in [0, 1], got {spec.p_prime}", None)
        if spec.p > 0 and spec.eta1 <= 1:
            return (False, f"eta1 must be > 1, got {spec.eta1}", None)
        if spec.q > 0 and spec.eta2 <= 0:
            return (False, f"eta2 must be > 0, got {spec.eta2}", None)
        if spec.p_prime > 0 and spec.eta3 <= 1:
            return (False, f"eta3 must be > 1, got {spec.eta3}", None)
        if spec.q_prime > 0 and spec.eta4 <= 0:
            return (False, f"eta4 must be > 0, got {spec.eta4}", None)
        data = {'negative_variance_jumps': spec.q_prime > 0}
        if spec.q_prime > 0 and not spec.product_transform:
            logger.warning(
                "Variance jumps can be negative (p_prime=%.3f); transforms diverge once Re(C) < -eta4",
                spec.p_prime,
            )
        return (True, "Double exponential jumps validated", data)

    def _validate_gaussian_exponential(self, spec: JumpSpec) -> ValidationResult:
        """delta >= 0, eta > 0 and the transform must be finite at omega = 1"""
        if spec.delta < 0:
            return (False, f"delta must be >= 0, got {spec.delta}", None)
        if spec.eta <= 0:
            return (False, f"eta must be > 0, got {spec.eta}", None)
        if spec.rho_j * spec.eta >= 1:
            return (False, f"rho_j * eta must be < 1, got {spec.rho_j * spec.eta}", None)
        return (True, "Gaussian exponential jumps validated", {})

    def validate_contract(self, contract: SwapContract) -> ValidationResult:
        """Validate swap terms"""
        if not contract.t > 0:
            return (False, f"Tenor T must be > 0, got {contract.t}", None)
        if int(contract.n) != contract.n or contract.n < 1:
            return (False, f"Sampling count N must be a positive integer, got {contract.n}", None)
        if contract.vol_points_scale <= 0:
            return (False, f"vol_points_scale must be > 0, got {contract.vol_points_scale}", None)
        return (True, "Contract validated", {'dt': contract.dt})

    def validate_quadrature(self, quad: QuadratureConfig) -> ValidationResult:
        """Validate quadrature settings"""
        if quad.omega_max is not None and quad.omega_max <= 0:
            return (False, f"omega_max must be > 0, got {quad.omega_max}", None)
        if quad.omega_min <= 0 or (quad.omega_max is not None and quad.omega_min >= quad.omega_max):
            return (False, "omega_min must lie in (0, omega_max)", None)
        if quad.rtol <= 0 or quad.laplace_rtol <= 0:
            return (False, "Quadrature tolerances must be positive", None)
        if quad.panel_nodes < 2 or quad.initial_panels < 1 or quad.max_rounds < 1:
            return (False, "Panel counts must be positive", None)
        if quad.time_nodes < 1:
            return (False, f"time_nodes must be >= 1, got {quad.time_nodes}", None)
        return (True, "Quadrature settings validated", {})

    def validate_sim(self, sim: SimConfig) -> ValidationResult:
        """Validate Monte Carlo settings"""
        if sim.paths < 1:
            return (False, f"paths must be >= 1, got {sim.paths}", None)
        if sim.steps_per_interval < 1:
            return (False, f"steps_per_interval must be >= 1, got {sim.steps_per_interval}", None)
        if sim.chunk_paths < 1:
            return (False, f"chunk_paths must be >= 1, got {sim.chunk_paths}", None)
        if sim.antithetic and (sim.chunk_paths % 2 or sim.paths % 2):
            return (False, "Antithetic sampling needs even paths and chunk_paths", None)
        if not 0 <= sim.seed < 2 ** 64:
            return (False, f"seed must be an unsigned 64-bit integer, got {sim.seed}", None)
        if sim.workers < 1:
            return (False, f"workers must be >= 1, got {sim.workers}", None)
        return (True, "Simulation settings validated", {})


_validator = ModelValidator()


def require_valid(result: ValidationResult) -> Dict:
    """Raise ConfigError for a failed validation tuple, otherwise return its data"""
    is_valid, message, data = result
    if not is_valid:
        raise ConfigError(message)
    return data or {}


def check_inputs(
    params: Optional[ModelParams] = None,
    spec: Optional[JumpSpec] = None,
    contract: Optional[SwapContract] = None,
    quad: Optional[QuadratureConfig] = None,
    sim: Optional[SimConfig] = None,
) -> None:
    """Validate whichever inputs are given, raising ConfigError on the first failure"""
    if params is not None:
        require_valid(_validator.validate_params(params))
    if spec is not None:
        require_valid(_validator.validate_jump_spec(spec))
    if contract is not None:
        require_valid(_validator.validate_contract(contract))
    if quad is not None:
        require_valid(_validator.validate_quadrature(quad))
    if sim is not None:
        require_valid(_validator.validate_sim(sim))
