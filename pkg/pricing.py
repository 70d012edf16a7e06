"""
Fair strikes of volatility swaps

Discrete sampling: K = sqrt(pi / (2 N T)) * sum_i E|S_{t_i}/S_{t_{i-1}} - 1| * 100,
with every expectation recovered from the increment characteristic function by
a one-sided Fourier inversion.

Continuous sampling: K = E[(1/T) int sqrt(V_t) dt] * 100 through the Laplace
identity sqrt(v) = (1 / (2 sqrt(pi))) int (1 - exp(-s v)) s^(-3/2) ds.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad_vec

from exceptions import AdmissibilityError, DomainError, QuadratureError
from mgf import AffineSolver, increment_cf_grid
from models import (
    JumpSpec, JumpVariant, ModelParams, QuadratureConfig, StrikeResult, SwapContract, vol_points
)
from validation import check_inputs

logger = logging.getLogger(__name__)

_ABS_FLOOR = 1e-15
# share of the tolerance the panels left unsplit in a round may use
_KEEP_SHARE = 0.5
# complex entries of one second-stage solve output (sampling dates x lanes)
_LANE_BUDGET = 1 << 22


@dataclass(frozen=True)
class PanelResult:
    """Outcome of an adaptive panel integration with K outputs"""
    values: np.ndarray  # (K,)
    errors: np.ndarray  # (K,)
    tails: np.ndarray  # (K,) magnitude of the outermost panel
    panels: int
    evaluations: int


class PanelQuadrature:
    """
    Adaptive Gauss-Legendre panels for vector-valued integrands

    Every panel is integrated once as a whole and once as two halves; the
    difference is its error estimate. Each round bisects the panels with the
    largest errors until the remaining ones fit in half the tolerance. All
    nodes of a round go to the integrand in a single call, so both estimates
    of a panel come from the same solve.
    """

    def __init__(
        self,
        func: Callable[[np.ndarray], np.ndarray],
        nodes: int = 16,
        rtol: float = 1e-8,
        max_rounds: int = 14,
        atol: float = _ABS_FLOOR
    ):
        """
        Args:
            func: Maps a 1-D array of abscissae to an array of shape (K, len)
            nodes: Gauss-Legendre nodes per panel
            rtol: Relative tolerance per output
            max_rounds: Bisection rounds before giving up
            atol: Absolute tolerance floor per output
        """
        self.func = func
        self.x, self.w = np.polynomial.legendre.leggauss(nodes)
        self.rtol = rtol
        self.atol = atol
        self.max_rounds = max_rounds
        self.evaluations = 0

    def _rule(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        half = 0.5 * (b - a)
        points = (0.5 * (a + b))[:, None] + half[:, None] * self.x[None, :]
        values = np.asarray(self.func(points.ravel()), dtype=float)
        if not np.all(np.isfinite(values)):
            raise QuadratureError("Integrand is not finite on the frequency grid")
        self.evaluations += points.size
        values = values.reshape(values.shape[0], a.size, self.x.size)
        return values.dot(self.w) * half

    def integrate(self, edges: np.ndarray) -> PanelResult:
        """Integrate over the union of the panels delimited by ascending edges"""
        a, b = edges[:-1], edges[1:]
        mid = 0.5 * (a + b)
        count = a.size
        rules = self._rule(np.concatenate([a, a, mid]), np.concatenate([b, mid, b]))
        whole, left, right = rules[:, :count], rules[:, count:2 * count], rules[:, 2 * count:]

        for _ in range(self.max_rounds + 1):
            fine = left + right
            err = np.abs(whole - fine)
            tol = self.rtol * np.abs(fine.sum(axis=1)) + self.atol
            if np.all(err.sum(axis=1) <= tol):
                return PanelResult(
                    values=fine.sum(axis=1),
                    errors=err.sum(axis=1),
                    tails=np.abs(fine[:, np.argmax(b)]),
                    panels=a.size,
                    evaluations=self.evaluations,
                )

            ratio = (err / tol[:, None]).max(axis=0)
            order = np.argsort(-ratio, kind='stable')
            # suffix[k]: share of the tolerance left to the panels not bisected
            suffix = np.append(np.cumsum(ratio[order][::-1])[::-1], 0.0)
            count = max(int(np.argmax(suffix <= _KEEP_SHARE)), 1)
            bad = np.zeros(a.size, dtype=bool)
            bad[order[:count]] = True

            mid = 0.5 * (a + b)
            child_a = np.concatenate([a[bad], mid[bad]])
            child_b = np.concatenate([mid[bad], b[bad]])
            child_mid = 0.5 * (child_a + child_b)
            rules = self._rule(
                np.concatenate([child_a, child_a, child_mid]), np.concatenate([child_b, child_mid, child_b])
            )
            n_child = child_a.size

            whole = np.concatenate([whole[:, ~bad], rules[:, :n_child]], axis=1)
            left = np.concatenate([left[:, ~bad], rules[:, n_child:2 * n_child]], axis=1)
            right = np.concatenate([right[:, ~bad], rules[:, 2 * n_child:]], axis=1)
            a = np.concatenate([a[~bad], child_a])
            b = np.concatenate([b[~bad], child_b])

        raise QuadratureError(
            f"Frequency integral did not reach rtol={self.rtol:g} after {self.max_rounds} bisection rounds"
        )


def auto_omega_max(params: ModelParams, dt: float) -> float:
    """Truncation where the diffusive envelope exp(-u^2 v dt / 2) is below exp(-800)"""
    return 40.0 / math.sqrt(min(params.v0, params.theta_v) * dt)


def _frequency_edges(params: ModelParams, dt: float, quad: QuadratureConfig) -> np.ndarray:
    hi = quad.omega_max if quad.omega_max is not None else auto_omega_max(params, dt)
    first = max(hi * 1e-4, 10.0 * quad.omega_min)
    if first >= hi:
        return np.linspace(quad.omega_min, hi, quad.initial_panels + 1)
    return np.concatenate([[quad.omega_min], np.geomspace(first, hi, quad.initial_panels)])


def _inversion_integral(
    params: ModelParams,
    spec: JumpSpec,
    indices,
    dt: float,
    quad: QuadratureConfig,
    shifts
) -> PanelResult:
    """
    int_0^omegaMax sum_j sign_j * Im U(i u + shift_j) / u du for every sampling index

    shifts is a sequence of (shift, sign) pairs evaluated on the same nodes.
    """
    solver = AffineSolver(params, spec)
    indices = np.atleast_1d(np.asarray(indices, dtype=int))

    signs = np.array([sign for _, sign in shifts], dtype=float)
    chunk = max(_LANE_BUDGET // (indices.size * len(shifts)), 64)

    def block(u):
        omegas = np.concatenate([1j * u + shift for shift, _ in shifts])
        cf = increment_cf_grid(params, spec, omegas, indices, dt, solver).reshape(indices.size, len(shifts), u.size)
        return np.einsum('kju,j->ku', cf.imag, signs) / u

    def integrand(u):
        # long contracts are solved in lane blocks to bound the output grid
        return np.concatenate([block(u[i:i + chunk]) for i in range(0, u.size, chunk)], axis=1)

    result = PanelQuadrature(integrand, quad.panel_nodes, quad.rtol, quad.max_rounds).integrate(
        _frequency_edges(params, dt, quad)
    )
    tol = quad.rtol * np.abs(result.values) + _ABS_FLOOR
    if np.any(result.tails > np.maximum(tol, 1e3 * _ABS_FLOOR)):
        raise QuadratureError(
            f"Truncation tail {result.tails.max():.3e} exceeds tolerance; raise omega_max"
        )
    return result


def _require(params: ModelParams, spec: JumpSpec, i: int, dt: float, quad: Optional[QuadratureConfig]):
    quad = quad or QuadratureConfig()
    check_inputs(params=params, spec=spec, quad=quad)
    if dt <= 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    if i < 1:
        raise DomainError(f"Sampling index must be >= 1, got {i}")
    return quad


def expected_abs_return(
    params: ModelParams,
    spec: JumpSpec,
    i: int,
    dt: float,
    quad: Optional[QuadratureConfig] = None
) -> float:
    """
    E|S_{t_i} / S_{t_{i-1}} - 1| = (2/pi) int_0^inf Re[(U(iu+1) - U(iu)) / (iu)] du

    Args:
        params: Model parameters
        spec: Jump law
        i: Sampling index (>= 1)
        dt: Sampling interval
        quad: Quadrature settings

    Returns:
        Expected absolute simple return over the interval
    """
    quad = _require(params, spec, i, dt, quad)
    result = _inversion_integral(params, spec, [i], dt, quad, ((1.0, 1.0), (0.0, -1.0)))
    return max(float(2.0 / math.pi * result.values[0]), 0.0)


def positive_return_probability(
    params: ModelParams,
    spec: JumpSpec,
    i: int,
    dt: float,
    quad: Optional[QuadratureConfig] = None
) -> float:
    """P(X_{t_i} - X_{t_{i-1}} > 0) = 1/2 + (1/pi) int_0^inf Im U(iu) / u du"""
    quad = _require(params, spec, i, dt, quad)
    result = _inversion_integral(params, spec, [i], dt, quad, ((0.0, 1.0),))
    return float(np.clip(0.5 + result.values[0] / math.pi, 0.0, 1.0))


def tilted_return_probability(
    params: ModelParams,
    spec: JumpSpec,
    i: int,
    dt: float,
    quad: Optional[QuadratureConfig] = None
) -> float:
    """
    Probability of a positive increment under the share-measure tilt

    E[exp(Y - (r - d) dt) 1{Y > 0}] = 1/2 + exp(-(r - d) dt) / pi * int Im U(iu + 1) / u du
    """
    quad = _require(params, spec, i, dt, quad)
    result = _inversion_integral(params, spec, [i], dt, quad, ((1.0, 1.0),))
    normaliser = math.exp(-(params.r - params.d) * dt)
    return float(np.clip(0.5 + normaliser * result.values[0] / math.pi, 0.0, 1.0))


def discrete_strike(
    params: ModelParams,
    spec: JumpSpec,
    contract: SwapContract,
    quad: Optional[QuadratureConfig] = None
) -> StrikeResult:
    """
    Fair strike of a discretely sampled volatility swap

    All N expected absolute returns are integrated on one adaptive frequency
    grid; each frequency node costs one two-stage affine solve covering every
    sampling index.
    """
    quad = quad or QuadratureConfig()
    check_inputs(params=params, spec=spec, contract=contract, quad=quad)
    dt = contract.dt
    indices = np.arange(1, contract.n + 1)
    result = _inversion_integral(params, spec, indices, dt, quad, ((1.0, 1.0), (0.0, -1.0)))

    abs_returns = np.maximum(2.0 / math.pi * result.values, 0.0)
    factor = vol_points(math.sqrt(math.pi / (2.0 * contract.n * contract.t)), contract)
    contributions = factor * abs_returns
    strike = math.fsum(contributions)
    logger.debug(
        "Discrete strike N=%d T=%g: %.8f (%d panels, %d nodes)",
        contract.n, contract.t, strike, result.panels, result.evaluations,
    )
    return StrikeResult(
        strike=strike,
        tail_estimate=float(factor * 2.0 / math.pi * result.tails.sum()),
        error_estimate=float(factor * 2.0 / math.pi * result.errors.sum()),
        node_count=result.evaluations,
        contributions=tuple(float(c) for c in contributions),
        method="fourier_panels",
    )


class LaplaceIntegrand:
    """
    Vector integrand of the continuous strike over the mapped Laplace variable

    x in (0, 1) maps to u = scale * x / (1 - x); with s = u^2 the integrand is
    2 (1 - E[exp(-u^2 V_t)]) / (scale * x^2), evaluated for every time node
    from a single affine solve. Without the substitution the integral runs
    over s = scale^2 * x / (1 - x) directly.
    """

    def __init__(
        self,
        params: ModelParams,
        spec: JumpSpec,
        times: np.ndarray,
        scale: float,
        substitution: bool = True,
        cache: bool = True
    ):
        self.params = params
        self.solver = AffineSolver(params, spec)
        self.order = np.argsort(times)
        self.sorted_times = times[self.order]
        self.scale = scale
        self.substitution = substitution
        self._cache = {} if cache else None

    def laplace(self, s: float) -> np.ndarray:
        """1 - E[exp(-s V_t)] at every time node"""
        grid = self.solver.solve(0j, -s, 0j, 0j, self.sorted_times)
        exponent = grid.c[:, 0] * self.params.v0 + grid.d[:, 0] * self.params.lambda0 + grid.e[:, 0]
        out = np.empty(self.sorted_times.size)
        out[self.order] = np.real(-np.expm1(exponent))
        return out

    def __call__(self, x: float) -> np.ndarray:
        if self._cache is not None and x in self._cache:
            return self._cache[x]
        if self.substitution:
            u = self.scale * x / (1.0 - x)
            value = 2.0 * self.laplace(u * u) / (self.scale * x * x)
        else:
            s = self.scale ** 2 * x / (1.0 - x)
            value = self.laplace(s) / (self.scale * x ** 1.5 * math.sqrt(1.0 - x))
        if self._cache is not None:
            self._cache[x] = value
        return value


def continuous_strike(
    params: ModelParams,
    spec: JumpSpec,
    contract: SwapContract,
    quad: Optional[QuadratureConfig] = None
) -> StrikeResult:
    """
    Fair strike of a continuously sampled volatility swap

    (1 / (2 sqrt(pi) T)) int_0^T int_0^inf (1 - E[exp(-s V_t)]) s^(-3/2) ds dt * 100

    Raises:
        AdmissibilityError: for downward variance jumps under the standard
            transform, whose Laplace transform diverges for s > eta4
    """
    quad = quad or QuadratureConfig()
    check_inputs(params=params, spec=spec, contract=contract, quad=quad)
    if (spec.variant == JumpVariant.DOUBLE_EXPONENTIAL and spec.q_prime > 0
            and not spec.product_transform):
        raise AdmissibilityError(
            "E[exp(-s V)] diverges for s > eta4 when variance jumps can be negative (p_prime < 1)"
        )

    nodes, weights = np.polynomial.legendre.leggauss(quad.time_nodes)
    times = 0.5 * contract.t * (nodes + 1.0)
    weights = 0.5 * contract.t * weights
    integrand = LaplaceIntegrand(
        params, spec, times,
        scale=1.0 / math.sqrt(params.theta_v),
        substitution=quad.s_substitution,
        cache=quad.cache,
    )

    # the direct s-integral keeps (1 - x)^(-1/2) at the far end, which caps its accuracy
    epsrel = quad.laplace_rtol if quad.s_substitution else max(quad.laplace_rtol, 1e-7)
    inner, error, info = quad_vec(
        integrand, 0.0, 1.0, epsrel=epsrel, epsabs=1e-14, norm='max', full_output=True
    )
    if info.status != 0:
        raise QuadratureError(f"Laplace integral did not converge: {info.message}")

    factor = vol_points(1.0 / (2.0 * math.sqrt(math.pi) * contract.t), contract)
    contributions = factor * weights * inner
    strike = math.fsum(contributions)
    logger.debug(
        "Continuous strike T=%g: %.8f (%d evaluations, error %.2e)",
        contract.t, strike, info.neval, error,
    )
    return StrikeResult(
        strike=strike,
        tail_estimate=0.0,
        error_estimate=float(factor * contract.t * error),
        node_count=int(info.neval) * quad.time_nodes,
        contributions=tuple(float(c) for c in contributions),
        method="laplace_tensor",
    )
