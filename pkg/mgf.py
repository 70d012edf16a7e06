"""
Joint moment-generating function of (X, V, lambda)

U(tau, X, V, lambda) = exp(omega X + C V + D lambda + E) where C solves a Heston
Riccati equation in closed form. D is integrated together with its running
integral by an embedded Runge-Kutta 4(5) scheme on the complex plane (the
jump term of the D equation depends on C and has no closed antiderivative),
and E adds the closed-form integral of C. Without jumps D and E are closed
form as well.

All solves are vectorised: one call handles a batch of frequency arguments
and returns coefficients on a whole grid of times-to-maturity.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import RK45

from config import settings
from exceptions import AdmissibilityError, DomainError, SolverError
from jumps import big_lambda, check_admissible, mean_price_jump
from models import (
    AffineCoefficients, FrequencyArgument, JumpSpec, ModelParams, SolverDiagnostics
)
from validation import check_inputs

logger = logging.getLogger(__name__)

# |g| below which log(1 - g x) is expanded in series
_SERIES_G = 1e-8
# |g| from which log(1 - g x) is phase-tracked along tau
_TRACK_G = 0.5
_MAX_TRACK_POINTS = 4096
_MAX_STEPS = 200000
# points on which C is checked against the jump strip before integrating
_STRIP_GRID = 129


@dataclass(frozen=True)
class AffineGrid:
    """Coefficients for n frequency arguments on m times-to-maturity, arrays of shape (m, n)"""
    taus: np.ndarray
    c: np.ndarray
    d: np.ndarray
    e: np.ndarray
    diagnostics: SolverDiagnostics


@dataclass(frozen=True)
class _Riccati:
    """Closed-form solution data of y' = a y^2 + b y + c, y(0) = y0"""
    disc: np.ndarray  # sqrt(b^2 - 4ac), principal branch
    r_minus: np.ndarray  # attracting root
    k: np.ndarray  # g / a, finite as a -> 0
    g: np.ndarray


def _riccati(a: float, b, c, y0) -> _Riccati:
    b, c, y0 = np.broadcast_arrays(
        np.asarray(b, dtype=complex), np.asarray(c, dtype=complex), np.asarray(y0, dtype=complex)
    )
    disc = np.sqrt(b * b - 4.0 * a * c)
    den = -b + disc
    if np.any(den == 0):
        raise SolverError("Degenerate Riccati coefficients (-b + sqrt(b^2 - 4ac) = 0)")
    r_minus = 2.0 * c / den
    inv_r_plus = 2.0 * a / den
    k = 2.0 * (y0 - r_minus) / (den * (y0 * inv_r_plus - 1.0))
    return _Riccati(disc=disc, r_minus=r_minus, k=k, g=a * k)


def _check_horizon(rc: _Riccati, tau_max: float) -> None:
    """Real lanes pass through their pole (1 - g exp(-disc tau) = 0) without producing a non-finite value"""
    real = (np.abs(rc.g.imag) <= 1e-12 * np.abs(rc.g)) & (np.abs(rc.disc.imag) <= 1e-12 * np.abs(rc.disc))
    crossing = real & (rc.g.real > 1.0) & (rc.g.real * np.exp(-rc.disc.real * tau_max) <= 1.0)
    if np.any(crossing):
        raise SolverError(f"Riccati solution explodes before tau={tau_max:g} (moment explosion)")


def _riccati_value(rc: _Riccati, tau):
    """y(tau); tau broadcasts against the lane axis"""
    x = np.exp(-rc.disc * tau)
    value = rc.r_minus - rc.k * rc.disc * x / (1.0 - rc.g * x)
    if not np.all(np.isfinite(value)):
        raise SolverError("Riccati solution explodes before the requested maturity")
    return value


def _tracked_log(g: np.ndarray, disc: np.ndarray, taus: np.ndarray) -> np.ndarray:
    """log(1 - g exp(-disc tau)) continuous in tau, principal at tau = 0; shape (m, n)"""
    tau_max = taus[-1]
    spin = float(np.max(np.abs(np.imag(disc)))) * tau_max
    count = int(min(max(np.ceil(8.0 * spin / np.pi), 8), _MAX_TRACK_POINTS))
    fine = np.unique(np.concatenate([np.linspace(0.0, tau_max, count + 1), taus]))
    z = 1.0 - g[None, :] * np.exp(-disc[None, :] * fine[:, None])
    if np.any(z == 0):
        raise SolverError("Riccati solution explodes before the requested maturity")
    logs = np.log(np.abs(z)) + 1j * np.unwrap(np.angle(z), axis=0)
    return logs[np.searchsorted(fine, taus)]


def _riccati_integral(rc: _Riccati, taus: np.ndarray) -> np.ndarray:
    """Integral of y over [0, tau] for every tau in the sorted grid; shape (m, n)"""
    tau_col = taus[:, None]
    x = np.exp(-rc.disc * tau_col)
    g = rc.g
    small = np.abs(g) < _SERIES_G
    tracked = np.abs(g) >= _TRACK_G
    g_safe = np.where(small, 1.0, g)

    logs = np.log1p(-g * x)
    if np.any(tracked) and taus[-1] > 0:
        logs[:, tracked] = _tracked_log(g[tracked], rc.disc[tracked], taus)
    log0 = np.log1p(-g)
    ell = np.where(small, (1.0 - x) + 0.5 * g * (1.0 - x * x), (logs - log0) / g_safe)
    return rc.r_minus * tau_col - rc.k * ell


class AffineSolver:
    """
    Solves the affine coefficient system for one model and jump law

    A solver holds no state between calls; every solve gets its own
    Runge-Kutta workspace.
    """

    def __init__(
        self,
        params: ModelParams,
        spec: JumpSpec,
        rtol: Optional[float] = None,
        atol: Optional[float] = None
    ):
        """
        Initialize solver

        Args:
            params: Model parameters
            spec: Jump law
            rtol: Relative tolerance of the embedded RK step control
            atol: Absolute tolerance of the embedded RK step control
        """
        self.params = params
        self.spec = spec
        self.rtol = settings.ode_rtol if rtol is None else rtol
        self.atol = settings.ode_atol if atol is None else atol

    def _c_riccati(self, omega, phi) -> _Riccati:
        p = self.params
        return _riccati(
            0.5 * p.sigma_v ** 2,
            p.rho * p.sigma_v * omega - p.kappa_v,
            0.5 * (omega * omega - omega),
            phi,
        )

    def solve(self, omega, phi, psi, chi, taus: Sequence[float]) -> AffineGrid:
        """
        Coefficients (C, D, E) for a batch of arguments

        Args:
            omega, phi, psi, chi: Scalars or 1-D arrays (broadcast together)
            taus: Non-negative, ascending times-to-maturity

        Returns:
            AffineGrid with arrays of shape (len(taus), n)
        """
        omega, phi, psi, chi = (
            np.atleast_1d(arr).ravel()
            for arr in np.broadcast_arrays(*(np.asarray(v, dtype=complex) for v in (omega, phi, psi, chi)))
        )
        if not all(np.all(np.isfinite(arr)) for arr in (omega, phi, psi, chi)):
            raise DomainError("Frequency arguments must be finite")
        taus = np.atleast_1d(np.asarray(taus, dtype=float))
        if np.any(taus < 0) or np.any(np.diff(taus) < 0):
            raise DomainError("Times-to-maturity must be non-negative and ascending")

        rc = self._c_riccati(omega, phi)
        _check_horizon(rc, taus[-1])
        c = _riccati_value(rc, taus[:, None])

        if not self.spec.has_jumps:
            d, e, diagnostics = self._closed_form(rc, omega, psi, chi, taus)
        else:
            d, e, diagnostics = self._integrate(rc, c, omega, phi, psi, chi, taus)

        # initial conditions hold exactly
        at_zero = taus == 0
        c[at_zero] = phi
        d[at_zero] = psi
        e[at_zero] = chi
        return AffineGrid(taus=taus, c=c, d=d, e=e, diagnostics=diagnostics)

    def _closed_form(self, rc: _Riccati, omega, psi, chi, taus):
        """Jump-free system: D solves a Riccati equation without source, E is a quadrature of both"""
        p = self.params
        rd = _riccati(0.5 * p.sigma_l ** 2, np.full_like(psi, -p.kappa_l), np.zeros_like(psi), psi)
        _check_horizon(rd, taus[-1])
        d = _riccati_value(rd, taus[:, None])
        int_c = _riccati_integral(rc, taus)
        int_d = _riccati_integral(rd, taus)
        e = (chi + (p.r - p.d) * omega * taus[:, None]
             + p.kappa_v * p.theta_v * int_c + p.kappa_l * p.theta_l * int_d)
        return d, e, SolverDiagnostics(method="closed_form")

    def _integrate(self, rc: _Riccati, c, omega, phi, psi, chi, taus):
        """
        Embedded RK 4(5) for (D, int D) with C and int C from the closed form

        C is checked against the jump-transform strip on a uniform grid before
        any step is taken, so an inadmissible argument fails immediately.
        """
        p = self.params
        spec = self.spec
        n = omega.size
        half_sl2 = 0.5 * p.sigma_l ** 2
        m_jump = mean_price_jump(spec)

        m = taus.size
        t_end = float(taus[-1])
        try:
            check_admissible(spec, omega, phi)
            check_admissible(spec, omega, c)
            if t_end > 0:
                grid = np.linspace(0.0, t_end, _STRIP_GRID)[:, None]
                check_admissible(spec, omega, _riccati_value(rc, grid))
        except DomainError as err:
            raise AdmissibilityError(
                f"C leaves the jump-transform strip before tau={t_end:.6g}: {err}"
            ) from err

        def rhs(t, y):
            d = y[:n]
            try:
                jump = big_lambda(spec, omega, _riccati_value(rc, t), m_jump)
            except DomainError as err:
                raise AdmissibilityError(f"C left the jump-transform strip at tau={t:.6g}: {err}") from err
            return np.concatenate([half_sl2 * d * d - p.kappa_l * d + jump, d])

        out = np.empty((m, 2 * n), dtype=complex)
        y0 = np.concatenate([psi, np.zeros_like(psi)])
        idx = int(np.searchsorted(taus, 0.0, side='right'))
        out[:idx] = y0
        steps = 0
        max_error = 0.0
        tracked = True
        if t_end > 0.0:
            solver = RK45(rhs, 0.0, y0, t_end, rtol=self.rtol, atol=self.atol)
            while solver.status == 'running':
                message = solver.step()
                if solver.status == 'failed':
                    raise SolverError(f"Affine ODE solver failed after {steps} steps: {message}")
                steps += 1
                if steps > _MAX_STEPS:
                    raise SolverError(f"Affine ODE solver exceeded {_MAX_STEPS} steps")
                norm = self._error_norm(solver)
                if norm is None:
                    tracked = False
                else:
                    max_error = max(max_error, norm)
                if idx < m and taus[idx] <= solver.t:
                    stop = int(np.searchsorted(taus, solver.t, side='right'))
                    out[idx:stop] = solver.dense_output()(taus[idx:stop]).T
                    if taus[stop - 1] == solver.t:
                        out[stop - 1] = solver.y
                    idx = stop
            nfev = solver.nfev
        else:
            nfev = 0

        if not np.all(np.isfinite(out)):
            raise SolverError("Affine ODE solution is not finite over the requested horizon")
        if not tracked:
            logger.warning("RK45 did not expose its local error estimate; max_error_norm is unavailable")
            max_error = math.nan

        d = out[:, :n]
        int_c = _riccati_integral(rc, taus)
        e = (chi + (p.r - p.d) * omega * taus[:, None]
             + p.kappa_v * p.theta_v * int_c + p.kappa_l * p.theta_l * out[:, n:])
        diagnostics = SolverDiagnostics(method="rk45", steps=steps, nfev=nfev, max_error_norm=max_error)
        logger.debug("Affine solve: %d lanes, %d steps, %d evaluations", n, steps, nfev)
        return d, e, diagnostics

    def _error_norm(self, solver: RK45) -> Optional[float]:
        """
        Scaled RMS local error estimate of the step just accepted

        Built from the solver's stage table; None when the installed scipy
        does not expose it.
        """
        try:
            err = np.asarray(solver.K).T.dot(solver.E) * solver.h_previous
            y_old = np.asarray(solver.y_old)
        except (AttributeError, TypeError, ValueError):
            return None
        if err.shape != solver.y.shape or y_old.shape != solver.y.shape:
            return None
        scale = self.atol + np.maximum(np.abs(y_old), np.abs(solver.y)) * self.rtol
        return float(np.sqrt(np.mean(np.abs(err / scale) ** 2)))


def solve_affine(
    params: ModelParams,
    spec: JumpSpec,
    q: FrequencyArgument,
    tau: float,
    rtol: Optional[float] = None,
    atol: Optional[float] = None
) -> AffineCoefficients:
    """
    Solve the coefficient system for a single frequency argument

    Args:
        params: Model parameters
        spec: Jump law
        q: Frequency argument (omega, phi, psi, chi)
        tau: Time-to-maturity (>= 0)

    Returns:
        AffineCoefficients with (C, D, E)(tau)
    """
    check_inputs(params=params, spec=spec)
    if not q.is_finite():
        raise DomainError(f"Frequency argument must be finite, got {q}")
    if tau < 0:
        raise DomainError(f"tau must be >= 0, got {tau}")
    if tau == 0:
        return AffineCoefficients(tau=0.0, c=complex(q.phi), d=complex(q.psi), e=complex(q.chi))
    grid = AffineSolver(params, spec, rtol, atol).solve(q.omega, q.phi, q.psi, q.chi, [tau])
    return AffineCoefficients(
        tau=float(tau),
        c=complex(grid.c[0, 0]),
        d=complex(grid.d[0, 0]),
        e=complex(grid.e[0, 0]),
        diagnostics=grid.diagnostics,
    )


def mgf_joint(
    params: ModelParams,
    spec: JumpSpec,
    q: FrequencyArgument,
    tau: float,
    x: float,
    v: float,
    lam: float
) -> complex:
    """E[exp(omega X_T + phi V_T + psi lambda_T + chi) | X=x, V=v, lambda=lam], tau = T - t"""
    if v < 0 or lam < 0:
        raise DomainError(f"State must satisfy v >= 0 and lambda >= 0, got v={v}, lambda={lam}")
    coef = solve_affine(params, spec, q, tau)
    return complex(np.exp(q.omega * x + coef.c * v + coef.d * lam + coef.e))


def mgf_marginal_variance(params: ModelParams, spec: JumpSpec, s: complex, tau: float) -> complex:
    """Laplace transform E[exp(-s V_tau)] from the initial state"""
    q = FrequencyArgument(omega=0j, phi=-complex(s))
    return mgf_joint(params, spec, q, tau, 0.0, params.v0, params.lambda0)


def mgf_marginal_intensity(params: ModelParams, spec: JumpSpec, s: complex, tau: float) -> complex:
    """Laplace transform E[exp(-s lambda_tau)] from the initial state"""
    q = FrequencyArgument(omega=0j, psi=-complex(s))
    return mgf_joint(params, spec, q, tau, 0.0, params.v0, params.lambda0)


def mgf_marginal_log_price(params: ModelParams, spec: JumpSpec, omega: complex, tau: float) -> complex:
    """E[exp(omega X_tau)] with X_0 = ln(s0)"""
    q = FrequencyArgument(omega=complex(omega))
    return mgf_joint(params, spec, q, tau, float(np.log(params.s0)), params.v0, params.lambda0)


def increment_cf_grid(
    params: ModelParams,
    spec: JumpSpec,
    omegas,
    indices: Sequence[int],
    dt: float,
    solver: Optional[AffineSolver] = None
) -> np.ndarray:
    """
    E[exp(omega (X_{t_i} - X_{t_{i-1}}))] from time 0 for many omegas and intervals

    First stage: coefficients over one interval with q = (omega, 0, 0, 0).
    Second stage: propagate exp(C1 V + D1 lambda + E1) back over t_{i-1}
    with omega = 0; one dense-output solve covers every requested interval.

    Returns:
        Array of shape (len(indices), len(omegas))
    """
    if dt <= 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    indices = np.asarray(indices, dtype=int)
    if np.any(indices < 1):
        raise DomainError("Sampling indices start at 1")
    solver = solver or AffineSolver(params, spec)
    omegas = np.atleast_1d(np.asarray(omegas, dtype=complex))

    first = solver.solve(omegas, 0j, 0j, 0j, [dt])
    c1, d1, e1 = first.c[0], first.d[0], first.e[0]

    order = np.argsort(indices, kind='stable')
    taus = (indices[order] - 1) * dt
    second = solver.solve(0j, c1, d1, e1, taus)
    values = np.exp(second.c * params.v0 + second.d * params.lambda0 + second.e)
    result = np.empty_like(values)
    result[order] = values
    return result


def increment_cf(params: ModelParams, spec: JumpSpec, omega: complex, i: int, dt: float) -> complex:
    """E[exp(omega (X_{t_i} - X_{t_{i-1}}))] evaluated from time 0"""
    check_inputs(params=params, spec=spec)
    if i < 1:
        raise DomainError(f"Sampling index must be >= 1, got {i}")
    return complex(increment_cf_grid(params, spec, [omega], [i], dt)[0, 0])
