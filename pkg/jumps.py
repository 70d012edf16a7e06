"""
Jump-size laws: joint exponential transform, price-jump compensator and the
jump term of the intensity Riccati equation
"""

import math
from typing import Optional

import numpy as np

from exceptions import DomainError
from models import JumpSpec, JumpVariant

# largest Re(c ln B) accepted for the product-form factor B^c
_PRODUCT_LOG_MAX = 5.0


def _kou_transform(z, p: float, up_rate: float, down_rate: float):
    """E[exp(z J)] for J with density p*a*exp(-a y) on y >= 0 and q*b*exp(b y) on y < 0"""
    q = 1.0 - p
    value = 0.0
    if p > 0:
        value = value + p * up_rate / (up_rate - z)
    if q > 0:
        value = value + q * down_rate / (down_rate + z)
    return value


def check_admissible(spec: JumpSpec, omega, c) -> None:
    """
    Raise DomainError where E[exp(omega J^S + c J^V)] diverges

    Only sides of the double-exponential law that carry mass impose a bound.
    The product-form transform A^omega * B^c is finite everywhere, but with
    B < 1 it grows without bound as Re(c) falls; it is rejected once
    |B^c| exceeds exp(_PRODUCT_LOG_MAX).
    """
    if spec.variant == JumpVariant.NONE:
        return
    if spec.product_transform and spec.variant == JumpVariant.DOUBLE_EXPONENTIAL:
        log_b = math.log(product_factors(spec)[1])
        if np.any(np.real(np.asarray(c) * log_b) > _PRODUCT_LOG_MAX):
            raise DomainError(
                f"Product-form jump factor B^c overflows: B={math.exp(log_b):.6g} < 1 requires "
                f"Re(c) >= {-_PRODUCT_LOG_MAX / abs(log_b):.6g}"
            )
        return
    re_w = np.real(omega)
    re_c = np.real(c)
    if spec.variant == JumpVariant.DOUBLE_EXPONENTIAL:
        bounds = (
            (spec.p > 0, re_w >= spec.eta1, "Re(omega) < eta1"),
            (spec.q > 0, re_w <= -spec.eta2, "Re(omega) > -eta2"),
            (spec.p_prime > 0, re_c >= spec.eta3, "Re(c) < eta3"),
            (spec.q_prime > 0, re_c <= -spec.eta4, "Re(c) > -eta4"),
        )
        for active, violated, label in bounds:
            if active and np.any(violated):
                raise DomainError(f"Jump transform diverges: requires {label}")
    elif spec.variant == JumpVariant.GAUSSIAN_EXPONENTIAL:
        if np.any(np.real((spec.rho_j * np.asarray(omega) + c) * spec.eta) >= 1):
            raise DomainError("Jump transform diverges: requires Re((rho_j*omega + c)*eta) < 1")


def product_factors(spec: JumpSpec):
    """(A, B) of the product-form transform: the one-sided transforms at argument 1"""
    return (
        _kou_transform(1.0, spec.p, spec.eta1, spec.eta2),
        _kou_transform(1.0, spec.p_prime, spec.eta3, spec.eta4),
    )


def joint_jump_transform(spec: JumpSpec, omega, c):
    """
    E[exp(omega J^S + c J^V)]

    Accepts scalars or broadcastable arrays of complex arguments.
    With spec.product_transform the double-exponential law is evaluated
    in the product form A^omega * B^c.

    Raises:
        DomainError: if the transform integral diverges
    """
    omega = np.asarray(omega, dtype=complex)
    c = np.asarray(c, dtype=complex)
    if spec.variant == JumpVariant.NONE:
        return np.ones(np.broadcast(omega, c).shape, dtype=complex)[()]

    check_admissible(spec, omega, c)

    if spec.variant == JumpVariant.DOUBLE_EXPONENTIAL:
        if spec.product_transform:
            a, b = product_factors(spec)
            return np.exp(omega * np.log(a) + c * np.log(b))[()]
        price = _kou_transform(omega, spec.p, spec.eta1, spec.eta2)
        variance = _kou_transform(c, spec.p_prime, spec.eta3, spec.eta4)
        return (price * variance)[()]

    # Gaussian conditional on exponential
    gauss = np.exp(omega * spec.nu + 0.5 * spec.delta ** 2 * omega ** 2)
    return (gauss / (1.0 - (spec.rho_j * omega + c) * spec.eta))[()]


def mean_price_jump(spec: JumpSpec) -> float:
    """m = E[exp(J^S) - 1]"""
    if spec.variant == JumpVariant.NONE:
        return 0.0
    return float(np.real(joint_jump_transform(spec, 1.0, 0.0))) - 1.0


def big_lambda(spec: JumpSpec, omega, c, m: Optional[float] = None):
    """
    Jump term of the intensity Riccati equation:
    -m*omega + E[exp(omega J^S + c J^V)] - 1

    m defaults to mean_price_jump(spec); callers in a loop pass it once.
    """
    omega = np.asarray(omega, dtype=complex)
    c = np.asarray(c, dtype=complex)
    if spec.variant == JumpVariant.NONE:
        return np.zeros(np.broadcast(omega, c).shape, dtype=complex)[()]
    if m is None:
        m = mean_price_jump(spec)
    return (-m * omega + joint_jump_transform(spec, omega, c) - 1.0)[()]


def sample_jumps(spec: JumpSpec, rng: np.random.Generator, size: int):
    """
    Draw `size` independent jump pairs

    Returns:
        Tuple of (price_jumps, variance_jumps) arrays
    """
    if spec.variant == JumpVariant.NONE or size == 0:
        return np.zeros(size), np.zeros(size)

    if spec.variant == JumpVariant.DOUBLE_EXPONENTIAL:
        js = _sample_double_exponential(rng, size, spec.p, spec.eta1, spec.eta2)
        jv = _sample_double_exponential(rng, size, spec.p_prime, spec.eta3, spec.eta4)
        return js, jv

    jv = rng.exponential(scale=spec.eta, size=size)
    js = spec.nu + spec.rho_j * jv + spec.delta * rng.standard_normal(size)
    return js, jv


def _sample_double_exponential(rng: np.random.Generator, size: int, p: float, up_rate: float, down_rate: float):
    up = rng.random(size) < p
    magnitude = rng.standard_exponential(size)
    return np.where(up, magnitude / up_rate, -magnitude / down_rate)


def double_exponential_pdf(y, p: float, up_rate: float, down_rate: float):
    """Density p*a*exp(-a y) 1{y>=0} + q*b*exp(b y) 1{y<0}"""
    y = np.asarray(y, dtype=float)
    q = 1.0 - p
    return np.where(
        y >= 0,
        p * up_rate * np.exp(-up_rate * np.abs(y)),
        q * down_rate * np.exp(-down_rate * np.abs(y)),
    )
