"""
Error hierarchy for VolStrike
"""


class VolStrikeError(Exception):
    """Base class for all VolStrike errors"""


class ConfigError(VolStrikeError):
    """Invalid parameters, contract terms or run configuration"""


class DomainError(VolStrikeError):
    """A transform or estimator was evaluated outside its domain"""


class AdmissibilityError(DomainError):
    """The Riccati path left the strip where the jump transform is finite"""


class SolverError(VolStrikeError):
    """The affine ODE solver failed (step-size underflow, blow-up)"""


class QuadratureError(VolStrikeError):
    """A frequency or Laplace integral did not converge"""
