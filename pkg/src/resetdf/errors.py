"""Exception hierarchy shared by all resetdf modules."""


class ResetDFError(Exception):
    """Base class for every error raised by resetdf."""


class ParameterError(ResetDFError, ValueError):
    """A constructor or operation received an out-of-range parameter."""


class SingularMatrixError(ResetDFError, ArithmeticError):
    """Matrix is singular (or numerically so) and cannot be inverted."""

    def __init__(self, message, omega=None):
        if omega is not None:
            message = f"{message} (at omega={omega:.6g} rad/s)"
        super().__init__(message)
        self.omega = omega


class DFUndefinedError(SingularMatrixError):
    """Describing-function kernels cannot be formed at this frequency."""


class UnsupportedTopologyError(ResetDFError):
    """Series chain holds more than one reset element."""


class MarginalPointError(ResetDFError, ArithmeticError):
    """First-harmonic open loop passes through -1."""


class InfeasibleError(ResetDFError):
    """No design satisfies the requested phase lead."""

    def __init__(self, message, gamma=None, max_lead=None, rejected=None):
        super().__init__(message)
        self.gamma = gamma
        self.max_lead = max_lead
        self.rejected = rejected or {}


class DivergenceError(ResetDFError, ArithmeticError):
    """Simulation state exceeded the overflow guard."""

    def __init__(self, message, last_stable_time=None):
        super().__init__(message)
        self.last_stable_time = last_stable_time


class ConfigError(ResetDFError, ValueError):
    """A run configuration file could not be parsed or validated."""
