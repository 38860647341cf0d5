"""
Exception hierarchy shared by the library and the command line front end.
"""

# CLI exit codes, stable contract
EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_IO = 3


class ThermoQError(Exception):
    """Base class for every error raised by thermoq."""


class DomainError(ThermoQError, ValueError):
    """
    An argument lies outside the domain of the requested operation
    (non-positive temperature, position outside the box, bad mode index...).
    """


class ContinuumSpectrumError(DomainError):
    """Raised when a discrete level set is requested for the free particle."""

    def __init__(self, message="free particle has a continuum spectrum, use ep_free"):
        super().__init__(message)


class EvanescentRegimeError(DomainError):
    """The radicand of the temperature-dependent wave vector is negative."""

    def __init__(self, k, T, radicand):
        self.k = k
        self.T = T
        self.radicand = radicand
        super().__init__(
            f"evanescent regime: k(T)^2 = {radicand:.6g} < 0 for k={k}, T={T}"
        )


class FrequencyCollapseError(DomainError):
    """Omega_n(T) <= 0, the oscillator frequency is no longer physical."""

    def __init__(self, n, T, omega_n):
        self.n = n
        self.T = T
        self.omega_n = omega_n
        super().__init__(
            f"frequency collapse: Omega_{n}(T={T}) = {omega_n:.6g} <= 0"
        )


class BracketError(DomainError):
    """The target function does not change sign over the bracket."""

    def __init__(self, lo, hi, f_lo, f_hi):
        self.lo = lo
        self.hi = hi
        self.f_lo = f_lo
        self.f_hi = f_hi
        super().__init__(
            f"no sign change on [{lo}, {hi}]: f(lo)={f_lo:.6g}, f(hi)={f_hi:.6g}"
        )


class QuadratureError(ThermoQError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate, error_bound):
        self.estimate = estimate
        self.error_bound = error_bound
        super().__init__(
            f"{message} (best estimate {estimate:.17g}, error bound {error_bound:.3g})"
        )


class ConfigError(ThermoQError):
    """Invalid command line flags or configuration file contents."""


class OutputError(ThermoQError, OSError):
    """Writing a result file failed."""


class ModeIndexError(DomainError, IndexError):
    """A mode index below the first level of the system."""
