"""Exception hierarchy used across the package."""


class TrilindError(Exception):
    """Base class for all errors raised by trilind."""


class InvalidTruncationError(TrilindError, ValueError):
    """Fock truncation bound below 1."""


class DimensionError(TrilindError, ValueError):
    """Operands live on different Hilbert spaces or have the wrong shape."""


class IntegrationError(TrilindError, RuntimeError):
    """The time integrator could not reach the requested time."""

    def __init__(self, message, t_reached=None):
        super().__init__(message)
        self.t_reached = t_reached


class SolverError(TrilindError, RuntimeError):
    """Steady-state solve failed or produced an unphysical result."""


class TruncationError(TrilindError, RuntimeError):
    """Population in the highest kept Fock level exceeds the hard limit."""


class UndefinedCorrelationError(TrilindError, ValueError):
    """Second-order correlation requested for a mode with vanishing occupation."""


class ConfigError(TrilindError, ValueError):
    """Invalid run configuration. The message names the offending key."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


class ConfigTruncationError(ConfigError, InvalidTruncationError):
    """Truncation bound in a config below 1."""
