"""Exception types shared across the package."""


class TorsilabError(Exception):
    """Base class for all package-specific errors."""


class ChartDomainError(TorsilabError, ValueError):
    """A point (or a finite-difference stencil) left the coordinate chart."""


class UsageError(TorsilabError, ValueError):
    """Caller violated an interface contract (wrong tag, dimension mismatch, ...)."""


class RangeError(TorsilabError, ValueError):
    """A time parameter lies outside the certified horizon of a flow path."""


class BlowUpError(TorsilabError, RuntimeError):
    """A flow coefficient collapsed; carries the bracketing interval."""

    def __init__(self, t_lo, t_hi, message=None):
        self.t_lo = float(t_lo)
        self.t_hi = float(t_hi)
        super().__init__(message or f"flow blow-up detected in ({t_lo:.9g}, {t_hi:.9g}]")


class SolverError(TorsilabError, RuntimeError):
    """Linear solver failed to converge; carries the residual history."""

    def __init__(self, message, residual_history=None):
        self.residual_history = list(residual_history or [])
        super().__init__(message)


class NumericError(TorsilabError, RuntimeError):
    """Quadrature or another numeric routine failed to reach its tolerance."""


class DegenerateTrialError(TorsilabError, ValueError):
    """Trial function has (numerically) zero Dirichlet energy."""


class InvalidFieldError(TorsilabError, ValueError):
    """Vector field does not satisfy the unit-divergence constraint."""


class NotCertifiedError(TorsilabError, ValueError):
    """The requested bound is not certified for the given flow path."""


class ConfigError(TorsilabError, ValueError):
    """Experiment configuration failed validation; carries a JSON pointer."""

    def __init__(self, message, json_path="$"):
        self.json_path = json_path
        super().__init__(f"{json_path}: {message}")
