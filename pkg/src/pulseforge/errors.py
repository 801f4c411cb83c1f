"""Exception and warning types shared across the package."""


class ConfigError(ValueError):
    """Invalid user-supplied parameters or configuration."""


class NumericalError(RuntimeError):
    """A numerical procedure failed (singular operator, breakdown)."""


class ConvergenceWarning(UserWarning):
    """An iterative procedure stopped at its iteration limit."""
