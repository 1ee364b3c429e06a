"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Invalid or inconsistent configuration (bad order, domain, grid, ...)."""


class NumericalError(RuntimeError):
    """A numerical operation failed (non-finite energy, singular system, ...)."""
