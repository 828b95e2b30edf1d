"""Exception types shared across the package."""


class HDError(Exception):
    """Base class for hdosc errors."""


class DimensionError(HDError, ValueError):
    """Symbols or banks with incompatible (or empty) dimensionality."""


class DegeneratePhaseError(HDError, ArithmeticError):
    """A complex sum or state is too small to carry a well-defined phase."""


class IntegrationDivergedError(HDError, RuntimeError):
    """Oscillator state became non-finite during integration."""


class ConfigError(HDError, ValueError):
    """Invalid experiment configuration."""
