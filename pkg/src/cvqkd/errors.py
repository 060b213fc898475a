"""Exception types raised across the package."""


class ConstellationError(ValueError):
    """An ensemble or builder input violates a construction constraint."""


class NumericalError(ArithmeticError):
    """A linear-algebra step produced a result outside its tolerance."""


class ConfigurationError(ValueError):
    """Invalid runtime configuration (quadrature resolution, search grid, CLI input)."""
