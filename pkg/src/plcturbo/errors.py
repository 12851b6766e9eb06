"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid physical or experiment configuration."""


class ResolutionError(ValueError):
    """A sampling grid is too coarse for the requested operation."""


class DegenerateChannelError(ValueError):
    """Discretization produced an all-zero tap vector."""


class ComplexityError(ValueError):
    """A trellis would exceed the configured state-count cap."""


class NumericalDegeneracyError(FloatingPointError):
    """All branch metrics collapsed to -inf at some trellis step."""
