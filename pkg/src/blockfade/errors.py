"""Exception types shared across the package."""


class BlockfadeError(Exception):
    """Base class for all package-specific failures."""


class QuadratureError(BlockfadeError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, worst_interval=None):
        super().__init__(message)
        self.worst_interval = worst_interval


class DegenerateSpectrumError(BlockfadeError):
    """Gram eigenvalues too close for the determinant-ratio density."""


class UnsupportedSizeError(BlockfadeError):
    """Antenna count or blocklength beyond the supported closed-form range."""


class UnsupportedRegimeError(BlockfadeError):
    """Parameter regime outside the validity of the requested formula."""


class NumericalHealthError(BlockfadeError):
    """Non-finite statistics or an excessive numerical-failure rate."""
