"""Exception types raised across the package."""


class HypnsError(Exception):
    """Base class for all package errors."""


class ChartDomainError(HypnsError, ValueError):
    """A point lies outside the chart domain of its model."""


class ChartTruncationError(HypnsError, ValueError):
    """A requested radius is not representable in double precision on the chart."""


class StencilError(ChartDomainError):
    """A finite-difference stencil leaves the chart."""


class ModelMismatchError(HypnsError, ValueError):
    """Two points/fields belong to different models."""


class UnsupportedOperationError(HypnsError, NotImplementedError):
    """Operation not available for this model kind."""


class NonFiniteIntegrandError(HypnsError, FloatingPointError):
    """An integrand evaluated to inf/nan at a quadrature node."""


class HarmonicExtensionError(HypnsError, RuntimeError):
    """The radial mode ODE failed to integrate."""


class DegenerateFitError(HypnsError, ValueError):
    """Gradient vanishes on the fitting window."""


class VariantError(HypnsError, ValueError):
    """Solution family variant incompatible with the requested operation."""


class InadmissibleProfileError(HypnsError, ValueError):
    """Time profile violates the energy admissibility threshold."""


class CoverRangeError(HypnsError, OverflowError):
    """Ball count would overflow."""
