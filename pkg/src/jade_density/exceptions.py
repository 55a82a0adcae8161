"""Exception and warning classes shared across the package."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature fails to reach its tolerance.

    Attributes
    ----------
    interval : tuple of float
        The worst offending subinterval.
    residual : float
        Estimated error on that subinterval.
    """

    def __init__(self, message, interval=None, residual=None):
        super().__init__(message)
        self.interval = interval
        self.residual = residual


class SpectrumEscapeError(RuntimeError):
    """Raised when a mapped operator's spectrum leaves [-1, 1]."""


class PrecisionWarning(UserWarning):
    """The moment transform amplifies errors beyond the available digits."""


class MomentValidityWarning(UserWarning):
    """Moments or Chebyshev expectations violate the bounds of a valid distribution."""


class NormalizationWarning(UserWarning):
    """The zeroth moment differs from one."""
