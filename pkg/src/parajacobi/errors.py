"""Exception hierarchy for the spectral pipeline.

Every failure mode that callers may want to branch on gets its own class;
all of them derive from SpectralError so a single except clause can fence
an entire computation.
"""


class SpectralError(Exception):
    """Base class for all errors raised by this package."""


class EmptyProductError(SpectralError, ValueError):
    """Ordered matrix product of an empty sequence (identity is never implied)."""


class NotParabolicError(SpectralError, ValueError):
    """Matrix fails the |trace| = 2, det = 1 gate."""


class TrivialParabolicError(SpectralError, ValueError):
    """Matrix is (numerically) a multiple of the identity."""


class RealSpectrumError(SpectralError, ValueError):
    """Complex eigendecomposition requested for a matrix with real spectrum."""


class DegenerateColumnError(SpectralError, ValueError):
    """Eigenvector column formula breaks down (vanishing upper-right entry)."""


class DegenerateBandsError(SpectralError, ValueError):
    """Band endpoints could not be resolved within the root-clustering tolerance."""


class OutsideBandError(SpectralError, ValueError):
    """Evaluation point violates a band / half-line membership precondition."""


class OutOfClassError(SpectralError, ValueError):
    """Model violates the periodically-modulated hypotheses (wrong regime, bad shift limits)."""


class ZeroSlopeError(SpectralError, ValueError):
    """Critical polynomial has zero slope; inconsistent with the parabolic regime."""


class CriticalPointError(SpectralError, ValueError):
    """Evaluation at the critical point where the frame scale vanishes."""


class EllipticFailureError(SpectralError, RuntimeError):
    """Conjugated transfer matrix is not elliptic where ellipticity was required."""


class GrowthRegimeError(SpectralError, OverflowError):
    """Recurrence entered the exponential growth regime (magnitude guard tripped)."""


class HyperbolicTruncationError(SpectralError, ValueError):
    """Truncated-parameter discriminant is non-negative at the requested point."""


class HorizonExhaustedError(SpectralError, RuntimeError):
    """Dyadic limit did not meet its tolerance within the horizon.

    The partial state (best estimate plus Cauchy gap) is attached when available.
    """

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class NonCauchyError(HorizonExhaustedError):
    """Perturbed dyadic samples failed to become Cauchy within the horizon."""


class ResonantWindowError(SpectralError, RuntimeError):
    """Two-point amplitude inversion ill-conditioned on the whole window."""


class UpsilonMismatchError(SpectralError, RuntimeError):
    """The two closed forms of the local frequency disagree."""


class ConvergenceFailureError(SpectralError, RuntimeError):
    """An iterative linear-algebra routine exceeded its iteration cap."""


class NegativeCoefficientError(SpectralError, ValueError):
    """A perturbed off-diagonal coefficient is not positive."""


class ConfigError(SpectralError, ValueError):
    """Invalid run configuration."""
