"""Exception hierarchy.

Every failure mode raises a distinct subclass of :class:`CdfiltError` so
callers can react to divergence, bad configs, and degenerate weights
separately.  No routine in this package regularizes its way past a failed
check silently.
"""


class CdfiltError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(CdfiltError):
    """A matrix required to be (semi)definite failed its pivot or eigenvalue check."""


class NonFiniteState(CdfiltError):
    """A state vector or covariance picked up a NaN/Inf during integration."""


class DimensionMismatch(CdfiltError):
    """Model callables returned arrays whose shapes contradict the declared sizes."""


class OutOfRange(CdfiltError):
    """A signal profile was evaluated before its first breakpoint."""


class DegenerateScaling(CdfiltError):
    """Unscented scaling collapsed the sigma-point spread below tolerance."""


class AllWeightsZero(CdfiltError):
    """Particle weights vanished or went non-finite; the filter has diverged."""


class WeightSumMismatch(CdfiltError):
    """Weights handed to the resampler do not sum to one within tolerance."""


class DivisionByZeroTruth(CdfiltError):
    """A relative-error score hit an exactly zero truth entry."""


class SingularAtEmptyTank(CdfiltError):
    """Strict outflow Jacobian requested at (or below) an empty-tank mass."""


class ConfigError(CdfiltError):
    """Unknown key, malformed value, or unsatisfiable combination in a config file."""
