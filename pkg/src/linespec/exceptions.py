"""Exception types raised across the package.

Everything derives from :class:`LinespecError`, itself a ``ValueError``, so
callers can catch either the package family or individual conditions.
:class:`EstimationFailure` groups the trial-level estimator failures that the
Monte Carlo harness converts into sentinel results instead of aborting a run.
"""


class LinespecError(ValueError):
    """Base class for all errors raised by this package."""


class NonFiniteError(LinespecError):
    """Input contains NaN or Inf entries."""


class NotHermitianError(LinespecError):
    """Matrix expected to be Hermitian is not, beyond tolerance."""


class RankRequestTooLargeError(LinespecError):
    """Requested subspace dimension exceeds what the matrix supports."""


class DimensionMismatchError(LinespecError):
    """Operands have incompatible shapes."""


class DuplicateFrequencyError(LinespecError):
    """Frequency set contains repeated values."""


class FrequencyOutOfRangeError(LinespecError):
    """Frequency outside the half-open unit interval [0, 1)."""


class OutOfRangeError(LinespecError):
    """Scalar argument outside its documented domain."""


class InvalidGroupVectorError(LinespecError):
    """Coherence group vector has a zero entry or is not unit-norm."""


class NotPSDError(LinespecError):
    """Matrix expected to be positive semidefinite is not."""


class InvalidConfigError(LinespecError):
    """Scenario configuration violates its invariants."""


class SubarrayTooLargeError(LinespecError):
    """Subarray length exceeds the number of sensors."""


class EstimationFailure(LinespecError):
    """Base class for trial-level estimator failures (sentinel-able)."""


class DegenerateSubspaceError(EstimationFailure):
    """Shift-invariance system is rank deficient; rotation cannot be solved."""


class InsufficientMinimaError(EstimationFailure):
    """Spectrum has fewer local minima than requested sources."""


class CardinalityMismatchError(LinespecError):
    """Frequency sets being compared have different sizes."""


class SingleFrequencyError(LinespecError):
    """Separation is undefined for fewer than two frequencies."""


class DegenerateGapError(LinespecError):
    """Singular-value (or eigenvalue) gap is zero; bound undefined."""


class NotPositiveDefiniteError(LinespecError):
    """Required matrix is numerically singular; bound preconditions fail."""


class TooFewSnapshotsError(LinespecError):
    """Snapshot count below the bound's stated threshold."""


class DimensionTooSmallError(LinespecError):
    """Array (or subarray) too short for the requested source count."""


class StructureMismatchError(LinespecError):
    """Coherence structure inconsistent with the supplied covariance."""


class UnknownPresetError(LinespecError):
    """Experiment preset name not recognized."""


class NonPositiveDataError(LinespecError):
    """Log-log fit requires strictly positive coordinates."""
