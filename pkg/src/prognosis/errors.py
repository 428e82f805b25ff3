"""Exception hierarchy.

The three mid-level groups map onto the CLI exit codes: ArgumentError -> 2,
DataError -> 3, NumericError -> 4.
"""


class PrognosisError(Exception):
    """Base class for all library errors."""


class ArgumentError(PrognosisError):
    """Invalid argument or configuration."""


class DataError(PrognosisError):
    """Unusable input data."""


class NumericError(PrognosisError):
    """Training or numerical failure."""


class BoundsError(ArgumentError):
    """Lower/upper input bounds are inconsistent or violated."""


class DimensionError(ArgumentError):
    """Array shape does not match the expected arity."""


class UnknownBenchmarkError(ArgumentError):
    """Requested benchmark function is not registered."""


class SingularFitError(NumericError):
    """Least-squares basis matrix is rank deficient."""


class ConditioningError(NumericError):
    """Correlation matrix stayed indefinite after nugget escalation."""


class DegenerateOutputError(DataError):
    """Response values have (numerically) zero variance."""


class IsolationError(NumericError):
    """All local weights underflowed; the query point is isolated."""


class CompetitionError(NumericError):
    """Every model candidate in a competition failed to train."""


class StudyError(NumericError):
    """Too many runs of a repeated study failed."""


class ExtrapolationWarning(UserWarning):
    """A local-error query lies outside the training bounds."""
