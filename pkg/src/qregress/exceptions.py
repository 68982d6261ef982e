"""Exception and warning types shared across the package.

The CLI maps these onto its stable exit codes, so the distinctions matter:
data ingestion problems, training divergence, model/data mismatches, and
malformed report inputs are all separately catchable.
"""


class QregressError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(QregressError, ValueError):
    """Shape or arity of an input does not match what the operation needs."""


class ParameterError(QregressError, ValueError):
    """A parameter or sample is non-finite, degenerate, or otherwise unusable."""


class DegenerateStateError(QregressError, ValueError):
    """A quantum state has zero norm, so expectation values are undefined."""


class FeatureRangeError(QregressError, ValueError):
    """A feature value lies outside the unit interval required for encoding."""


class SchemaError(QregressError, ValueError):
    """An input table is missing a required column or has a malformed header."""


class RowError(QregressError, ValueError):
    """A data row could not be parsed; the message names the line number."""


class GapError(QregressError, ValueError):
    """The date column has missing days; interpolation is not supported."""


class DegenerateScaleError(QregressError, ValueError):
    """A column is constant, so min-max scaling is undefined."""


class SplitError(QregressError, ValueError):
    """A train/test split would leave one side empty."""


class FetchError(QregressError, IOError):
    """A remote or local data source could not be read.

    ``status`` carries the HTTP status code when one was received, else None.
    """

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class DivergenceError(QregressError, ArithmeticError):
    """Training produced a non-finite cost.

    ``iteration`` names the first iteration at which the cost was non-finite.
    """

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


class ModelMismatchError(QregressError, ValueError):
    """A serialized model does not match the data it is being applied to."""


class ReportInputError(QregressError, ValueError):
    """A prediction file handed to the comparison report is malformed."""


class DataConsistencyWarning(UserWarning):
    """Rows where deaths + recovered exceed confirmed were kept, flagged."""


class EncodingRangeWarning(UserWarning):
    """A feature exceeded the range the encoding is faithful for.

    Computation proceeds; the warning records that truncation or clamping
    may distort the encoded value.
    """


class DegeneratePhaseWarning(UserWarning):
    """A neuron's pre-activation sum was exactly zero; its phase is undefined.

    The phase is taken as 0 and gradient contributions through it are
    suppressed for the affected step.
    """
