"""Exception taxonomy for the perfmodel toolkit.

User-facing entry points (CLI, HTTP service) map ``InputError`` subclasses to
usage-error exits / 4xx responses and everything else to internal errors.
"""


class PerfModelError(Exception):
    """Base class for all toolkit errors."""


class InputError(PerfModelError):
    """Invalid user input: bad files, bad columns, bad parameters."""


class SchemaError(InputError):
    """A declared column is missing or a column has the wrong role."""


class ParseError(InputError):
    """A cell could not be parsed; message carries row and column."""


class EmptyDataError(InputError):
    """File or sample set contains no usable data."""


class UnknownColumnError(InputError):
    """A referenced counter/target/feature name does not exist."""


class DimensionError(InputError):
    """Vector/matrix shapes do not line up."""


class DomainError(InputError):
    """A value is outside its valid domain (zero divisor, f <= 0, ...)."""


class StateError(PerfModelError):
    """Operation applied to an object in the wrong state."""


class SplitError(InputError):
    """Train/test split would produce an empty side."""


class SelectionEmptyError(PerfModelError):
    """No counter passed the relevance screen; lower the threshold."""


class UnderdeterminedError(InputError):
    """Too few samples for the number of regressors."""


class DegenerateInputError(InputError):
    """Input carries no usable variation (all-equal values, zero variance)."""


class ValidationError(InputError):
    """Hyperparameter or specification validation failed."""


class NumericError(PerfModelError):
    """A linear system was singular or too ill-conditioned to solve."""


class UnsupportedMethodError(InputError):
    """The requested operation is not defined for this method."""


class ModelFitError(PerfModelError):
    """A model failed to fit; carries the target metric identity."""

    def __init__(self, target: str, cause: Exception):
        super().__init__(f"fitting model for {target!r} failed: {cause}")
        self.target = target
        self.cause = cause
