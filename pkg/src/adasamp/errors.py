"""Exception types raised across the package."""


class NonFiniteInputError(ValueError):
    """An input array contains NaN or infinite entries."""


class ZeroSumError(ValueError):
    """A weight vector sums to zero and cannot be normalized."""


class NonPositiveInputError(ValueError):
    """An input required to be strictly positive has a zero or negative entry."""


class SupportMismatchError(ValueError):
    """x places mass where y has none, so the divergence is infinite."""


class InvalidAlphaError(ValueError):
    """The floor parameter alpha lies outside (0, 1]."""


class DimensionMismatchError(ValueError):
    """Vectors in a sequence do not share the same length."""


class ZeroProbabilityError(ValueError):
    """A client with positive mass or an observed client has probability zero."""


class DegenerateHorizonError(ValueError):
    """The horizon is too short to build an expert learning-rate grid."""


class EmptyPretrainError(ValueError):
    """No client responded during the pre-training phase."""


class ExhaustedMassError(ValueError):
    """The already-chosen clients hold essentially all probability mass."""


class SelectionSizeError(ValueError):
    """More distinct clients requested than exist."""


class MissingLocalError(ValueError):
    """A selected client has no local update in the provided set."""


class MalformedCsvError(ValueError):
    """A dataset CSV file could not be parsed."""


class EmptyClientError(ValueError):
    """A partition assigns no rows to some client."""


class TrainingDivergedError(RuntimeError):
    """Training loss became NaN or infinite; partial results are attached."""

    def __init__(self, message, records=None, ledger=None):
        super().__init__(message)
        self.records = records if records is not None else []
        self.ledger = ledger


class ConfigParseError(ValueError):
    """An experiment config file is syntactically invalid."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ConfigValidationError(ValueError):
    """An experiment config has an invalid or unknown field."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
