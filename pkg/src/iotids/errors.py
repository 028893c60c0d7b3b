"""Exception hierarchy. CLI exit codes are attached to the classes."""


class IdsError(Exception):
    exit_code = 2


class DataError(IdsError):
    """Malformed, missing or inconsistent input data."""

    exit_code = 2


class ModelFormatError(DataError):
    """A persisted model or artifact failed version or checksum validation."""


class FeatureMismatchError(DataError):
    pass


class NumericError(IdsError):
    """Non-finite loss or a failed numeric audit."""

    exit_code = 3


class StageError(IdsError):
    """Wraps any failure inside a pipeline stage with the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 2)
