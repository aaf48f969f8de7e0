"""Exception hierarchy; each class carries the CLI exit code it maps to."""


class ScrubError(Exception):
    exit_code = 5


class InputError(ScrubError):
    exit_code = 2


class SchemaError(InputError):
    pass


class ConfigurationError(ScrubError):
    exit_code = 3


class DegenerateDataError(ScrubError):
    exit_code = 4


class TrainingError(DegenerateDataError):
    pass


class DegenerateCleaningError(DegenerateDataError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ContractError(ScrubError):
    """Internal invariant or calling-contract violation."""
    exit_code = 5


class UndefinedMetricError(ContractError):
    """A metric with no defined value, e.g. AUC when only one class is present."""
