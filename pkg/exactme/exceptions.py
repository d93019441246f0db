"""Licensed under GPLv3, see https://www.gnu.org/licenses/"""

from .core import DataType


class ExactMEError(DataType, Exception):
    message: str

    def __init__(self, message: str, **kwargs: object) -> None:
        DataType.__init__(self, message=message, **kwargs)
        Exception.__init__(self, message)


class InvalidInputError(ExactMEError):
    pass


class DomainError(ExactMEError):
    pass


class InvalidConfigurationError(ExactMEError):
    pass


class PreconditionError(ExactMEError):
    pass


class BMUndefinedError(ExactMEError):
    pass


class NumericalFailureError(ExactMEError):
    estimate: float

    def __init__(self, message: str, estimate: float) -> None:
        super().__init__(message, estimate=estimate)


class InstabilityError(ExactMEError):
    step: int
    norm: float

    def __init__(self, message: str, step: int, norm: float) -> None:
        super().__init__(message, step=step, norm=norm)


class CutoffOverflowError(ExactMEError):
    population: float

    def __init__(self, message: str, population: float) -> None:
        super().__init__(message, population=population)


class BridgingError(ExactMEError):
    pass


class PoleError(ExactMEError):
    pass


class ScenarioError(ExactMEError):
    diagnostics: list[str]

    def __init__(self, diagnostics: list[str]) -> None:
        super().__init__("\n".join(diagnostics), diagnostics=diagnostics)


VALIDATION_ERRORS: tuple[type[ExactMEError], ...] = (
    ScenarioError,
    InvalidInputError,
    DomainError,
    InvalidConfigurationError,
    PreconditionError,
    BMUndefinedError,
)

NUMERICAL_ERRORS: tuple[type[ExactMEError], ...] = (
    NumericalFailureError,
    InstabilityError,
    CutoffOverflowError,
    BridgingError,
    PoleError,
)


class SysExit(Exception):  # noqa: N818

    code: int

    def __init__(self, code: int) -> None:
        self.code = code
        super().__init__(code)
