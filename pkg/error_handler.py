import logging
from error_codes import ErrorCodes

logger = logging.getLogger(__name__)


class CadherinError(Exception):
    """
    Базовый класс для всех пользовательских исключений приложения.
    Содержит сообщение об ошибке и соответствующий код выхода.
    """
    exit_code = ErrorCodes.GENERAL_ERROR

    def __init__(self, message: str):
        super().__init__(message)


class ConfigurationError(CadherinError):
    """Исключение, связанное с ошибками конфигурации."""
    exit_code = ErrorCodes.CONFIGURATION_ERROR


class ParameterError(CadherinError):
    """Параметры модели не прошли проверку."""
    exit_code = ErrorCodes.PARAMETER_ERROR


class MissingDependencyError(CadherinError):
    """Исключение, связанное с отсутствующими зависимостями."""
    exit_code = ErrorCodes.MISSING_DEPENDENCY


class NumericalError(CadherinError):
    """Сбой численного метода: расходимость линейного решателя, NaN в полях."""
    exit_code = ErrorCodes.NUMERICAL_ERROR


class InvalidInputError(CadherinError):
    """Исключение, связанное с некорректным вводом."""
    exit_code = ErrorCodes.INVALID_INPUT


class HypothesisError(CadherinError):
    """Начальные данные вне инвариантной области."""
    exit_code = ErrorCodes.HYPOTHESIS_VIOLATED


class ConvergenceError(CadherinError):
    """Последовательные приближения не сошлись."""
    exit_code = ErrorCodes.NO_CONVERGENCE


class VerificationFailedError(CadherinError):
    """Хотя бы одна проверка набора verify не прошла."""
    exit_code = ErrorCodes.VERIFICATION_FAILED


def exit_with_error(e: Exception) -> int:
    """
    Логирует исключение и возвращает соответствующий код выхода.

    Args:
        e (Exception): Экземпляр исключения.

    Returns:
        int: Код выхода, соответствующий типу ошибки.
    """
    if isinstance(e, CadherinError):
        logger.error("%s: %s", type(e).__name__, e)
        return e.exit_code.value
    if isinstance(e, FileNotFoundError):
        logger.error("File not found: %s", e)
        return ErrorCodes.FILE_NOT_FOUND.value
    logger.error("Unexpected error: %s", e)
    return ErrorCodes.GENERAL_ERROR.value
