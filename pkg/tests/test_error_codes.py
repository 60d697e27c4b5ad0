import pytest

from error_codes import ErrorCodes
from error_handler import (
    CadherinError,
    ConfigurationError,
    ConvergenceError,
    HypothesisError,
    InvalidInputError,
    MissingDependencyError,
    NumericalError,
    ParameterError,
    VerificationFailedError,
    exit_with_error,
)


def test_file_not_found_error_code():
    assert ErrorCodes.FILE_NOT_FOUND.value == 7
    assert ErrorCodes.FILE_NOT_FOUND.name == "FILE_NOT_FOUND"


def test_codes_are_unique_and_contiguous():
    assert sorted(code.value for code in ErrorCodes) == list(range(11))


@pytest.mark.parametrize("error_class,code", [
    (CadherinError, ErrorCodes.GENERAL_ERROR),
    (ConfigurationError, ErrorCodes.CONFIGURATION_ERROR),
    (ParameterError, ErrorCodes.PARAMETER_ERROR),
    (MissingDependencyError, ErrorCodes.MISSING_DEPENDENCY),
    (NumericalError, ErrorCodes.NUMERICAL_ERROR),
    (InvalidInputError, ErrorCodes.INVALID_INPUT),
    (HypothesisError, ErrorCodes.HYPOTHESIS_VIOLATED),
    (ConvergenceError, ErrorCodes.NO_CONVERGENCE),
    (VerificationFailedError, ErrorCodes.VERIFICATION_FAILED),
])
def test_exit_with_error_uses_class_code(error_class, code):
    assert exit_with_error(error_class("сообщение")) == code.value


def test_missing_file_maps_to_file_not_found():
    assert exit_with_error(FileNotFoundError("manifest.txt")) == ErrorCodes.FILE_NOT_FOUND.value


def test_unexpected_error_is_general():
    assert exit_with_error(RuntimeError("boom")) == ErrorCodes.GENERAL_ERROR.value
