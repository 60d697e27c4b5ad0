"""
Централизованное определение кодов выхода для приложения.
"""
from enum import IntEnum


class ErrorCodes(IntEnum):
    SUCCESS = 0
    GENERAL_ERROR = 1
    CONFIGURATION_ERROR = 2
    PARAMETER_ERROR = 3
    MISSING_DEPENDENCY = 4
    NUMERICAL_ERROR = 5
    INVALID_INPUT = 6
    FILE_NOT_FOUND = 7
    HYPOTHESIS_VIOLATED = 8
    NO_CONVERGENCE = 9
    VERIFICATION_FAILED = 10
