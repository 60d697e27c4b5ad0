# src/cadherin_core/exceptions.py
# -*- coding: utf-8 -*-
"""
Определяет пользовательские исключения для пакета cadherin_core.
"""
from typing import List, Optional


class CoreError(Exception):
    """Базовый класс для исключений в cadherin_core."""
    pass


class ParameterValidationError(CoreError):
    """
    Вызывается, когда набор параметров модели не проходит проверку.
    Содержит полный список найденных нарушений, а не только первое.
    """

    def __init__(self, issues: list):
        self.issues = list(issues)
        kinds = ", ".join(issue.kind for issue in self.issues)
        details = "; ".join(issue.message for issue in self.issues)
        super().__init__(f"Некорректные параметры модели ({kinds}): {details}")

    @property
    def kinds(self) -> List[str]:
        return [issue.kind for issue in self.issues]


class NegativeInput(CoreError):
    """Вызывается, когда на вход подано отрицательное значение там, где ожидается неотрицательное."""
    pass


class NoAdmissibleRoot(CoreError):
    """Вызывается, когда у кубического уравнения нет корня в (0, rho]."""
    pass


class UnknownBuiltin(CoreError):
    """Вызывается для неизвестного имени встроенных начальных данных."""
    pass


class ShapeMismatch(CoreError):
    """Вызывается, когда сетки или временные ряды двух объектов не совпадают."""
    pass


class NumericalError(CoreError):
    """Базовый класс для ошибок численного интегрирования."""
    pass


class LinearSolveDiverged(NumericalError):
    """Вызывается, когда метод сопряженных градиентов не сошелся за отведенное число итераций."""

    def __init__(self, message: str, iterations: Optional[int] = None):
        super().__init__(message)
        self.iterations = iterations


class NonFiniteState(NumericalError):
    """Вызывается, когда в полях появились NaN или бесконечности."""
    pass


class HypothesisViolated(CoreError):
    """Вызывается, когда начальные данные выходят за инвариантную область [0, lambda] x [0, mu]."""

    def __init__(self, message: str, violations: Optional[List[str]] = None):
        super().__init__(message)
        self.violations = violations or []


class NoConvergence(CoreError):
    """Вызывается, когда итерации последовательных приближений не сходятся."""
    pass


class TargetNotReached(CoreError):
    """Вызывается, когда ошибки относительно стационарного значения не опустились ниже порога."""
    pass


class InsufficientData(CoreError):
    """Вызывается, когда в окне регрессии слишком мало точек."""
    pass
