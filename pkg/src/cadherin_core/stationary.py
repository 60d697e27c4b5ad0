# src/cadherin_core/stationary.py
# -*- coding: utf-8 -*-
"""
Стационарные решения: семейство с постоянным u = C и нормированная задача
(rho - v)(a0 + a1 v)(1 - v) - eps v = 0 с выбором допустимого корня в (0, rho].
"""
from __future__ import annotations

import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import brentq

from .exceptions import NegativeInput, NoAdmissibleRoot
from .model import Params, binding_equilibrium, reaction

logger = logging.getLogger(__name__)

DEFAULT_ROOT_TOL = 1e-15
# Предел расширения скобок для внешних корней.
_MAX_BRACKET_DOUBLINGS = 200


class StationaryPair(BaseModel):
    """Пространственно-постоянное стационарное состояние (u, v) = (C, v)."""
    model_config = ConfigDict(frozen=True)

    u_const: float = Field(..., ge=0.0, description="Постоянная плотность свободных частиц C.")
    v_const: float = Field(..., ge=0.0, description="Постоянная плотность связанных частиц.")


class CubicRootReport(BaseModel):
    """Все вещественные корни нормированного кубического уравнения и выбранный допустимый корень."""
    model_config = ConfigDict(frozen=True)

    epsilon: float
    roots: List[float] = Field(..., description="Вещественные корни по возрастанию.")
    admissible: Optional[float] = Field(None, description="Корень в (0, rho].")
    residual: float = Field(..., description="|левая часть уравнения| в допустимом корне.")
    warnings: List[str] = Field(default_factory=list)


def stationary_cubic(p: Params) -> Polynomial:
    """Многочлен (rho - v)(a0 + a1 v)(1 - v) - eps v."""
    return (
        Polynomial([p.rho, -1.0])
        * Polynomial([p.a0, p.a1])
        * Polynomial([1.0, -1.0])
        - Polynomial([0.0, p.epsilon])
    )


def _factored_cubic(p: Params):
    # Факторизованная форма обращается в точный ноль в корнях при eps = 0.
    def f(v: float) -> float:
        return (p.rho - v) * (p.a0 + p.a1 * v) * (1.0 - v) - p.epsilon * v
    return f


def v_of_constant_u(C: float, p: Params) -> StationaryPair:
    """
    Для постоянного u = C возвращает v из Q(C, v) = 0 (ветвь со знаком плюс).
    Ветвь со знаком минус дает отрицательное v и отбрасывается.
    """
    if C < 0.0:
        raise NegativeInput(f"C must be nonnegative, got {C}")
    if C == 0.0:
        return StationaryPair(u_const=0.0, v_const=0.0)
    _, v = binding_equilibrium(C, p)
    return StationaryPair(u_const=float(C), v_const=float(v))


def mass_closure(C: float, p: Params) -> float:
    """Невязка Q(C, 1 - C): нуль ровно тогда, когда пара (C, 1 - C) стационарна при |Omega| = 1."""
    return float(reaction(C, 1.0 - C, p))


def _bracketed_root(p: Params, a: float, b: float, tol: float) -> float:
    """brentq на [a, b] и один шаг Ньютона, если он уменьшает невязку и не покидает скобку."""
    f = _factored_cubic(p)
    fa, fb = f(a), f(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if fa * fb > 0.0:
        # Корень совпал с концом скобки с точностью до округления.
        return a if abs(fa) <= abs(fb) else b
    root = brentq(f, a, b, xtol=tol, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    slope = stationary_cubic(p).deriv()(root)
    if slope != 0.0:
        polished = root - f(root) / slope
        if min(a, b) <= polished <= max(a, b) and abs(f(polished)) < abs(f(root)):
            root = polished
    return float(root)


def _left_root(p: Params, tol: float) -> float:
    # f(-a0/a1) = eps a0 / a1 >= 0, а при v -> -inf многочлен уходит в -inf.
    f = _factored_cubic(p)
    right = -p.a0 / p.a1
    width = 1.0
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        left = right - width
        if f(left) < 0.0:
            return _bracketed_root(p, left, right, tol)
        width *= 2.0
    raise NoAdmissibleRoot(f"failed to bracket the negative root for eps={p.epsilon}")


def _right_root(p: Params, tol: float) -> float:
    # f(1) = -eps <= 0, а при v -> +inf многочлен уходит в +inf.
    f = _factored_cubic(p)
    left = 1.0
    width = 1.0
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        right = left + width
        if f(right) > 0.0:
            return _bracketed_root(p, left, right, tol)
        width *= 2.0
    raise NoAdmissibleRoot(f"failed to bracket the root above 1 for eps={p.epsilon}")


def normalized_stationary(p: Params, tol: float = DEFAULT_ROOT_TOL) -> CubicRootReport:
    """
    Находит три вещественных корня нормированного кубического уравнения и выбирает
    допустимый корень в (0, rho]. Скобки: [0, rho] для допустимого корня,
    (-inf, -a0/a1] и [1, +inf) для двух других.
    """
    f = _factored_cubic(p)
    if not f(0.0) > 0.0 or f(p.rho) > 0.0:
        raise NoAdmissibleRoot(
            f"no sign change on [0, rho] for rho={p.rho}, a0={p.a0}, a1={p.a1}, eps={p.epsilon}"
        )

    middle = _bracketed_root(p, 0.0, p.rho, tol)
    roots = sorted([_left_root(p, tol), middle, _right_root(p, tol)])

    candidates = [r for r in roots if 0.0 < r <= p.rho]
    warnings: List[str] = []
    if not candidates:
        raise NoAdmissibleRoot(f"no root in (0, rho] for eps={p.epsilon}: roots={roots}")
    if len(candidates) > 1:
        message = f"DegenerateRootPattern: {len(candidates)} roots in (0, rho]={candidates}, the smallest is selected"
        logger.warning(message)
        warnings.append(message)
    admissible = min(candidates)

    report = CubicRootReport(
        epsilon=p.epsilon,
        roots=roots,
        admissible=admissible,
        residual=float(abs(f(admissible))),
        warnings=warnings,
    )
    logger.debug("Stationary roots for eps=%.17g: %s", p.epsilon, report.roots)
    return report


def sweep_epsilon(p: Params, eps_grid: Sequence[float], tol: float = DEFAULT_ROOT_TOL) -> List[CubicRootReport]:
    """
    Развертка по eps: траектории трех корней. Допустимый корень должен
    монотонно убывать от rho к нулю; нарушение монотонности логируется.
    """
    eps_values = [float(e) for e in eps_grid]
    if any(e < 0.0 for e in eps_values):
        raise ValueError("eps_grid must be nonnegative")
    if any(b < a for a, b in zip(eps_values, eps_values[1:])):
        raise ValueError("eps_grid must be ascending")

    reports = [normalized_stationary(p.with_epsilon(e), tol=tol) for e in eps_values]
    for prev, curr in zip(reports, reports[1:]):
        if curr.admissible > prev.admissible:
            logger.warning(
                "Admissible root increased along the eps sweep: %.17g -> %.17g (eps %.17g -> %.17g)",
                prev.admissible, curr.admissible, prev.epsilon, curr.epsilon,
            )
    return reports


def cubic_profile(p: Params, v_values: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Значения (rho - v)(a0 + a1 v)(1 - v) и прямой eps v на заданных точках."""
    v = np.asarray(v_values, dtype=float)
    polynomial = (p.rho - v) * (p.a0 + p.a1 * v) * (1.0 - v)
    return polynomial, p.epsilon * v
