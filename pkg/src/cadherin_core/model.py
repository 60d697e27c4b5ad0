# src/cadherin_core/model.py
# -*- coding: utf-8 -*-
"""
Параметры модели адгезии, их проверка, реакционный член Q и производные константы
(границы инвариантной области lambda, mu, константа Липшица k и множитель L).

Q(r, s) = (rho - s)(a0 + a1 s) r - eps s, где r - плотность свободных частиц,
s - плотность связанных. Функция psi(s) = a0 + a1 s отдельно не хранится.
"""
from __future__ import annotations

import logging
import math
from typing import List, Literal, Mapping, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .exceptions import ParameterValidationError

logger = logging.getLogger(__name__)

ValidationMode = Literal["strict", "lenient"]
IssueKind = Literal[
    "NonPositiveParameter",
    "GregariousConditionViolated",
    "RhoOutOfRange",
    "StrictRangeViolated",
    "MissingParameter",
    "InvalidValue",
]

ArrayLike = Union[float, np.ndarray]

PARAMETER_NAMES = ("rho", "sigma", "a0", "a1", "epsilon")
# Допустимые синонимы ключей во входных словарях (CLI использует "eps").
_KEY_ALIASES = {"eps": "epsilon"}


class Params(BaseModel):
    """Пять констант модели. Объект неизменяем после создания."""
    model_config = ConfigDict(frozen=True)

    rho: float = Field(..., gt=0.0, le=1.0, description="Плотность мишеней (безразмерная, вероятностного типа).")
    sigma: float = Field(..., gt=0.0, description="Коэффициент диффузии свободных частиц.")
    a0: float = Field(..., gt=0.0, description="Базовая скорость связывания.")
    a1: float = Field(..., gt=0.0, description="Коэффициент стадного (gregarious) связывания.")
    epsilon: float = Field(..., ge=0.0, description="Скорость отсоединения. Ноль допускается только в стационарных задачах.")

    @model_validator(mode="after")
    def _check_gregarious(self) -> "Params":
        if not self.a0 < self.rho * self.a1:
            raise ValueError(f"a0={self.a0} must be strictly below rho*a1={self.rho * self.a1}")
        return self

    def with_epsilon(self, epsilon: float) -> "Params":
        """Возвращает копию параметров с другим eps (для развертки по eps)."""
        return self.model_copy(update={"epsilon": float(epsilon)})


class ParamIssue(BaseModel):
    """Одно нарушение ограничений на параметры."""
    model_config = ConfigDict(frozen=True)

    kind: IssueKind
    parameter: str
    message: str
    severity: Literal["error", "warning"] = "error"


class DerivedConstants(BaseModel):
    """Константы, выводимые из параметров: границы инвариантной области и константы оценки Коши."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    lambda_: float = Field(..., alias="lambda", description="Верхняя граница для u.")
    mu: float = Field(..., description="Верхняя граница для v.")
    k: float = Field(..., ge=1.0, description="Константа Липшица Q на [0, lambda] x [0, mu], не меньше 1.")
    L: float = Field(..., description="Множитель 4 max(lambda, mu)^2 |Omega| из оценки Гронуолла.")
    domain_area: float = Field(1.0, gt=0.0, description="Мера области |Omega|.")


class BoxCheck(BaseModel):
    """Результат проверки попадания полей в инвариантную область."""
    model_config = ConfigDict(frozen=True)

    ok: bool
    u_min: float
    u_max: float
    v_min: float
    v_max: float
    violations: List[str] = Field(default_factory=list)


def _normalize_raw(raw: Union[Mapping[str, object], Params]) -> dict:
    if isinstance(raw, Params):
        return raw.model_dump()
    normalized = {}
    for key, value in raw.items():
        normalized[_KEY_ALIASES.get(key, key)] = value
    return normalized


def check_params(
    raw: Union[Mapping[str, object], Params],
    mode: ValidationMode = "strict",
    allow_zero_epsilon: bool = False,
) -> Tuple[List[ParamIssue], List[ParamIssue]]:
    """
    Проверяет набор параметров и возвращает (ошибки, предупреждения).

    В строгом режиме каждая константа должна лежать в (0, 1). В мягком режиме
    константы >= 1 дают только предупреждения (эксперимент sine-mode идет с sigma = 1).
    """
    values = _normalize_raw(raw)
    errors: List[ParamIssue] = []
    warnings: List[ParamIssue] = []
    numbers = {}

    for name in PARAMETER_NAMES:
        if name not in values or values[name] is None:
            errors.append(ParamIssue(kind="MissingParameter", parameter=name, message=f"параметр '{name}' не задан"))
            continue
        try:
            number = float(values[name])
        except (TypeError, ValueError):
            errors.append(ParamIssue(kind="InvalidValue", parameter=name, message=f"'{name}'={values[name]!r} не является числом"))
            continue
        if not math.isfinite(number):
            errors.append(ParamIssue(kind="InvalidValue", parameter=name, message=f"'{name}'={number} не конечно"))
            continue
        numbers[name] = number

    for name, number in numbers.items():
        if name == "epsilon" and allow_zero_epsilon and number == 0.0:
            continue
        if number <= 0.0:
            errors.append(ParamIssue(kind="NonPositiveParameter", parameter=name, message=f"'{name}'={number} должен быть > 0"))

    rho = numbers.get("rho")
    if rho is not None and rho > 1.0:
        errors.append(ParamIssue(kind="RhoOutOfRange", parameter="rho", message=f"rho={rho} должен быть <= 1"))

    if all(name in numbers for name in ("rho", "a0", "a1")):
        if not numbers["a0"] < numbers["rho"] * numbers["a1"]:
            errors.append(ParamIssue(
                kind="GregariousConditionViolated",
                parameter="a0",
                message=f"a0={numbers['a0']} должен быть строго меньше rho*a1={numbers['rho'] * numbers['a1']:.17g}",
            ))

    for name, number in numbers.items():
        if number >= 1.0 and not (name == "rho" and number > 1.0):
            issue = ParamIssue(
                kind="StrictRangeViolated",
                parameter=name,
                message=f"'{name}'={number} выходит за строгий диапазон (0, 1)",
                severity="error" if mode == "strict" else "warning",
            )
            (errors if mode == "strict" else warnings).append(issue)

    return errors, warnings


def validate_params(
    raw: Union[Mapping[str, object], Params],
    mode: ValidationMode = "strict",
    allow_zero_epsilon: bool = False,
) -> Params:
    """
    Шлюз для параметров модели: возвращает Params или выбрасывает
    ParameterValidationError со списком всех нарушений.
    """
    errors, warnings = check_params(raw, mode=mode, allow_zero_epsilon=allow_zero_epsilon)
    if errors:
        raise ParameterValidationError(errors)
    for issue in warnings:
        logger.warning("Parameter check (%s mode): %s", mode, issue.message)
    values = _normalize_raw(raw)
    return Params(**{name: float(values[name]) for name in PARAMETER_NAMES})


def reaction(r: ArrayLike, s: ArrayLike, p: Params) -> ArrayLike:
    """Q(r, s) = (rho - s)(a0 + a1 s) r - eps s. Аргументы не обрезаются."""
    return (p.rho - s) * (p.a0 + p.a1 * s) * r - p.epsilon * s


def binding_coefficient(s: ArrayLike, p: Params) -> ArrayLike:
    """Коэффициент A(s) = (rho - s)(a0 + a1 s) = dQ/dr; Q линейна по r."""
    return (p.rho - s) * (p.a0 + p.a1 * s)


def reaction_jacobian(r: ArrayLike, s: ArrayLike, p: Params) -> Tuple[ArrayLike, ArrayLike]:
    """Частные производные (dQ/dr, dQ/ds) в замкнутой форме."""
    d_r = binding_coefficient(s, p)
    d_s = -p.a0 * r - 2.0 * p.a1 * r * s + p.a1 * p.rho * r - p.epsilon
    return d_r, d_s


def lipschitz_constant(p: Params, lam: float, mu: float) -> float:
    """
    Константа Липшица Q на прямоугольнике [0, lam] x [0, mu] для приращений в 1-норме.

    dQ/dr зависит только от s и является вогнутой параболой: максимум модуля
    достигается на концах отрезка или в вершине s* = (rho a1 - a0) / (2 a1).
    dQ/ds билинейна по (r, s), поэтому экстремумы лежат в углах.
    """
    if lam <= 0.0 or mu <= 0.0:
        raise ValueError(f"box must be non-degenerate, got lambda={lam}, mu={mu}")

    s_candidates = [0.0, mu]
    s_star = (p.rho * p.a1 - p.a0) / (2.0 * p.a1)
    if 0.0 < s_star < mu:
        s_candidates.append(s_star)
    d_r_max = max(abs(float(binding_coefficient(s, p))) for s in s_candidates)

    d_s_max = max(
        abs(float(reaction_jacobian(r, s, p)[1]))
        for r in (0.0, lam)
        for s in (0.0, mu)
    )
    return max(d_r_max, d_s_max, 1.0)


def derived_constants(p: Params, domain_area: float = 1.0) -> DerivedConstants:
    """lambda = eps / (a1 rho - a0), mu = sqrt(rho a0 / a1), k >= 1, L = 4 max(lambda, mu)^2 |Omega|."""
    if domain_area <= 0.0:
        raise ValueError(f"domain_area must be positive, got {domain_area}")
    lam = p.epsilon / (p.a1 * p.rho - p.a0)
    mu = math.sqrt(p.rho * p.a0 / p.a1)
    k = lipschitz_constant(p, lam, mu)
    big_l = 4.0 * max(lam, mu) ** 2 * domain_area
    consts = DerivedConstants(lambda_=lam, mu=mu, k=k, L=big_l, domain_area=domain_area)
    logger.debug("Derived constants: %s", consts.model_dump(by_alias=True))
    return consts


def reaction_identity_residual(v: ArrayLike, p: Params) -> ArrayLike:
    """Q(lambda, v) - lambda a1 (mu^2 - v^2): тождественный ноль при любом v."""
    lam = p.epsilon / (p.a1 * p.rho - p.a0)
    mu_sq = p.rho * p.a0 / p.a1
    return reaction(lam, v, p) - lam * p.a1 * (mu_sq - v * v)


def check_invariant_box(
    u: np.ndarray,
    v: np.ndarray,
    consts: DerivedConstants,
    slack: float = 1e-8,
) -> BoxCheck:
    """Проверяет, что 0 <= u <= lambda и 0 <= v <= mu с допуском slack."""
    u_min, u_max = float(np.min(u)), float(np.max(u))
    v_min, v_max = float(np.min(v)), float(np.max(v))
    violations = []
    if u_min < -slack:
        violations.append(f"min u = {u_min:.17g} < 0")
    if u_max > consts.lambda_ + slack:
        violations.append(f"max u = {u_max:.17g} > lambda = {consts.lambda_:.17g}")
    if v_min < -slack:
        violations.append(f"min v = {v_min:.17g} < 0")
    if v_max > consts.mu + slack:
        violations.append(f"max v = {v_max:.17g} > mu = {consts.mu:.17g}")
    return BoxCheck(ok=not violations, u_min=u_min, u_max=u_max, v_min=v_min, v_max=v_max, violations=violations)


def binding_equilibrium(u: ArrayLike, p: Params) -> Tuple[ArrayLike, ArrayLike]:
    """
    Корни квадратного по s уравнения Q(u, s) = 0 при фиксированном u >= 0:
    возвращает (r_low, r_high), r_low <= 0 <= r_high.

    Используется форма без вычитания близких чисел: при beta < 0 верхний корень
    считается как 2 rho a0 u / (sqrt(D) - beta), что корректно и при u = 0.
    """
    u = np.asarray(u, dtype=float)
    beta = u * (p.rho * p.a1 - p.a0) - p.epsilon
    gamma = u * p.rho * p.a0
    sqrt_d = np.sqrt(beta * beta + 4.0 * p.a1 * p.rho * p.a0 * u * u)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_high = np.where(
            beta < 0.0,
            2.0 * gamma / (sqrt_d - beta),
            (beta + sqrt_d) / (2.0 * p.a1 * u),
        )
        r_high = np.where((beta >= 0.0) & (u <= 0.0), 0.0, r_high)
        r_low = np.where(r_high > 0.0, -p.rho * p.a0 / (p.a1 * r_high), -np.inf)
    if r_high.ndim == 0:
        return float(r_low), float(r_high)
    return r_low, r_high
