# src/cadherin_core/diagnostics.py
# -*- coding: utf-8 -*-
"""
Скалярные наблюдаемые расчета, исследование сходимости к стационарному
значению v1 и регрессия показателя экспоненциального затухания.
"""
from __future__ import annotations

import logging
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydField

from .exceptions import InsufficientData, TargetNotReached
from .grid import Field, integrate

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e-3
MIN_FIT_SAMPLES = 10
ERROR_CURVES = ("err_max", "err_min", "err_mean")


class DiagnosticsSeries(BaseModel):
    """Временные ряды наблюдаемых, записываемые на каждом шаге."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    mass: np.ndarray
    u_min: np.ndarray
    u_max: np.ndarray
    v_min: np.ndarray
    v_max: np.ndarray
    v_m: np.ndarray = PydField(..., description="Срединное значение (max v + min v) / 2.")
    v_avg: np.ndarray = PydField(..., description="Пространственное среднее v.")

    def __len__(self) -> int:
        return len(self.times)


class DiagnosticsRecorder:
    """Накопитель наблюдаемых по шагам; превращается в DiagnosticsSeries в конце расчета."""

    def __init__(self):
        self._rows: List[Tuple[float, ...]] = []

    def record(self, t: float, u: Field, v: Field) -> Tuple[float, ...]:
        v_min, v_max = float(np.min(v.values)), float(np.max(v.values))
        row = (
            float(t),
            integrate(u) + integrate(v),
            float(np.min(u.values)),
            float(np.max(u.values)),
            v_min,
            v_max,
            mean_value(v),
            integrate(v) / v.grid.area,
        )
        self._rows.append(row)
        return row

    def to_series(self) -> DiagnosticsSeries:
        columns = np.array(self._rows, dtype=float).reshape(-1, 8).T
        names = ("times", "mass", "u_min", "u_max", "v_min", "v_max", "v_m", "v_avg")
        return DiagnosticsSeries(**{name: col.copy() for name, col in zip(names, columns)})


class ConvergenceSeries(BaseModel):
    """Три кривые ошибок относительно v1 и момент пересечения порога."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    times: np.ndarray
    err_max: np.ndarray
    err_min: np.ndarray
    err_mean: np.ndarray
    v1: float
    threshold: float
    stop_time: Optional[float] = None

    @property
    def reached(self) -> bool:
        return self.stop_time is not None

    def combined(self) -> np.ndarray:
        return np.maximum(np.maximum(self.err_max, self.err_min), self.err_mean)


class RateFit(BaseModel):
    """Аффинная регрессия log(ошибки) по времени."""
    model_config = ConfigDict(frozen=True)

    slope: float
    intercept: float
    residual_std: float
    n_samples: int
    window: Tuple[float, float]


def mean_value(v: Union[Field, np.ndarray]) -> float:
    """Срединное значение (max + min) / 2 по ячейкам, а не пространственное среднее."""
    values = v.values if isinstance(v, Field) else np.asarray(v)
    return 0.5 * (float(np.max(values)) + float(np.min(values)))


def convergence_errors(v_max: float, v_min: float, v1: float) -> Tuple[float, float, float]:
    """(|v1 - max v|, |v1 - min v|, |v1 - v_m|) для одного момента времени."""
    return abs(v1 - v_max), abs(v1 - v_min), abs(v1 - mean_value(np.array([v_max, v_min])))


def convergence_study(
    series: DiagnosticsSeries,
    v1: float,
    threshold: float = DEFAULT_THRESHOLD,
    raise_on_miss: bool = False,
) -> ConvergenceSeries:
    """
    Строит три кривые ошибок и находит первый момент, когда максимум из них
    меньше порога. Непересечение порога - не ошибка, если не задан raise_on_miss.
    """
    if threshold <= 0.0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    err_max = np.abs(v1 - series.v_max)
    err_min = np.abs(v1 - series.v_min)
    err_mean = np.abs(v1 - series.v_m)
    combined = np.maximum(np.maximum(err_max, err_min), err_mean)
    below = np.flatnonzero(combined < threshold)
    stop_time = float(series.times[below[0]]) if below.size else None

    result = ConvergenceSeries(
        times=np.asarray(series.times, dtype=float).copy(),
        err_max=err_max,
        err_min=err_min,
        err_mean=err_mean,
        v1=float(v1),
        threshold=float(threshold),
        stop_time=stop_time,
    )
    if stop_time is None:
        message = (
            f"errors vs v1={v1:.17g} stayed above {threshold:g} up to t={float(series.times[-1]):.6g} "
            f"(final max error {float(combined[-1]):.3e})"
        )
        if raise_on_miss:
            raise TargetNotReached(message)
        logger.warning("TargetNotReached: %s", message)
    return result


def exponential_rate_fit(
    times: np.ndarray,
    errors: np.ndarray,
    window: Optional[Tuple[float, float]] = None,
) -> RateFit:
    """
    Аффинная аппроксимация log(error) = slope * t + intercept методом наименьших
    квадратов на окне [t_a, t_b]. Нулевые и неконечные значения отбрасываются.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    t_a, t_b = window
    mask = (times >= t_a) & (times <= t_b) & np.isfinite(errors) & (errors > 0.0)
    n_samples = int(np.count_nonzero(mask))
    if n_samples < MIN_FIT_SAMPLES:
        raise InsufficientData(f"{n_samples} positive samples in window [{t_a:g}, {t_b:g}], need {MIN_FIT_SAMPLES}")

    t = times[mask]
    log_err = np.log(errors[mask])
    slope, intercept = np.polyfit(t, log_err, 1)
    residuals = log_err - (slope * t + intercept)
    return RateFit(
        slope=float(slope),
        intercept=float(intercept),
        residual_std=float(np.std(residuals)),
        n_samples=n_samples,
        window=(float(t_a), float(t_b)),
    )


def default_fit_window(conv: ConvergenceSeries) -> Tuple[float, float]:
    """Окно после переходного процесса: [0.2 * t_stop, t_stop], либо весь расчет без t_stop."""
    end = conv.stop_time if conv.stop_time is not None else float(conv.times[-1])
    return (0.2 * end, end)


def fit_all(conv: ConvergenceSeries, window: Optional[Tuple[float, float]] = None) -> Dict[str, RateFit]:
    """Применяет exponential_rate_fit к каждой из трех кривых; кривые без данных пропускаются."""
    window = window or default_fit_window(conv)
    fits: Dict[str, RateFit] = {}
    for name in ERROR_CURVES:
        try:
            fits[name] = exponential_rate_fit(conv.times, getattr(conv, name), window)
        except InsufficientData as e:
            logger.warning("Rate fit skipped for %s: %s", name, e)
    return fits
