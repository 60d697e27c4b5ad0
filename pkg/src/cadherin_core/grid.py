# src/cadherin_core/grid.py
# -*- coding: utf-8 -*-
"""
Равномерная ячеечно-центрированная сетка на единичном квадрате, скалярные поля,
дискретный лапласиан с однородным условием Неймана, квадратура и начальные данные.
"""
from __future__ import annotations

import logging
import re
from functools import lru_cache
from typing import Callable, Tuple, Union

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field as PydField, model_validator

from .exceptions import ShapeMismatch, UnknownBuiltin

logger = logging.getLogger(__name__)

SINE_MODE_V0 = "sine-mode-v0"
SINE_MODE_U0 = "sine-mode-u0"
# Имена из описания командной строки; указывают на те же функции.
BUILTIN_ALIASES = {"paper-fig2-v0": SINE_MODE_V0, "paper-fig2-u0": SINE_MODE_U0}
_CONSTANT_PATTERN = re.compile(r"^constant[(:]\s*([-+0-9.eE]+)\s*\)?$")


class Grid(BaseModel):
    """Сетка nx x ny ячеек на Omega = [0, 1]^2, |Omega| = 1."""
    model_config = ConfigDict(frozen=True)

    nx: int = PydField(..., ge=3, description="Число ячеек по x.")
    ny: int = PydField(..., ge=3, description="Число ячеек по y.")

    @property
    def hx(self) -> float:
        return 1.0 / self.nx

    @property
    def hy(self) -> float:
        return 1.0 / self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def area(self) -> float:
        return 1.0

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """Координаты центров ячеек (X, Y) формы (nx, ny), индекс i идет по x."""
        x = (np.arange(self.nx) + 0.5) * self.hx
        y = (np.arange(self.ny) + 0.5) * self.hy
        return np.meshgrid(x, y, indexing="ij")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        """Разбирает строку вида '128x128'."""
        match = re.fullmatch(r"\s*(\d+)\s*[xX]\s*(\d+)\s*", text)
        if not match:
            raise ValueError(f"grid must look like NXxNY, got {text!r}")
        return cls(nx=int(match.group(1)), ny=int(match.group(2)))


class Field(BaseModel):
    """Скалярное поле в центрах ячеек. Значения копируются и замораживаются."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    values: np.ndarray

    @model_validator(mode="after")
    def _check_values(self) -> "Field":
        if self.values.shape != self.grid.shape:
            raise ShapeMismatch(f"field shape {self.values.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("field values must be finite")
        return self

    @classmethod
    def of(cls, grid: Grid, values: np.ndarray) -> "Field":
        data = np.array(values, dtype=float, copy=True)
        data.setflags(write=False)
        return cls(grid=grid, values=data)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "Field":
        return cls.of(grid, np.full(grid.shape, float(value)))


def laplacian_neumann(f: Field, sigma: float = 1.0) -> Field:
    """
    sigma * 5-точечный лапласиан с зеркальными фиктивными ячейками (du/dnu = 0).
    Сумма результата по ячейкам равна нулю: оператор консервативен.
    """
    return Field.of(f.grid, sigma * apply_laplacian(f.values, f.grid))


def apply_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Тот же оператор на голом массиве (без sigma)."""
    padded = np.pad(values, 1, mode="edge")
    center = padded[1:-1, 1:-1]
    d_xx = (padded[2:, 1:-1] - 2.0 * center + padded[:-2, 1:-1]) / grid.hx ** 2
    d_yy = (padded[1:-1, 2:] - 2.0 * center + padded[1:-1, :-2]) / grid.hy ** 2
    return d_xx + d_yy


def _neumann_1d(n: int, h: float) -> sp.csr_matrix:
    main = np.full(n, -2.0)
    main[0] = main[-1] = -1.0
    off = np.ones(n - 1)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr") / h ** 2


@lru_cache(maxsize=16)
def _laplacian_matrix_cached(nx: int, ny: int) -> sp.csr_matrix:
    d_x = _neumann_1d(nx, 1.0 / nx)
    d_y = _neumann_1d(ny, 1.0 / ny)
    matrix = sp.kron(d_x, sp.identity(ny), format="csr") + sp.kron(sp.identity(nx), d_y, format="csr")
    logger.debug("Assembled Neumann Laplacian for %dx%d grid (nnz=%d)", nx, ny, matrix.nnz)
    return matrix.tocsr()


def laplacian_matrix(grid: Grid) -> sp.csr_matrix:
    """Разреженная матрица того же оператора для поля, развернутого в порядке C (индекс i*ny + j)."""
    return _laplacian_matrix_cached(grid.nx, grid.ny)


def integrate(f: Union[Field, np.ndarray], grid: Grid = None) -> float:
    """Квадратура средней точки hx * hy * sum(values)."""
    if isinstance(f, Field):
        return float(f.grid.cell_area * np.sum(f.values))
    if grid is None:
        raise ValueError("grid is required when integrating a bare array")
    return float(grid.cell_area * np.sum(f))


def spatial_average(f: Field) -> float:
    """Пространственное среднее (масса / |Omega|); не путать со срединным значением v_m."""
    return integrate(f) / f.grid.area


def sine_mode_v0(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """v0(x, y) = 0.4 + 0.2 sin(3 pi x) cos(3 pi y)."""
    return 0.4 + 0.2 * np.sin(3.0 * np.pi * x) * np.cos(3.0 * np.pi * y)


def sine_mode_u0(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """u0 = 1 - v0, так что u0 + v0 = 1 поточечно."""
    return 1.0 - sine_mode_v0(x, y)


_BUILTINS = {
    SINE_MODE_V0: sine_mode_v0,
    SINE_MODE_U0: sine_mode_u0,
}


def sample_initial(which: Union[str, Callable[[np.ndarray, np.ndarray], np.ndarray]], g: Grid) -> Field:
    """
    Значения начальной функции в центрах ячеек. `which` - имя встроенной функции
    ('sine-mode-v0', 'sine-mode-u0' и их синонимы из BUILTIN_ALIASES,
    'constant(c)' или 'constant:c') либо вызываемый объект f(x, y).
    """
    x, y = g.cell_centers()
    if callable(which):
        return Field.of(g, np.broadcast_to(which(x, y), g.shape))
    name = which.strip()
    name = BUILTIN_ALIASES.get(name, name)
    if name in _BUILTINS:
        return Field.of(g, _BUILTINS[name](x, y))
    match = _CONSTANT_PATTERN.match(name)
    if match:
        return Field.constant(g, float(match.group(1)))
    raise UnknownBuiltin(f"unknown initial data {which!r}; expected one of {sorted(_BUILTINS)} or constant(c)")
