# src/cadherin_core/evolve.py
# -*- coding: utf-8 -*-
"""
Интегрирование по времени связанной системы
    du/dt - sigma * Laplace(u) = -Q(u, v),   dv/dt = Q(u, v),   du/dnu = 0.

Схема расщепления Ли на шаге dt:
  1. u* из линейной системы (I - dt sigma L + dt A(v^n)) u* = u^n + dt eps v^n,
     A(v) = (rho - v)(a0 + a1 v) >= 0, решается методом сопряженных градиентов;
  2. v^{n+1} из dv/dt = Q(u*, v) с замороженным u*: явный Эйлер или точное
     решение уравнения Риккати;
  3. u^{n+1} = u^n + dt sigma L u* - (v^{n+1} - v^n): u теряет ровно то,
     что получает v, поэтому масса сохраняется с точностью округления.
"""
from __future__ import annotations

import logging
import math
from functools import lru_cache
from typing import List, Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field as PydField, model_validator
from scipy.sparse.linalg import cg

from .diagnostics import DEFAULT_THRESHOLD, DiagnosticsRecorder, DiagnosticsSeries, convergence_errors
from .exceptions import HypothesisViolated, LinearSolveDiverged, NonFiniteState
from .grid import Field, Grid, laplacian_matrix
from .model import DerivedConstants, Params, binding_coefficient, binding_equilibrium, derived_constants, reaction
from .stationary import normalized_stationary

logger = logging.getLogger(__name__)

VScheme = Literal["explicit-euler", "riccati-exact"]
HypothesisPolicy = Literal["warn", "error", "off"]

DEFAULT_CG_RTOL = 1e-10
DEFAULT_CG_MAXITER = 2000
DEFAULT_SNAPSHOT_EVERY = 100


class State(BaseModel):
    """Пара полей (u, v) в момент времени t."""
    model_config = ConfigDict(frozen=True)

    u: Field
    v: Field
    t: float = 0.0

    @model_validator(mode="after")
    def _same_grid(self) -> "State":
        if self.u.grid != self.v.grid:
            raise ValueError("u and v must live on the same grid")
        return self

    @property
    def grid(self) -> Grid:
        return self.u.grid


class StopRule(BaseModel):
    """Остановка, когда max(|v1 - max v|, |v1 - min v|, |v1 - v_m|) < threshold."""
    model_config = ConfigDict(frozen=True)

    threshold: float = PydField(DEFAULT_THRESHOLD, gt=0.0)
    target: Optional[float] = PydField(None, description="v1; если не задан, берется допустимый стационарный корень.")


class RunConfig(BaseModel):
    """Параметры расчета."""
    model_config = ConfigDict(frozen=True)

    params: Params
    grid: Grid
    dt: float = PydField(..., gt=0.0)
    T: float = PydField(..., gt=0.0)
    scheme_v: VScheme = "riccati-exact"
    snapshot_every: int = PydField(DEFAULT_SNAPSHOT_EVERY, ge=1)
    stop_rule: Optional[StopRule] = None
    cg_rtol: float = PydField(DEFAULT_CG_RTOL, gt=0.0)
    cg_maxiter: int = PydField(DEFAULT_CG_MAXITER, ge=1)
    hypothesis_check: HypothesisPolicy = "warn"
    capture_times: Tuple[float, ...] = PydField((), description="Моменты, в которые дополнительно сохраняется снимок (ближайший шаг).")

    @model_validator(mode="after")
    def _check_dt(self) -> "RunConfig":
        if self.dt > self.T:
            raise ValueError(f"dt={self.dt} must not exceed T={self.T}")
        return self

    @property
    def n_steps(self) -> int:
        return max(1, int(math.ceil(self.T / self.dt - 1e-9)))


class Trajectory(BaseModel):
    """Кадры u и v на общей временной сетке (массивы формы (n_times, nx, ny))."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    times: np.ndarray
    u_frames: np.ndarray
    v_frames: np.ndarray

    @model_validator(mode="after")
    def _aligned(self) -> "Trajectory":
        expected = (len(self.times),) + self.grid.shape
        if self.u_frames.shape != expected or self.v_frames.shape != expected:
            raise ValueError(f"frames must have shape {expected}, got {self.u_frames.shape} and {self.v_frames.shape}")
        return self

    def __len__(self) -> int:
        return len(self.times)

    def state(self, index: int) -> State:
        return State(
            u=Field.of(self.grid, self.u_frames[index]),
            v=Field.of(self.grid, self.v_frames[index]),
            t=float(self.times[index]),
        )

    @classmethod
    def from_states(cls, states: List[State]) -> "Trajectory":
        grid = states[0].grid
        return cls(
            grid=grid,
            times=np.array([s.t for s in states], dtype=float),
            u_frames=np.stack([s.u.values for s in states]),
            v_frames=np.stack([s.v.values for s in states]),
        )


class RunResult(BaseModel):
    """Результат run: снимки, диагностика, причина остановки."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    trajectory: Trajectory
    diagnostics: DiagnosticsSeries
    final: State
    steps: int
    stop_reason: Literal["horizon", "threshold"]
    consts: DerivedConstants
    target: Optional[float] = None


def default_dt(grid: Grid, sigma: float) -> float:
    """Эвристика точности min(1e-3, h^2 / (4 sigma)); неявная диффузия ее не требует."""
    h = min(grid.hx, grid.hy)
    return min(1e-3, h * h / (4.0 * sigma))


@lru_cache(maxsize=8)
def _diffusion_operator(nx: int, ny: int, dt: float, sigma: float) -> sp.csr_matrix:
    grid = Grid(nx=nx, ny=ny)
    return (sp.identity(nx * ny, format="csr") - (dt * sigma) * laplacian_matrix(grid)).tocsr()


def implicit_u_solve(
    u: np.ndarray,
    v_coef: np.ndarray,
    v_source: np.ndarray,
    p: Params,
    grid: Grid,
    dt: float,
    rtol: float = DEFAULT_CG_RTOL,
    maxiter: int = DEFAULT_CG_MAXITER,
) -> np.ndarray:
    """
    Решает (I - dt sigma L + dt A(v_coef)) u* = u + dt eps v_source методом
    сопряженных градиентов с диагональным предобуславливателем.
    Матрица симметрична и положительно определена, так как A >= 0 при 0 <= v <= rho.
    """
    coef = binding_coefficient(v_coef.ravel(), p)
    matrix = _diffusion_operator(grid.nx, grid.ny, float(dt), float(p.sigma)) + sp.diags(dt * coef, format="csr")
    rhs = u.ravel() + dt * p.epsilon * v_source.ravel()
    preconditioner = sp.diags(1.0 / matrix.diagonal(), format="csr")

    iterations = 0

    def _count(_):
        nonlocal iterations
        iterations += 1

    solution, info = cg(
        matrix, rhs, x0=u.ravel().copy(), rtol=rtol, atol=0.0,
        maxiter=maxiter, M=preconditioner, callback=_count,
    )
    if info != 0:
        raise LinearSolveDiverged(
            f"conjugate gradients stopped with info={info} after {iterations} iterations (cap {maxiter})",
            iterations=iterations,
        )
    logger.debug("CG converged in %d iterations", iterations)
    return solution.reshape(grid.shape)


def euler_v_update(v: np.ndarray, u: np.ndarray, dt: float, p: Params) -> np.ndarray:
    """v + dt Q(u, v)."""
    return v + dt * reaction(u, v, p)


def riccati_v_update(v: np.ndarray, u: np.ndarray, dt: float, p: Params) -> np.ndarray:
    """
    Точное решение dv/dt = Q(u, v) на шаге dt при замороженном u.
    Правая часть - квадратный трехчлен по v с корнями r_low <= 0 <= r_high, поэтому
        (v - r_high) / (v - r_low) = c * exp(-sqrt(D) t).
    Отрицательные u (погрешность схемы) заменяются нулем.
    """
    u_pos = np.maximum(np.asarray(u, dtype=float), 0.0)
    v = np.asarray(v, dtype=float)
    beta = u_pos * (p.rho * p.a1 - p.a0) - p.epsilon
    sqrt_d = np.sqrt(beta * beta + 4.0 * p.a1 * p.rho * p.a0 * u_pos * u_pos)
    r_low, r_high = binding_equilibrium(u_pos, p)
    width = r_high - r_low
    # (v - r_low) / (r_high - r_low); при r_low = -inf равно 1.
    share = 1.0 - (r_high - v) / width
    decay = np.exp(-sqrt_d * dt)
    one_minus_decay = -np.expm1(-sqrt_d * dt)
    return r_high + (v - r_high) * decay / (share * one_minus_decay + decay)


def advance_v(scheme: VScheme, v: np.ndarray, u: np.ndarray, dt: float, p: Params) -> np.ndarray:
    if scheme == "explicit-euler":
        return euler_v_update(v, u, dt, p)
    return riccati_v_update(v, u, dt, p)


def step(s: State, cfg: RunConfig, dt: Optional[float] = None) -> State:
    """
    Один шаг расщепления длины dt (по умолчанию cfg.dt).
    Возвращаемое u^{n+1} замкнуто потоком и совпадает с u* из линейной системы
    только при явном Эйлере; при riccati-exact они расходятся на O(dt^2)
    (разница точного и эйлерова приращения v), зато масса сохраняется точно.
    """
    if s.grid != cfg.grid:
        raise ValueError(f"state grid {s.grid.shape} does not match config grid {cfg.grid.shape}")
    dt = cfg.dt if dt is None else dt
    p = cfg.params
    u, v = s.u.values, s.v.values

    u_star = implicit_u_solve(u, v, v, p, cfg.grid, dt, rtol=cfg.cg_rtol, maxiter=cfg.cg_maxiter)
    v_new = advance_v(cfg.scheme_v, v, u_star, dt, p)
    u_new = close_u_flux(u, u_star, v_new - v, dt, p, cfg.grid)

    if not (np.all(np.isfinite(u_new)) and np.all(np.isfinite(v_new))):
        raise NonFiniteState(f"non-finite values after step at t={s.t + dt:.6g}")
    return State(u=Field.of(cfg.grid, u_new), v=Field.of(cfg.grid, v_new), t=s.t + dt)


def close_u_flux(
    u: np.ndarray,
    u_star: np.ndarray,
    exchange: np.ndarray,
    dt: float,
    p: Params,
    grid: Grid,
) -> np.ndarray:
    """
    Замыкание шага по u в потоковой форме: диффузионный поток берется от
    промежуточного u*, а exchange - количество, перешедшее из u в v за шаг
    (в step это ровно приращение v). Если v получает ровно exchange, сумма
    h^2 * (u + v) сохраняется до округления при любой точности CG.
    """
    diffusion = (laplacian_matrix(grid) @ u_star.ravel()).reshape(grid.shape)
    return u + dt * p.sigma * diffusion - exchange


def check_initial_hypotheses(f: Field, g: Field, consts: DerivedConstants) -> List[str]:
    """Нарушения условий 0 <= f <= lambda и 0 <= g < mu на начальных данных."""
    violations = []
    f_min, f_max = float(np.min(f.values)), float(np.max(f.values))
    g_min, g_max = float(np.min(g.values)), float(np.max(g.values))
    if f_min < 0.0:
        violations.append(f"min f = {f_min:.17g} < 0")
    if f_max > consts.lambda_:
        violations.append(f"max f = {f_max:.17g} > lambda = {consts.lambda_:.17g}")
    if g_min < 0.0:
        violations.append(f"min g = {g_min:.17g} < 0")
    if g_max >= consts.mu:
        violations.append(f"max g = {g_max:.17g} >= mu = {consts.mu:.17g}")
    return violations


def _resolve_target(cfg: RunConfig) -> Optional[float]:
    if cfg.stop_rule is None:
        return None
    if cfg.stop_rule.target is not None:
        return cfg.stop_rule.target
    return normalized_stationary(cfg.params).admissible


def run(cfg: RunConfig, init: Tuple[Field, Field]) -> RunResult:
    """
    Шагает от начальных данных до T или до срабатывания правила остановки.
    Диагностика пишется на каждом шаге, снимки - каждые snapshot_every шагов
    и в ближайшие к capture_times шаги (а также первый и последний).
    """
    f, g = init
    if f.grid != cfg.grid or g.grid != cfg.grid:
        raise ValueError("initial fields must live on the configured grid")
    consts = derived_constants(cfg.params, domain_area=cfg.grid.area)

    if cfg.hypothesis_check != "off":
        violations = check_initial_hypotheses(f, g, consts)
        if violations:
            if cfg.hypothesis_check == "error":
                raise HypothesisViolated("initial data leave the invariant region", violations)
            for violation in violations:
                logger.warning("Initial data outside the invariant region: %s", violation)

    target = _resolve_target(cfg)
    threshold = cfg.stop_rule.threshold if cfg.stop_rule else None

    state = State(u=f, v=g, t=0.0)
    recorder = DiagnosticsRecorder()
    snapshots = [state]
    stop_reason = "horizon"
    n_steps = cfg.n_steps
    progress_every = max(1, n_steps // 10)
    capture_steps = {max(1, int(round(t / cfg.dt))) for t in cfg.capture_times if 0.0 < t <= cfg.T}

    row = recorder.record(state.t, state.u, state.v)
    if target is not None and max(convergence_errors(row[5], row[4], target)) < threshold:
        stop_reason = "threshold"
        n_steps = 0

    logger.info(
        "Starting run: grid %dx%d, dt=%g, T=%g, scheme=%s, %d steps max",
        cfg.grid.nx, cfg.grid.ny, cfg.dt, cfg.T, cfg.scheme_v, n_steps,
    )
    taken = 0
    for k in range(n_steps):
        t_next = min(cfg.T, (k + 1) * cfg.dt)
        state = step(state, cfg, dt=t_next - state.t)
        state = state.model_copy(update={"t": t_next})
        taken += 1
        row = recorder.record(state.t, state.u, state.v)

        if (k + 1) % cfg.snapshot_every == 0 or (k + 1) in capture_steps:
            snapshots.append(state)
        if (k + 1) % progress_every == 0:
            logger.info("t=%.6g mass=%.17g v in [%.6g, %.6g]", state.t, row[1], row[4], row[5])
        if target is not None and max(convergence_errors(row[5], row[4], target)) < threshold:
            stop_reason = "threshold"
            break

    if snapshots[-1] is not state:
        snapshots.append(state)
    logger.info("Run finished at t=%.6g after %d steps (%s)", state.t, taken, stop_reason)

    return RunResult(
        trajectory=Trajectory.from_states(snapshots),
        diagnostics=recorder.to_series(),
        final=state,
        steps=taken,
        stop_reason=stop_reason,
        consts=consts,
        target=target,
    )


def homogeneous_ode_reference(
    u0: float,
    v0: float,
    p: Params,
    T: float,
    dt_fine: float,
) -> Tuple[float, float]:
    """
    Эталон для пространственно-однородного случая (Laplace(u) = 0):
    u' = -Q(u, v), v' = Q(u, v), классический метод Рунге-Кутты 4-го порядка.
    Сумма u + v сохраняется схемой с точностью округления.
    """
    if T <= 0.0:
        return float(u0), float(v0)
    n = max(1, int(math.ceil(T / dt_fine - 1e-9)))
    h = T / n
    y = np.array([u0, v0], dtype=float)

    def rhs(state: np.ndarray) -> np.ndarray:
        q = reaction(state[0], state[1], p)
        return np.array([-q, q])

    for _ in range(n):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * h * k1)
        k3 = rhs(y + 0.5 * h * k2)
        k4 = rhs(y + h * k3)
        y = y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        if not np.all(np.isfinite(y)):
            raise NonFiniteState(f"ODE reference diverged from (u0, v0)=({u0}, {v0})")
    return float(y[0]), float(y[1])
