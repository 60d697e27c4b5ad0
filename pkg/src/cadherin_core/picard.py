# src/cadherin_core/picard.py
# -*- coding: utf-8 -*-
"""
Последовательные приближения на всем цилиндре [0, T] x Omega:
    u^0 = f, v^0 = g;
    u^{n+1}: линейная параболическая задача с коэффициентом и источником от v^n;
    v^{n+1}: поточечное уравнение Риккати dv/dt = Q(u^n, v).
На каждом шаге u^{n+1} решает неявную линейную систему evolve с коэффициентом и
источником от замороженного v^n и замыкается потоком с обменом dt Q(u*, v^n),
то есть зависит только от траектории v^n. v^{n+1} продвигается выбранной схемой
по промежуточным u* итерации n. При явном Эйлере неподвижная точка совпадает с
траекторией evolve на тех же шагах и сохраняет массу; при riccati-exact они
расходятся на погрешность расщепления O(dt).
Для каждой итерации строится сертификат: нормы Коши U_n(t), V_n(t) и
теоретическая оценка L k^{n+1} e^{3kTn} t^n / n!, под которой они обязаны лежать.
"""
from __future__ import annotations

import logging
import math
from typing import List, NamedTuple, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field as PydField

from .evolve import RunConfig, Trajectory, advance_v, check_initial_hypotheses, close_u_flux, implicit_u_solve
from .exceptions import HypothesisViolated, NoConvergence, NonFiniteState, ShapeMismatch
from .grid import Field, integrate
from .model import DerivedConstants, check_invariant_box, derived_constants, reaction

logger = logging.getLogger(__name__)

__all__ = [
    "CERTIFICATE_SLACK",
    "DecayEnvelope",
    "PicardCertificate",
    "PicardResult",
    "Trajectory",
    "cauchy_norms",
    "decay_envelope_fit",
    "picard_solve",
    "theoretical_bound",
]

DEFAULT_N_MAX = 20
DEFAULT_TOL = 1e-6
# Допуск на погрешность дискретизации в неравенстве сертификата.
CERTIFICATE_SLACK = 1e-2
ITERATE_BOX_SLACK = 1e-8


class PicardCertificate(BaseModel):
    """Нормы Коши итерации n и оценка, под которой они должны лежать."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n: int = PydField(..., ge=0)
    times: np.ndarray
    U_n: np.ndarray = PydField(..., description="int (u_{n+1} - u_n)^2 dx по моментам времени.")
    V_n: np.ndarray = PydField(..., description="int (v_{n+1} - v_n)^2 dx по моментам времени.")
    bound_n: np.ndarray
    box_ok: bool = True

    @property
    def sup_U(self) -> float:
        return float(np.max(self.U_n))

    @property
    def sup_V(self) -> float:
        return float(np.max(self.V_n))

    @property
    def sup_bound(self) -> float:
        return float(np.max(self.bound_n))

    @property
    def sup(self) -> float:
        return max(self.sup_U, self.sup_V)

    @property
    def passed(self) -> bool:
        limit = (1.0 + CERTIFICATE_SLACK) * self.bound_n
        return bool(np.all(self.U_n <= limit) and np.all(self.V_n <= limit))


class DecayEnvelope(BaseModel):
    """Аппроксимация sup_n ~ c r^n / n!: регрессия log(sup_n) + log(n!) по n."""
    model_config = ConfigDict(frozen=True)

    log_c: float
    log_r: float
    n_points: int

    def predict(self, n: int) -> float:
        return math.exp(self.log_c + n * self.log_r - math.lgamma(n + 1))


class PicardResult(BaseModel):
    """Последние итерации u, v (в одной траектории) и все сертификаты."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    trajectory: Trajectory
    certificates: List[PicardCertificate]
    converged: bool
    iterations: int
    consts: DerivedConstants
    tol: float
    envelope: Optional[DecayEnvelope] = None

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.certificates)


def theoretical_bound(n: int, t: float, consts: DerivedConstants, T: float) -> float:
    """
    L k^{n+1} e^{3kTn} t^n / n!, вычисленная через логарифмы.
    Возвращает inf при переполнении экспоненты; n = 0 дает L k.
    """
    if n < 0:
        raise ValueError(f"n must be nonnegative, got {n}")
    if t < 0.0 or t > T * (1.0 + 1e-12):
        raise ValueError(f"t={t} must lie in [0, T={T}]")
    if n == 0:
        return consts.L * consts.k
    if t == 0.0:
        return 0.0
    k = consts.k
    log_bound = (
        math.log(consts.L)
        + (n + 1) * math.log(k)
        + 3.0 * k * T * n
        + n * math.log(t)
        - math.lgamma(n + 1)
    )
    if log_bound > math.log(np.finfo(float).max):
        return math.inf
    return math.exp(log_bound)


def cauchy_norms(traj_a: Trajectory, traj_b: Trajectory) -> Tuple[np.ndarray, np.ndarray]:
    """Квадраты L2-норм разностей u и v по моментам времени."""
    if traj_a.grid != traj_b.grid or traj_a.u_frames.shape != traj_b.u_frames.shape:
        raise ShapeMismatch(
            f"trajectories differ: grids {traj_a.grid.shape} vs {traj_b.grid.shape}, "
            f"frames {traj_a.u_frames.shape} vs {traj_b.u_frames.shape}"
        )
    if not np.array_equal(traj_a.times, traj_b.times):
        raise ShapeMismatch("trajectories have different time grids")
    grid = traj_a.grid
    du = traj_b.u_frames - traj_a.u_frames
    dv = traj_b.v_frames - traj_a.v_frames
    U = np.array([integrate(frame * frame, grid) for frame in du])
    V = np.array([integrate(frame * frame, grid) for frame in dv])
    return U, V


def decay_envelope_fit(certificates: List[PicardCertificate]) -> Optional[DecayEnvelope]:
    """Регрессия log(sup_n) + log(n!) по n на положительных супремумах; None, если точек меньше трех."""
    points = [(c.n, c.sup) for c in certificates if c.sup > 0.0 and math.isfinite(c.sup)]
    if len(points) < 3:
        return None
    n = np.array([p[0] for p in points], dtype=float)
    y = np.array([math.log(p[1]) + math.lgamma(p[0] + 1) for p in points])
    log_r, log_c = np.polyfit(n, y, 1)
    return DecayEnvelope(log_c=float(log_c), log_r=float(log_r), n_points=len(points))


def _time_grid(cfg: RunConfig) -> np.ndarray:
    times = np.minimum(np.arange(cfg.n_steps + 1) * cfg.dt, cfg.T)
    times[-1] = cfg.T
    return times


class _Iterate(NamedTuple):
    trajectory: Trajectory
    # промежуточные u* на каждом шаге, shape (n_times - 1, nx, ny)
    stages: np.ndarray


def _initial_iterate(f: Field, g: Field, times: np.ndarray, cfg: RunConfig) -> _Iterate:
    shape = cfg.grid.shape
    trajectory = Trajectory(
        grid=cfg.grid,
        times=times,
        u_frames=np.broadcast_to(f.values, (len(times),) + shape).copy(),
        v_frames=np.broadcast_to(g.values, (len(times),) + shape).copy(),
    )
    stages = np.broadcast_to(f.values, (len(times) - 1,) + shape).copy()
    return _Iterate(trajectory=trajectory, stages=stages)


def _next_iterate(prev: _Iterate, f: Field, g: Field, cfg: RunConfig) -> _Iterate:
    """Одна итерация: u по замороженному v^n, v по замороженному u* итерации n."""
    p, grid = cfg.params, cfg.grid
    times = prev.trajectory.times
    u_frames = np.empty_like(prev.trajectory.u_frames)
    v_frames = np.empty_like(prev.trajectory.v_frames)
    stages = np.empty_like(prev.stages)
    u_frames[0] = f.values
    v_frames[0] = g.values

    for j in range(len(times) - 1):
        dt = float(times[j + 1] - times[j])
        v_frozen = prev.trajectory.v_frames[j]
        stages[j] = implicit_u_solve(
            u_frames[j], v_frozen, v_frozen, p, grid, dt, rtol=cfg.cg_rtol, maxiter=cfg.cg_maxiter,
        )
        exchange = dt * reaction(stages[j], v_frozen, p)
        u_frames[j + 1] = close_u_flux(u_frames[j], stages[j], exchange, dt, p, grid)
        v_frames[j + 1] = advance_v(cfg.scheme_v, v_frames[j], prev.stages[j], dt, p)

    if not (np.all(np.isfinite(u_frames)) and np.all(np.isfinite(v_frames))):
        raise NonFiniteState("non-finite values in a successive approximation")
    trajectory = Trajectory(grid=grid, times=times, u_frames=u_frames, v_frames=v_frames)
    return _Iterate(trajectory=trajectory, stages=stages)


def _certificate(
    n: int,
    prev: Trajectory,
    curr: Trajectory,
    consts: DerivedConstants,
    cfg: RunConfig,
    stride: int,
) -> PicardCertificate:
    U, V = cauchy_norms(prev, curr)
    index = np.arange(0, len(curr.times), stride)
    if index[-1] != len(curr.times) - 1:
        index = np.append(index, len(curr.times) - 1)
    times = curr.times[index]
    bound = np.array([theoretical_bound(n, float(t), consts, cfg.T) for t in times])

    box = check_invariant_box(curr.u_frames, curr.v_frames, consts, slack=ITERATE_BOX_SLACK)
    if not box.ok:
        logger.warning("Iterate %d left the invariant region: %s", n + 1, "; ".join(box.violations))
    return PicardCertificate(n=n, times=times, U_n=U[index], V_n=V[index], bound_n=bound, box_ok=box.ok)


def picard_solve(
    cfg: RunConfig,
    f: Field,
    g: Field,
    n_max: int = DEFAULT_N_MAX,
    tol: float = DEFAULT_TOL,
    certificate_stride: int = 1,
) -> PicardResult:
    """
    Итерирует до sup_t max(U_n, V_n) < tol^2 или до n_max итераций.
    Начальные данные обязаны лежать в [0, lambda] x [0, mu) (иначе HypothesisViolated).
    Если итерации исчерпаны, а супремумы еще убывают, результат возвращается
    с converged=False; если не убывают, вызывается NoConvergence.
    """
    if n_max < 1:
        raise ValueError(f"n_max must be at least 1, got {n_max}")
    if tol <= 0.0:
        raise ValueError(f"tol must be positive, got {tol}")
    if certificate_stride < 1:
        raise ValueError(f"certificate_stride must be at least 1, got {certificate_stride}")
    if f.grid != cfg.grid or g.grid != cfg.grid:
        raise ShapeMismatch("initial fields must live on the configured grid")

    consts = derived_constants(cfg.params, domain_area=cfg.grid.area)
    violations = check_initial_hypotheses(f, g, consts)
    if violations:
        raise HypothesisViolated("initial data violate 0 <= f <= lambda, 0 <= g < mu", violations)

    times = _time_grid(cfg)
    n_times = len(times)
    current = _initial_iterate(f, g, times, cfg)
    logger.info(
        "Starting successive approximations: grid %dx%d, %d time levels, n_max=%d, tol=%g",
        cfg.grid.nx, cfg.grid.ny, n_times, n_max, tol,
    )

    certificates: List[PicardCertificate] = []
    converged = False
    for n in range(n_max):
        following = _next_iterate(current, f, g, cfg)
        certificate = _certificate(n, current.trajectory, following.trajectory, consts, cfg, certificate_stride)
        certificates.append(certificate)
        current = following
        logger.info(
            "Iteration %d: sup U=%.3e sup V=%.3e bound passed=%s",
            n + 1, certificate.sup_U, certificate.sup_V, certificate.passed,
        )
        if certificate.sup < tol * tol:
            converged = True
            break

    if not converged:
        sups = [c.sup for c in certificates]
        if len(sups) < 2 or not sups[-1] < sups[-2]:
            raise NoConvergence(
                f"no convergence after {n_max} iterations; last suprema {sups[-2:]} are not decreasing"
            )
        logger.warning(
            "Iteration cap %d reached with sup=%.3e above tol^2=%.3e; suprema are still decreasing",
            n_max, sups[-1], tol * tol,
        )

    failed = [c.n for c in certificates if not c.passed]
    if failed:
        logger.warning("Certificate inequality failed for iterations %s", failed)

    return PicardResult(
        trajectory=current.trajectory,
        certificates=certificates,
        converged=converged,
        iterations=len(certificates),
        consts=consts,
        tol=tol,
        envelope=decay_envelope_fit(certificates),
    )
