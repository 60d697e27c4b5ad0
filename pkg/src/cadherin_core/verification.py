# src/cadherin_core/verification.py
# -*- coding: utf-8 -*-
"""
Набор сквозных проверок свойств пакета: корни стационарной задачи, свойства
дискретного лапласиана, константа Липшица, сохранение массы, инвариантная
область, совпадение с эталонным ОДУ и сертификаты последовательных приближений.
Каждая проверка возвращает измеренное значение и допуск, а не только флаг.
"""
from __future__ import annotations

import logging
import math
import time
from typing import Callable, Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from .evolve import RunConfig, homogeneous_ode_reference, run, step, State
from .grid import Field, Grid, apply_laplacian, integrate, sine_mode_u0, sine_mode_v0, sample_initial
from .model import Params, derived_constants, reaction, reaction_identity_residual, reaction_jacobian
from .picard import picard_solve
from .stationary import normalized_stationary

logger = logging.getLogger(__name__)

LaplacianOperator = Callable[[np.ndarray, Grid], np.ndarray]

REFERENCE_PARAMS = {"rho": 0.7, "sigma": 1.0, "a0": 0.25, "a1": 0.5, "epsilon": 0.35}
REFERENCE_ROOT = 0.3107435


class VerificationCheck(BaseModel):
    """Результат одной проверки: измеренное значение против допуска."""
    model_config = ConfigDict(frozen=True)

    name: str
    passed: bool
    value: float
    limit: float
    detail: str = ""
    seconds: float = 0.0


class VerificationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    checks: List[VerificationCheck]
    quick: bool
    seed: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failed(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]


def perturbed_laplacian(values: np.ndarray, grid: Grid) -> np.ndarray:
    """Лапласиан с нулевыми фиктивными ячейками вместо зеркальных: неконсервативен."""
    padded = np.pad(values, 1, mode="constant", constant_values=0.0)
    center = padded[1:-1, 1:-1]
    d_xx = (padded[2:, 1:-1] - 2.0 * center + padded[:-2, 1:-1]) / grid.hx ** 2
    d_yy = (padded[1:-1, 2:] - 2.0 * center + padded[1:-1, :-2]) / grid.hy ** 2
    return d_xx + d_yy


class VerificationSuite:
    """
    Запускает проверки последовательно. Случайные данные порождаются
    numpy.random.default_rng(seed), поэтому повторный запуск дает те же числа.
    """

    def __init__(
        self,
        params: Optional[Params] = None,
        quick: bool = False,
        seed: int = 0,
        laplacian: LaplacianOperator = apply_laplacian,
    ):
        self.params = params or Params(**REFERENCE_PARAMS)
        self.quick = quick
        self.seed = seed
        self.laplacian = laplacian
        self.logger = logging.getLogger(self.__class__.__name__)

    def _rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def _checks(self) -> Dict[str, Callable[[], VerificationCheck]]:
        return {
            "stationary_root": self.check_stationary_root,
            "zero_epsilon_roots": self.check_zero_epsilon_roots,
            "root_count": self.check_root_count,
            "reaction_identity": self.check_reaction_identity,
            "lipschitz_scan": self.check_lipschitz_scan,
            "lipschitz_pairs": self.check_lipschitz_pairs,
            "laplacian_conservative": self.check_laplacian_conservative,
            "laplacian_symmetric": self.check_laplacian_symmetric,
            "laplacian_order": self.check_laplacian_order,
            "stationary_step": self.check_stationary_step,
            "mass_conservation": self.check_mass_conservation,
            "invariant_region": self.check_invariant_region,
            "ode_oracle": self.check_ode_oracle,
            "picard_certificates": self.check_picard_certificates,
        }

    def run(self, only: Optional[List[str]] = None) -> VerificationReport:
        checks = []
        for name, check in self._checks().items():
            if only and name not in only:
                continue
            started = time.perf_counter()
            try:
                result = check()
            except Exception as e:
                self.logger.exception("Check %s raised", name)
                result = VerificationCheck(name=name, passed=False, value=math.nan, limit=math.nan, detail=f"{type(e).__name__}: {e}")
            result = result.model_copy(update={"seconds": time.perf_counter() - started})
            level = logging.INFO if result.passed else logging.ERROR
            self.logger.log(
                level, "%-24s %s value=%.3e limit=%.3e (%.2fs) %s",
                name, "PASS" if result.passed else "FAIL", result.value, result.limit, result.seconds, result.detail,
            )
            checks.append(result)
        return VerificationReport(checks=checks, quick=self.quick, seed=self.seed)

    # --- stationary ---

    def check_stationary_root(self) -> VerificationCheck:
        report = normalized_stationary(Params(**REFERENCE_PARAMS))
        error = abs(report.admissible - REFERENCE_ROOT)
        passed = error < 1e-6 and report.residual < 1e-12
        return VerificationCheck(
            name="stationary_root", passed=passed, value=error, limit=1e-6,
            detail=f"admissible={report.admissible:.17g} residual={report.residual:.3e}",
        )

    def check_zero_epsilon_roots(self) -> VerificationCheck:
        report = normalized_stationary(Params(**REFERENCE_PARAMS).with_epsilon(0.0))
        expected = [-0.5, 0.7, 1.0]
        error = max(abs(a - b) for a, b in zip(report.roots, expected))
        return VerificationCheck(name="zero_epsilon_roots", passed=error < 1e-12, value=error, limit=1e-12, detail=f"roots={report.roots}")

    def check_root_count(self) -> VerificationCheck:
        rng = self._rng()
        draws = 100 if self.quick else 1000
        bad = 0
        for _ in range(draws):
            rho = rng.uniform(0.05, 1.0)
            a1 = rng.uniform(0.05, 5.0)
            a0 = rng.uniform(0.01, 0.99) * rho * a1
            eps = rng.uniform(1e-3, 5.0)
            p = Params(rho=rho, sigma=1.0, a0=a0, a1=a1, epsilon=eps)
            report = normalized_stationary(p)
            if sum(1 for r in report.roots if 0.0 < r <= rho) != 1:
                bad += 1
        return VerificationCheck(name="root_count", passed=bad == 0, value=float(bad), limit=0.0, detail=f"{draws} random parameter sets")

    def check_reaction_identity(self) -> VerificationCheck:
        consts = derived_constants(self.params)
        v = np.linspace(0.0, consts.mu, 1001)
        error = float(np.max(np.abs(reaction_identity_residual(v, self.params))))
        return VerificationCheck(name="reaction_identity", passed=error < 1e-12, value=error, limit=1e-12)

    # --- Lipschitz constant ---

    def check_lipschitz_scan(self) -> VerificationCheck:
        consts = derived_constants(self.params)
        n = 201 if self.quick else 2001
        r, s = np.meshgrid(np.linspace(0.0, consts.lambda_, n), np.linspace(0.0, consts.mu, n), indexing="ij")
        d_r, d_s = reaction_jacobian(r, s, self.params)
        scanned = max(float(np.max(np.abs(d_r))), float(np.max(np.abs(d_s))), 1.0)
        error = abs(scanned - consts.k)
        return VerificationCheck(name="lipschitz_scan", passed=error < 1e-6, value=error, limit=1e-6, detail=f"k={consts.k:.17g} scan={scanned:.17g}")

    def check_lipschitz_pairs(self) -> VerificationCheck:
        consts = derived_constants(self.params)
        rng = self._rng()
        n = 10_000 if self.quick else 100_000
        r1, r2 = rng.uniform(0.0, consts.lambda_, (2, n))
        s1, s2 = rng.uniform(0.0, consts.mu, (2, n))
        lhs = np.abs(reaction(r1, s1, self.params) - reaction(r2, s2, self.params))
        rhs = consts.k * (np.abs(r1 - r2) + np.abs(s1 - s2))
        worst = float(np.max(lhs - rhs))
        return VerificationCheck(name="lipschitz_pairs", passed=worst <= 1e-12, value=worst, limit=1e-12, detail=f"{n} random pairs")

    # --- discrete operator ---

    def check_laplacian_conservative(self) -> VerificationCheck:
        rng = self._rng()
        grid = Grid(nx=32, ny=24)
        worst = 0.0
        for _ in range(10):
            values = rng.uniform(-10.0, 10.0, grid.shape)
            worst = max(worst, abs(integrate(self.laplacian(values, grid), grid)))
        return VerificationCheck(name="laplacian_conservative", passed=worst < 1e-12, value=worst, limit=1e-12)

    def check_laplacian_symmetric(self) -> VerificationCheck:
        rng = self._rng()
        grid = Grid(nx=32, ny=24)
        worst = 0.0
        for _ in range(10):
            f = rng.uniform(-1.0, 1.0, grid.shape)
            g = rng.uniform(-1.0, 1.0, grid.shape)
            lf, lg = self.laplacian(f, grid), self.laplacian(g, grid)
            scale = integrate(np.abs(lf * g), grid) + integrate(np.abs(f * lg), grid)
            worst = max(worst, abs(integrate(lf * g, grid) - integrate(f * lg, grid)) / scale)
        return VerificationCheck(name="laplacian_symmetric", passed=worst < 1e-12, value=worst, limit=1e-12, detail="relative")

    def check_laplacian_order(self) -> VerificationCheck:
        sizes = (16, 32, 64) if self.quick else (32, 64, 128)
        errors = []
        for n in sizes:
            grid = Grid(nx=n, ny=n)
            x, y = grid.cell_centers()
            f = np.cos(np.pi * x) * np.cos(np.pi * y)
            errors.append(float(np.max(np.abs(self.laplacian(f, grid) + 2.0 * np.pi ** 2 * f))))
        order = min(math.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1))
        return VerificationCheck(name="laplacian_order", passed=order >= 1.9, value=order, limit=1.9, detail=f"errors={errors}")

    # --- time integration ---

    def check_stationary_step(self) -> VerificationCheck:
        root = normalized_stationary(self.params).admissible
        grid = Grid(nx=8, ny=8)
        cfg = RunConfig(params=self.params, grid=grid, dt=1e-2, T=1.0)
        state = State(u=Field.constant(grid, 1.0 - root), v=Field.constant(grid, root))
        moved = step(state, cfg)
        change = max(float(np.max(np.abs(moved.u.values - state.u.values))), float(np.max(np.abs(moved.v.values - state.v.values))))
        return VerificationCheck(name="stationary_step", passed=change < 1e-12, value=change, limit=1e-12)

    def _sine_mode_run(self, scheme: str, T: float):
        grid = Grid(nx=16, ny=16) if self.quick else Grid(nx=32, ny=32)
        cfg = RunConfig(params=self.params, grid=grid, dt=1e-2, T=T, scheme_v=scheme, hypothesis_check="off")
        init = (Field.of(grid, sine_mode_u0(*grid.cell_centers())), Field.of(grid, sine_mode_v0(*grid.cell_centers())))
        return run(cfg, init)

    def check_mass_conservation(self) -> VerificationCheck:
        result = self._sine_mode_run("riccati-exact", T=1.0 if self.quick else 5.0)
        drift = float(np.max(np.abs(result.diagnostics.mass - result.diagnostics.mass[0])))
        return VerificationCheck(name="mass_conservation", passed=drift <= 1e-8, value=drift, limit=1e-8)

    def check_invariant_region(self) -> VerificationCheck:
        consts = derived_constants(self.params)
        grid = Grid(nx=16, ny=16)
        x, y = grid.cell_centers()
        f = Field.of(grid, 0.6 + 0.3 * np.cos(np.pi * x) * np.cos(np.pi * y))
        g = Field.of(grid, 0.3 + 0.2 * np.sin(np.pi * x) * np.cos(2.0 * np.pi * y))
        cfg = RunConfig(params=self.params, grid=grid, dt=1e-2, T=1.0 if self.quick else 3.0, hypothesis_check="error")
        series = run(cfg, (f, g)).diagnostics
        excess = max(
            float(np.max(-series.u_min)),
            float(np.max(series.u_max - consts.lambda_)),
            float(np.max(-series.v_min)),
            float(np.max(series.v_max - consts.mu)),
        )
        return VerificationCheck(name="invariant_region", passed=excess <= 1e-8, value=excess, limit=1e-8)

    def check_ode_oracle(self) -> VerificationCheck:
        dt, limit = (1e-3, 1e-4) if self.quick else (1e-4, 1e-5)
        grid = Grid(nx=8, ny=8)
        cfg = RunConfig(params=self.params, grid=grid, dt=dt, T=1.0, snapshot_every=10_000)
        final = run(cfg, (sample_initial("constant(0.6)", grid), sample_initial("constant(0.4)", grid))).final
        u_ref, v_ref = homogeneous_ode_reference(0.6, 0.4, self.params, T=1.0, dt_fine=1e-5)
        error = max(float(np.max(np.abs(final.u.values - u_ref))), float(np.max(np.abs(final.v.values - v_ref))))
        return VerificationCheck(name="ode_oracle", passed=error < limit, value=error, limit=limit, detail=f"dt={dt}")

    def check_picard_certificates(self) -> VerificationCheck:
        grid = Grid(nx=8, ny=8) if self.quick else Grid(nx=16, ny=16)
        cfg = RunConfig(params=self.params, grid=grid, dt=5e-2 if self.quick else 1e-2, T=1.0)
        result = picard_solve(cfg, Field.constant(grid, 0.6), Field.constant(grid, 0.4), n_max=20, tol=1e-6)
        at_zero = max(max(c.U_n[0], c.V_n[0]) for c in result.certificates)
        passed = result.converged and result.all_passed and at_zero == 0.0
        return VerificationCheck(
            name="picard_certificates", passed=passed, value=float(result.certificates[-1].sup), limit=1e-12,
            detail=f"iterations={result.iterations} bounds_passed={result.all_passed} U(0)=V(0)={at_zero:g}",
        )
