# src/application.py
# -*- coding: utf-8 -*-
import time
from pathlib import Path
from typing import Dict, List, Tuple
import logging

import numpy as np

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
)
from error_codes import ErrorCodes
from utils.dependency_checker import check_dependencies, CORE_DEPENDENCIES
from config.manager import Config
from config import constants

from src import exporters
from src.exporters import CERTIFICATES_DIR, FIELDS_DIR, SERIES_DIR, RunManifest
from src.cadherin_core import exceptions as core_errors
from src.cadherin_core.diagnostics import convergence_study, fit_all
from src.cadherin_core.evolve import RunConfig, StopRule, default_dt, run
from src.cadherin_core.grid import Field, Grid, integrate, sample_initial, SINE_MODE_U0, SINE_MODE_V0
from src.cadherin_core.model import Params, check_invariant_box, derived_constants, validate_params
from src.cadherin_core.picard import picard_solve
from src.cadherin_core.stationary import cubic_profile, mass_closure, normalized_stationary, sweep_epsilon
from src.cadherin_core.verification import VerificationSuite, perturbed_laplacian


class Application:
    """
    Главный класс приложения: проверяет зависимости, собирает объекты
    предметной области из настроек и выполняет выбранную подкоманду.
    """

    def __init__(self, config: Config):
        self.config = config
        self.logger = logging.getLogger(self.__class__.__name__)
        self.out_dir: Path = Path(config.get(constants.OUT_DIR_KEY))
        self.manifest = RunManifest(command=str(config.get(constants.COMMAND_KEY)))

    def _raise_missing_dependency_error(self, missing_dependencies: list[str]):
        """
        Формирует сообщение об ошибке и возбуждает исключение MissingDependencyError.
        """
        if not missing_dependencies:
            return
        deps_str = ", ".join(missing_dependencies)
        message = f"Отсутствуют необходимые зависимости: {deps_str}. Пожалуйста, установите их."
        raise MissingDependencyError(message)

    def _check_dependencies(self):
        """Проверяет наличие необходимых зависимостей."""
        missing = check_dependencies(CORE_DEPENDENCIES)
        self._raise_missing_dependency_error([dep_info['friendly_name'] for dep_info in missing])

    # --- сборка объектов из настроек ---

    def _params(self, allow_zero_epsilon: bool = False) -> Params:
        raw = {key: self.config.get(key) for key in constants.PARAMETER_KEYS}
        return validate_params(raw, mode=self.config.get(constants.VALIDATION_KEY), allow_zero_epsilon=allow_zero_epsilon)

    def _grid(self) -> Grid:
        return Grid.parse(self.config.get(constants.GRID_KEY))

    def _dt(self, grid: Grid, params: Params) -> float:
        dt = self.config.get(constants.DT_KEY)
        if dt is None:
            dt = default_dt(grid, params.sigma)
            self.logger.info("Time step not set, using accuracy heuristic dt=%g", dt)
        return dt

    def _initial_data(self, params: Params, grid: Grid) -> Tuple[Field, Field]:
        init = self.config.get(constants.INIT_KEY)
        if init == constants.INIT_SINE_MODE:
            return sample_initial(SINE_MODE_U0, grid), sample_initial(SINE_MODE_V0, grid)
        if init == constants.INIT_STATIONARY:
            root = normalized_stationary(params).admissible
            return Field.constant(grid, 1.0 - root), Field.constant(grid, root)
        u_text, v_text = init[len(constants.INIT_CONSTANT_PREFIX):].split(",")
        return Field.constant(grid, float(u_text)), Field.constant(grid, float(v_text))

    def _run_config(self, params: Params, grid: Grid, **overrides) -> RunConfig:
        return RunConfig(
            params=params,
            grid=grid,
            dt=self._dt(grid, params),
            T=self.config.get(constants.T_KEY),
            scheme_v=self.config.get(constants.SCHEME_KEY),
            cg_rtol=self.config.get(constants.CG_RTOL_KEY),
            cg_maxiter=self.config.get(constants.CG_MAXITER_KEY),
            **overrides,
        )

    def _record_constants(self, params: Params):
        consts = derived_constants(params)
        self.manifest.constants.update({"lambda": consts.lambda_, "mu": consts.mu, "k": consts.k, "L": consts.L})

    def _write_fields(self, name: str, frames: List[Tuple[float, np.ndarray]], grid: Grid):
        """Поля одной переменной в CSV и PGM с общим диапазоном яркости."""
        low = min(float(values.min()) for _, values in frames)
        high = max(float(values.max()) for _, values in frames)
        for t, values in frames:
            field = Field.of(grid, values)
            stem = f"{name}_t{t:.6g}"
            self.manifest.add_output(exporters.write_field_csv(self.out_dir / FIELDS_DIR / f"{stem}.csv", field, t))
            for path in exporters.write_field_pgm(self.out_dir / FIELDS_DIR / f"{stem}.pgm", field, t, (low, high)):
                self.manifest.add_output(path)

    # --- подкоманды ---

    def _run_stationary(self):
        params = self._params(allow_zero_epsilon=True)
        report = normalized_stationary(params)
        root = report.admissible

        print(f"roots = {', '.join('%.17g' % r for r in report.roots)}")
        print(f"admissible = {root:.17g}")
        print(f"residual = {report.residual:.3e}")
        for warning in report.warnings:
            print(f"warning = {warning}")

        self.manifest.results.update({
            "roots": ", ".join("%.17g" % r for r in report.roots),
            "admissible": root,
            "residual": report.residual,
            "stationary_u": 1.0 - root,
            "mass_closure_residual": mass_closure(1.0 - root, params),
        })
        if params.epsilon > 0.0:
            self._record_constants(params)
        self.manifest.add_output(exporters.write_roots_csv(self.out_dir / SERIES_DIR / "stationary_roots.csv", [report]))

        sweep = self.config.get(constants.SWEEP_KEY)
        if sweep is not None:
            start, stop, count = sweep
            reports = sweep_epsilon(params, np.linspace(start, stop, count))
            self.manifest.add_output(exporters.write_roots_csv(self.out_dir / SERIES_DIR / "eps_sweep.csv", reports))
            self.logger.info("Epsilon sweep over [%g, %g] with %d points written", start, stop, count)

        if self.config.get(constants.PROFILE_KEY):
            v = np.linspace(-params.a0 / params.a1 - 0.5, 1.5, constants.DEFAULT_PROFILE_POINTS)
            polynomial, line = cubic_profile(params, v)
            self.manifest.add_output(exporters.write_profile_csv(self.out_dir / SERIES_DIR / "cubic_profile.csv", v, polynomial, line))

    def _run_evolve(self):
        params = self._params()
        grid = self._grid()
        f, g = self._initial_data(params, grid)
        self._record_constants(params)

        target = self.config.get(constants.STOP_TARGET_KEY)
        if target is None:
            target = normalized_stationary(params).admissible
        threshold = self.config.get(constants.STOP_THRESHOLD_KEY)
        stop_rule = StopRule(threshold=threshold, target=target) if threshold is not None else None

        cfg = self._run_config(
            params, grid,
            snapshot_every=self.config.get(constants.SNAPSHOT_EVERY_KEY),
            stop_rule=stop_rule,
            hypothesis_check=self.config.get(constants.HYPOTHESIS_CHECK_KEY),
            capture_times=self.config.get(constants.FIELD_TIMES_KEY),
        )
        result = run(cfg, (f, g))
        series = result.diagnostics

        conv = convergence_study(series, target, threshold or StopRule().threshold)
        fits = fit_all(conv, self.config.get(constants.FIT_WINDOW_KEY))
        self.manifest.add_output(exporters.write_diagnostics_csv(self.out_dir / SERIES_DIR / "diagnostics.csv", series, conv))
        self.manifest.add_output(exporters.write_convergence_csv(self.out_dir / SERIES_DIR / "convergence.csv", conv))

        wanted = {0.0, float(result.final.t)} | {t for t in self.config.get(constants.FIELD_TIMES_KEY) if t <= result.final.t}
        traj = result.trajectory
        chosen = sorted({int(np.argmin(np.abs(traj.times - t))) for t in wanted})
        self._write_fields("u", [(float(traj.times[i]), traj.u_frames[i]) for i in chosen], grid)
        self._write_fields("v", [(float(traj.times[i]), traj.v_frames[i]) for i in chosen], grid)

        box = check_invariant_box(
            np.concatenate([series.u_min, series.u_max]),
            np.concatenate([series.v_min, series.v_max]),
            result.consts,
        )
        self.manifest.results.update({
            "steps": result.steps,
            "dt": cfg.dt,
            "final_time": float(result.final.t),
            "stop_reason": result.stop_reason,
            "target_v1": float(target),
            "stop_time": conv.stop_time if conv.reached else "none",
            "mass_initial": float(series.mass[0]),
            "mass_drift_max": float(np.max(np.abs(series.mass - series.mass[0]))),
            "u_min": float(series.u_min.min()),
            "v_max": float(series.v_max.max()),
            "invariant_box_ok": box.ok,
        })
        self.manifest.add_fits(fits)
        self.logger.info(
            "Evolve finished: %s at t=%.6g, mass drift %.3e",
            result.stop_reason, result.final.t, self.manifest.results["mass_drift_max"],
        )

    def _run_picard(self):
        params = self._params()
        grid = self._grid()
        f, g = self._initial_data(params, grid)
        self._record_constants(params)

        cfg = self._run_config(params, grid)
        result = picard_solve(
            cfg, f, g,
            n_max=self.config.get(constants.N_MAX_KEY),
            tol=self.config.get(constants.TOL_KEY),
            certificate_stride=self.config.get(constants.CERTIFICATE_STRIDE_KEY),
        )
        for certificate in result.certificates:
            path = self.out_dir / CERTIFICATES_DIR / f"iteration_{certificate.n:03d}.csv"
            self.manifest.add_output(exporters.write_certificate_csv(path, certificate))
        self.manifest.add_output(exporters.write_certificate_summary(
            self.out_dir / CERTIFICATES_DIR / "summary.csv", result.certificates, result.envelope,
        ))

        traj = result.trajectory
        self._write_fields("u_limit", [(float(traj.times[-1]), traj.u_frames[-1])], grid)
        self._write_fields("v_limit", [(float(traj.times[-1]), traj.v_frames[-1])], grid)
        mass = np.array([integrate(u + v, grid) for u, v in zip(traj.u_frames, traj.v_frames)])

        self.manifest.results.update({
            "iterations": result.iterations,
            "converged": result.converged,
            "final_sup": result.certificates[-1].sup,
            "certificates_passed": result.all_passed,
            "mass_drift_max": float(np.max(np.abs(mass - mass[0]))),
        })
        if result.envelope is not None:
            self.manifest.results.update({"envelope.log_c": result.envelope.log_c, "envelope.log_r": result.envelope.log_r})
        if not result.all_passed:
            failed = [c.n for c in result.certificates if not c.passed]
            self._finish()
            raise VerificationFailedError(f"Неравенство сертификата нарушено для итераций {failed}.")

    def _run_verify(self):
        laplacian = perturbed_laplacian if self.config.get(constants.PERTURB_LAPLACIAN_KEY) else None
        suite_kwargs = {"laplacian": laplacian} if laplacian is not None else {}
        suite = VerificationSuite(
            quick=self.config.get(constants.QUICK_KEY),
            seed=self.config.get(constants.SEED_KEY),
            **suite_kwargs,
        )
        report = suite.run()
        for check in report.checks:
            print(f"{check.name} = {'pass' if check.passed else 'fail'} (value {check.value:.3e}, limit {check.limit:.3e})")

        self.manifest.add_output(exporters.write_verification_csv(self.out_dir / SERIES_DIR / "verify.csv", report))
        self.manifest.results.update({"passed": report.passed, "failed": ", ".join(report.failed) or "none"})
        if not report.passed:
            self._finish()
            raise VerificationFailedError(f"Не пройдены проверки: {', '.join(report.failed)}.")

    def _finish(self):
        self.manifest.settings.update({
            key: value for key, value in self.config.get_redacted_settings().items() if value is not None
        })
        self.manifest.wall_clock_seconds = time.perf_counter() - self._started
        exporters.write_manifest(self.out_dir, self.manifest)

    def _run_command(self) -> int:
        """Выполняет подкоманду, переводя ошибки пакета в коды выхода."""
        handlers = {
            constants.STATIONARY_COMMAND: self._run_stationary,
            constants.EVOLVE_COMMAND: self._run_evolve,
            constants.PICARD_COMMAND: self._run_picard,
            constants.VERIFY_COMMAND: self._run_verify,
        }
        command = self.config.get(constants.COMMAND_KEY)
        if command not in handlers:
            raise ConfigurationError(f"Неизвестная подкоманда: {command!r}")

        self.logger.info("--- %s ---", command)
        try:
            handlers[command]()
        except core_errors.ParameterValidationError as e:
            raise ParameterError(str(e)) from e
        except core_errors.HypothesisViolated as e:
            raise HypothesisError(f"{e}: {'; '.join(e.violations)}") from e
        except core_errors.NoConvergence as e:
            raise ConvergenceError(str(e)) from e
        except (core_errors.NumericalError, core_errors.NoAdmissibleRoot) as e:
            raise NumericalError(str(e)) from e
        except core_errors.CoreError as e:
            raise InvalidInputError(str(e)) from e
        except ValueError as e:
            raise InvalidInputError(f"Некорректные входные данные: {e}") from e

        self._finish()
        return ErrorCodes.SUCCESS.value

    def run(self) -> int:
        """
        Главная точка входа: проверка зависимостей и запуск подкоманды.
        """
        self._started = time.perf_counter()
        self._check_dependencies()
        return self._run_command()
