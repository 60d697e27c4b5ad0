# src/exporters.py
# -*- coding: utf-8 -*-
"""
Запись результатов на диск: поля (CSV и 8-битный PGM с JSON-описанием диапазона),
временные ряды, сертификаты последовательных приближений и манифест запуска.
Все числа пишутся с 17 значащими цифрами.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from src.cadherin_core.diagnostics import ConvergenceSeries, DiagnosticsSeries, RateFit
from src.cadherin_core.grid import Field as GridField
from src.cadherin_core.picard import DecayEnvelope, PicardCertificate
from src.cadherin_core.stationary import CubicRootReport
from src.cadherin_core.verification import VerificationReport

logger = logging.getLogger(__name__)

NUMBER_FORMAT = "%.17g"
FIELDS_DIR = "fields"
SERIES_DIR = "series"
CERTIFICATES_DIR = "certificates"
MANIFEST_NAME = "manifest.txt"


def _fmt(value) -> str:
    if isinstance(value, float):
        return NUMBER_FORMAT % value
    return str(value)


def _save_table(path: Path, columns: Sequence[np.ndarray], header: Sequence[str]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    table = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, table, fmt=NUMBER_FORMAT, delimiter=",", header=",".join(header), comments="")
    logger.debug("Wrote %s (%d rows)", path, table.shape[0])
    return path


def write_field_csv(path: Path, field: GridField, t: float) -> Path:
    """Одна строка файла на строку сетки (индекс i по x), комментарий с nx, ny и временем."""
    path.parent.mkdir(parents=True, exist_ok=True)
    grid = field.grid
    header = f"nx={grid.nx} ny={grid.ny} t={NUMBER_FORMAT % t}"
    np.savetxt(path, field.values, fmt=NUMBER_FORMAT, delimiter=",", header=header, comments="# ")
    return path


def write_field_pgm(
    path: Path,
    field: GridField,
    t: float,
    value_range: Optional[Tuple[float, float]] = None,
) -> Tuple[Path, Path]:
    """
    8-битный PGM (P5) для быстрого просмотра: верхняя строка изображения соответствует y = 1.
    Диапазон [min, max] отображения пишется в JSON рядом с изображением.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    values = field.values
    low, high = value_range if value_range is not None else (float(values.min()), float(values.max()))
    span = high - low
    scaled = np.zeros_like(values) if span <= 0.0 else (values - low) / span
    pixels = np.clip(np.rint(scaled * 255.0), 0, 255).astype(np.uint8)
    image = pixels.T[::-1]

    height, width = image.shape
    with path.open("wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(image.tobytes())

    sidecar = path.with_suffix(".json")
    meta = {"min": low, "max": high, "nx": field.grid.nx, "ny": field.grid.ny, "t": float(t)}
    sidecar.write_text(json.dumps(meta, indent=2), encoding="utf-8")
    return path, sidecar


def write_diagnostics_csv(
    path: Path,
    series: DiagnosticsSeries,
    convergence: Optional[ConvergenceSeries] = None,
) -> Path:
    """Ряд диагностики; при заданной цели v1 добавляются три кривые ошибок."""
    header = ["t", "mass", "u_min", "u_max", "v_min", "v_max", "v_m", "v_avg"]
    columns = [series.times, series.mass, series.u_min, series.u_max, series.v_min, series.v_max, series.v_m, series.v_avg]
    if convergence is not None:
        header += ["err_max", "err_min", "err_mean"]
        columns += [convergence.err_max, convergence.err_min, convergence.err_mean]
    return _save_table(path, columns, header)


def write_convergence_csv(path: Path, convergence: ConvergenceSeries) -> Path:
    return _save_table(
        path,
        [convergence.times, convergence.err_max, convergence.err_min, convergence.err_mean],
        ["t", "err_max", "err_min", "err_mean"],
    )


def write_roots_csv(path: Path, reports: Iterable[CubicRootReport]) -> Path:
    """Траектории трех корней по eps (развертка)."""
    reports = list(reports)
    columns = [
        [r.epsilon for r in reports],
        [r.roots[0] for r in reports],
        [r.roots[1] for r in reports],
        [r.roots[2] for r in reports],
        [r.admissible for r in reports],
        [r.residual for r in reports],
    ]
    return _save_table(path, columns, ["eps", "root_low", "root_mid", "root_high", "admissible", "residual"])


def write_profile_csv(path: Path, v: np.ndarray, polynomial: np.ndarray, line: np.ndarray) -> Path:
    return _save_table(path, [v, polynomial, line], ["v", "cubic", "eps_v"])


def write_certificate_csv(path: Path, certificate: PicardCertificate) -> Path:
    return _save_table(
        path,
        [certificate.times, certificate.U_n, certificate.V_n, certificate.bound_n],
        ["t", "U_n", "V_n", "bound_n"],
    )


def write_certificate_summary(
    path: Path,
    certificates: List[PicardCertificate],
    envelope: Optional[DecayEnvelope] = None,
) -> Path:
    """Сводка по итерациям: n, sup U, sup V, sup оценки и результат проверки."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["n,sup_U,sup_V,sup_bound,passed"]
    for c in certificates:
        lines.append(",".join([str(c.n), _fmt(c.sup_U), _fmt(c.sup_V), _fmt(c.sup_bound), "pass" if c.passed else "fail"]))
    if envelope is not None:
        lines.append(f"# envelope log_c={_fmt(envelope.log_c)} log_r={_fmt(envelope.log_r)} points={envelope.n_points}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


class RunManifest(BaseModel):
    """
    Метаданные запуска в формате 'ключ = значение' с устойчивыми именами ключей.
    Пишется последним; каждый перечисленный файл к этому моменту существует.
    """
    command: str
    settings: Dict[str, object] = Field(default_factory=dict)
    constants: Dict[str, float] = Field(default_factory=dict)
    results: Dict[str, object] = Field(default_factory=dict)
    outputs: List[Path] = Field(default_factory=list)
    wall_clock_seconds: float = 0.0

    def add_output(self, path: Path):
        self.outputs.append(Path(path))

    def add_fits(self, fits: Dict[str, RateFit]):
        for name, fit in fits.items():
            self.results[f"fit.{name}.slope"] = fit.slope
            self.results[f"fit.{name}.intercept"] = fit.intercept
            self.results[f"fit.{name}.residual_std"] = fit.residual_std
            self.results[f"fit.{name}.samples"] = fit.n_samples

    def render(self, out_dir: Path) -> str:
        lines = [f"command = {self.command}"]
        for section, mapping in (("config", self.settings), ("derived", self.constants), ("result", self.results)):
            for key in sorted(mapping):
                lines.append(f"{section}.{key} = {_fmt(mapping[key])}")
        lines.append(f"wall_clock_seconds = {_fmt(float(self.wall_clock_seconds))}")
        for index, output in enumerate(self.outputs):
            try:
                shown = output.relative_to(out_dir)
            except ValueError:
                shown = output
            lines.append(f"output.{index} = {shown.as_posix()}")
        return "\n".join(lines) + "\n"


def write_manifest(out_dir: Path, manifest: RunManifest) -> Path:
    missing = [str(p) for p in manifest.outputs if not Path(p).exists()]
    if missing:
        raise FileNotFoundError(f"manifest lists files that were not written: {missing}")
    path = out_dir / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.render(out_dir), encoding="utf-8")
    logger.info("Manifest written to %s", path)
    return path


def write_verification_csv(path: Path, report: VerificationReport) -> Path:
    """Машиночитаемый отчет verify: одна строка на проверку, без времени выполнения."""
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["check,passed,value,limit"]
    for c in report.checks:
        lines.append(",".join([c.name, "pass" if c.passed else "fail", _fmt(c.value), _fmt(c.limit)]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
