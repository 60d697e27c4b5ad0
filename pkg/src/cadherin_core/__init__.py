# src/cadherin_core/__init__.py
# -*- coding: utf-8 -*-
"""
Пакет cadherin_core: модель адгезии с вырожденной диффузией связанных частиц.
"""

from .model import Params, DerivedConstants, validate_params, derived_constants, reaction
from .stationary import CubicRootReport, StationaryPair, normalized_stationary, sweep_epsilon, v_of_constant_u
from .grid import Field, Grid, integrate, laplacian_neumann, sample_initial
from .evolve import RunConfig, RunResult, State, StopRule, Trajectory, homogeneous_ode_reference, run, step
from .picard import PicardCertificate, PicardResult, cauchy_norms, picard_solve, theoretical_bound
from .diagnostics import ConvergenceSeries, DiagnosticsSeries, convergence_study, exponential_rate_fit, mean_value
from .exceptions import CoreError

# __all__ определяет публичный API пакета.
__all__ = [
    "Params",
    "DerivedConstants",
    "validate_params",
    "derived_constants",
    "reaction",
    "CubicRootReport",
    "StationaryPair",
    "normalized_stationary",
    "sweep_epsilon",
    "v_of_constant_u",
    "Field",
    "Grid",
    "integrate",
    "laplacian_neumann",
    "sample_initial",
    "RunConfig",
    "RunResult",
    "State",
    "StopRule",
    "Trajectory",
    "homogeneous_ode_reference",
    "run",
    "step",
    "PicardCertificate",
    "PicardResult",
    "cauchy_norms",
    "picard_solve",
    "theoretical_bound",
    "ConvergenceSeries",
    "DiagnosticsSeries",
    "convergence_study",
    "exponential_rate_fit",
    "mean_value",
    "CoreError",
]
