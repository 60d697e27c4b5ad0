import pytest

from src.cadherin_core.grid import Grid
from src.cadherin_core.model import Params
from src.cadherin_core.verification import REFERENCE_PARAMS


@pytest.fixture
def reference_params() -> Params:
    """rho=0.7, sigma=1, a0=0.25, a1=0.5, eps=0.35."""
    return Params(**REFERENCE_PARAMS)


@pytest.fixture
def strict_params() -> Params:
    """Те же константы, но sigma=0.5: проходят строгую проверку."""
    return Params(**{**REFERENCE_PARAMS, "sigma": 0.5})


@pytest.fixture
def small_grid() -> Grid:
    return Grid(nx=8, ny=8)


@pytest.fixture
def isolated_env(monkeypatch):
    """Убирает переменные CADHERIN_* из окружения, чтобы тесты конфигурации были изолированы."""
    import os
    for key in list(os.environ):
        if key.startswith("CADHERIN_"):
            monkeypatch.delenv(key, raising=False)
    return monkeypatch
