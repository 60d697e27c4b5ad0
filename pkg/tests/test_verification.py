import math

import numpy as np
import pytest

from src import exporters
from src.cadherin_core.grid import Grid, apply_laplacian
from src.cadherin_core.verification import VerificationSuite, perturbed_laplacian

FAST_CHECKS = [
    "stationary_root",
    "zero_epsilon_roots",
    "root_count",
    "reaction_identity",
    "lipschitz_scan",
    "lipschitz_pairs",
    "laplacian_conservative",
    "laplacian_symmetric",
    "laplacian_order",
    "stationary_step",
]


class TestVerificationSuite:

    def test_fast_checks_pass(self):
        report = VerificationSuite(quick=True).run(only=FAST_CHECKS)
        assert [c.name for c in report.checks] == FAST_CHECKS
        assert report.passed, report.failed

    def test_report_is_reproducible_for_fixed_seed(self):
        first = VerificationSuite(quick=True, seed=3).run(only=["lipschitz_pairs", "laplacian_conservative"])
        second = VerificationSuite(quick=True, seed=3).run(only=["lipschitz_pairs", "laplacian_conservative"])
        assert [c.value for c in first.checks] == [c.value for c in second.checks]

    def test_rerun_writes_identical_csv(self, tmp_path):
        checks = ["root_count", "lipschitz_pairs"]
        first = exporters.write_verification_csv(tmp_path / "a.csv", VerificationSuite(quick=True, seed=0).run(only=checks))
        second = exporters.write_verification_csv(tmp_path / "b.csv", VerificationSuite(quick=True, seed=0).run(only=checks))
        assert first.read_bytes() == second.read_bytes()
        assert first.read_text(encoding="utf-8").splitlines()[0] == "check,passed,value,limit"

    @pytest.mark.slow
    def test_quick_suite_passes(self):
        report = VerificationSuite(quick=True).run()
        assert report.passed, report.failed
        assert report.quick

    def test_perturbed_laplacian_is_caught(self):
        """Нулевые фиктивные ячейки ломают консервативность и порядок аппроксимации."""
        suite = VerificationSuite(quick=True, laplacian=perturbed_laplacian)
        report = suite.run(only=["laplacian_conservative", "laplacian_order"])
        assert not report.passed
        assert set(report.failed) == {"laplacian_conservative", "laplacian_order"}

    def test_raising_check_is_reported_as_failure(self):
        def broken(values, grid):
            raise ZeroDivisionError("boom")

        report = VerificationSuite(quick=True, laplacian=broken).run(only=["laplacian_conservative"])
        check = report.checks[0]
        assert not check.passed
        assert math.isnan(check.value)
        assert check.detail.startswith("ZeroDivisionError")


class TestPerturbedLaplacian:

    def test_agrees_away_from_boundary(self):
        grid = Grid(nx=10, ny=10)
        values = np.random.default_rng(4).normal(size=grid.shape)
        np.testing.assert_allclose(
            perturbed_laplacian(values, grid)[1:-1, 1:-1],
            apply_laplacian(values, grid)[1:-1, 1:-1],
            rtol=1e-12,
        )

    def test_loses_mass(self):
        grid = Grid(nx=10, ny=10)
        assert abs(perturbed_laplacian(np.ones(grid.shape), grid).sum()) > 1.0
