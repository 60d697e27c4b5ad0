from unittest.mock import patch

import pytest

import main
from error_codes import ErrorCodes


def _run(tmp_path, *args) -> int:
    """Запускает main.main с логом и результатами во временной директории, возвращает код выхода."""
    argv = ["--log-file", str(tmp_path / "run.log"), "--quiet", *args]
    with pytest.raises(SystemExit) as exc_info:
        main.main(argv)
    return exc_info.value.code


def _manifest(out_dir) -> dict:
    entries = {}
    for line in (out_dir / "manifest.txt").read_text(encoding="utf-8").splitlines():
        key, value = line.split(" = ", 1)
        entries[key] = value
    return entries


class TestStationaryCommand:

    def test_reference_root(self, tmp_path, isolated_env, capsys):
        out = tmp_path / "out"
        code = _run(tmp_path, "stationary", "--rho", "0.7", "--a0", "0.25", "--a1", "0.5", "--eps", "0.35", "--out", str(out))
        assert code == ErrorCodes.SUCCESS
        assert "admissible = 0.310743" in capsys.readouterr().out

        manifest = _manifest(out)
        assert abs(float(manifest["result.admissible"]) - 0.3107435) < 1e-6
        assert manifest["output.0"] == "series/stationary_roots.csv"
        assert (out / "series" / "stationary_roots.csv").exists()

    def test_zero_epsilon(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        assert _run(tmp_path, "stationary", "--eps", "0", "--out", str(out)) == ErrorCodes.SUCCESS
        assert float(_manifest(out)["result.admissible"]) == pytest.approx(0.7, abs=1e-12)

    def test_sweep_and_profile(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        assert _run(tmp_path, "stationary", "--sweep", "0:0.35:5", "--profile", "--out", str(out)) == ErrorCodes.SUCCESS
        sweep = (out / "series" / "eps_sweep.csv").read_text(encoding="utf-8").splitlines()
        assert sweep[0] == "eps,root_low,root_mid,root_high,admissible,residual"
        assert len(sweep) == 1 + 5
        assert (out / "series" / "cubic_profile.csv").exists()

    @pytest.mark.parametrize("args", [
        ["--a0", "0.4"],
        ["--sigma", "1"],
        ["--rho", "1.5"],
    ])
    def test_parameter_gate(self, tmp_path, isolated_env, args):
        code = _run(tmp_path, "stationary", *args, "--out", str(tmp_path / "out"))
        assert code == ErrorCodes.PARAMETER_ERROR
        assert not (tmp_path / "out" / "manifest.txt").exists()

    def test_lenient_accepts_unit_sigma(self, tmp_path, isolated_env):
        assert _run(tmp_path, "stationary", "--sigma", "1", "--lenient", "--out", str(tmp_path / "out")) == ErrorCodes.SUCCESS


class TestEvolveCommand:

    def test_constant_run_writes_fields_and_series(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        code = _run(
            tmp_path, "evolve", "--grid", "8x8", "--T", "0.1", "--dt", "0.01",
            "--init", "constant:0.6,0.4", "--out", str(out),
        )
        assert code == ErrorCodes.SUCCESS
        for name in ("u_t0.csv", "u_t0.1.csv", "v_t0.pgm", "v_t0.1.json"):
            assert (out / "fields" / name).exists(), name
        assert (out / "series" / "diagnostics.csv").exists()

        manifest = _manifest(out)
        assert manifest["result.steps"] == "10"
        assert manifest["result.stop_reason"] == "horizon"
        assert float(manifest["result.mass_drift_max"]) < 1e-12
        for key, value in manifest.items():
            if key.startswith("output."):
                assert (out / value).exists()

    def test_stationary_init_stops_at_once(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        code = _run(
            tmp_path, "evolve", "--grid", "8x8", "--T", "1", "--dt", "0.1",
            "--init", "stationary", "--stop-threshold", "1e-3", "--out", str(out),
        )
        assert code == ErrorCodes.SUCCESS
        manifest = _manifest(out)
        assert manifest["result.stop_reason"] == "threshold"
        assert manifest["result.steps"] == "0"

    def test_hypothesis_error_policy(self, tmp_path, isolated_env):
        code = _run(
            tmp_path, "evolve", "--grid", "8x8", "--T", "0.1", "--dt", "0.01",
            "--init", "constant:0.4,0.6", "--hypothesis-check", "error", "--out", str(tmp_path / "out"),
        )
        assert code == ErrorCodes.HYPOTHESIS_VIOLATED

    def test_documented_preset_name(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        code = _run(
            tmp_path, "evolve", "--preset", "paper-fig2", "--grid", "8x8", "--T", "0.01", "--dt", "0.001", "--out", str(out),
        )
        assert code == ErrorCodes.SUCCESS
        manifest = _manifest(out)
        assert manifest["config.init"] == "sine-mode"
        assert manifest["result.steps"] == "10"

    def test_bad_grid(self, tmp_path, isolated_env):
        assert _run(tmp_path, "evolve", "--grid", "2x8", "--out", str(tmp_path / "out")) == ErrorCodes.CONFIGURATION_ERROR

    def test_unknown_preset(self, tmp_path, isolated_env):
        assert _run(tmp_path, "evolve", "--preset", "nope", "--out", str(tmp_path / "out")) == ErrorCodes.CONFIGURATION_ERROR


class TestPicardCommand:

    def test_constant_data_certificates(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        code = _run(
            tmp_path, "picard", "--grid", "8x8", "--T", "0.2", "--dt", "0.05",
            "--init", "constant:0.6,0.4", "--out", str(out),
        )
        assert code == ErrorCodes.SUCCESS
        manifest = _manifest(out)
        assert manifest["result.converged"] == "True"
        assert manifest["result.certificates_passed"] == "True"
        summary = (out / "certificates" / "summary.csv").read_text(encoding="utf-8").splitlines()
        assert summary[0] == "n,sup_U,sup_V,sup_bound,passed"
        assert (out / "certificates" / "iteration_000.csv").exists()

    def test_data_above_mu_is_rejected(self, tmp_path, isolated_env):
        code = _run(
            tmp_path, "picard", "--grid", "8x8", "--T", "0.2", "--dt", "0.05",
            "--init", "constant:0.4,0.6", "--out", str(tmp_path / "out"),
        )
        assert code == ErrorCodes.HYPOTHESIS_VIOLATED

    def test_iteration_cap(self, tmp_path, isolated_env):
        code = _run(
            tmp_path, "picard", "--grid", "8x8", "--T", "0.2", "--dt", "0.05",
            "--init", "constant:0.6,0.4", "--n-max", "1", "--tol", "1e-9", "--out", str(tmp_path / "out"),
        )
        assert code == ErrorCodes.NO_CONVERGENCE


class TestVerifyCommand:

    @pytest.mark.slow
    def test_quick_suite(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        assert _run(tmp_path, "verify", "--quick", "--out", str(out)) == ErrorCodes.SUCCESS
        assert _manifest(out)["result.failed"] == "none"

    @pytest.mark.slow
    def test_perturbed_laplacian_fails(self, tmp_path, isolated_env):
        out = tmp_path / "out"
        assert _run(tmp_path, "verify", "--quick", "--perturb-laplacian", "--out", str(out)) == ErrorCodes.VERIFICATION_FAILED
        report = (out / "series" / "verify.csv").read_text(encoding="utf-8")
        assert "laplacian_conservative,fail" in report


class TestDependencies:

    def test_missing_dependency_exit_code(self, tmp_path, isolated_env):
        missing = [{"module_name": "scipy", "friendly_name": "SciPy", "install_command": "pip install scipy"}]
        with patch("src.application.check_dependencies", return_value=missing):
            code = _run(tmp_path, "stationary", "--out", str(tmp_path / "out"))
        assert code == ErrorCodes.MISSING_DEPENDENCY
