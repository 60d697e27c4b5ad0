import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.cadherin_core.diagnostics import convergence_study, fit_all
from src.cadherin_core.evolve import (
    RunConfig,
    State,
    StopRule,
    Trajectory,
    check_initial_hypotheses,
    default_dt,
    euler_v_update,
    homogeneous_ode_reference,
    implicit_u_solve,
    riccati_v_update,
    run,
    step,
)
from src.cadherin_core.exceptions import HypothesisViolated, LinearSolveDiverged
from src.cadherin_core.grid import SINE_MODE_U0, SINE_MODE_V0, Field, Grid, integrate, sample_initial
from src.cadherin_core.model import derived_constants, reaction
from src.cadherin_core.stationary import normalized_stationary


def _stationary_state(params, grid) -> State:
    v_hat = normalized_stationary(params).admissible
    return State(u=Field.constant(grid, 1.0 - v_hat), v=Field.constant(grid, v_hat))


def _sine_mode(grid):
    return sample_initial(SINE_MODE_U0, grid), sample_initial(SINE_MODE_V0, grid)


def _post_transient_fits(result):
    """Регрессия трех кривых ошибок на окне [0.4 t_stop, t_stop]."""
    conv = convergence_study(result.diagnostics, result.target, threshold=1e-3)
    assert conv.stop_time == pytest.approx(result.final.t)
    return fit_all(conv, window=(0.4 * conv.stop_time, conv.stop_time))


class TestRunConfig:

    def test_dt_cannot_exceed_horizon(self, reference_params, small_grid):
        with pytest.raises(ValidationError):
            RunConfig(params=reference_params, grid=small_grid, dt=2.0, T=1.0)

    def test_step_count_rounds_up(self, reference_params, small_grid):
        assert RunConfig(params=reference_params, grid=small_grid, dt=0.3, T=1.0).n_steps == 4
        assert RunConfig(params=reference_params, grid=small_grid, dt=0.1, T=1.0).n_steps == 10

    def test_default_dt_heuristic(self):
        assert default_dt(Grid(nx=64, ny=64), 1.0) == pytest.approx((1 / 64) ** 2 / 4)
        assert default_dt(Grid(nx=8, ny=8), 0.1) == 1e-3


class TestVUpdates:

    def test_euler_formula(self, reference_params):
        v, u = np.array([0.1, 0.4]), np.array([0.6, 0.3])
        expected = v + 0.01 * reaction(u, v, reference_params)
        np.testing.assert_allclose(euler_v_update(v, u, 0.01, reference_params), expected, rtol=1e-15)

    def test_riccati_matches_fine_rk4(self, reference_params):
        u, dt = 0.6, 0.5
        v0 = np.array([0.0, 0.2, 0.4, 0.59])
        v, h = v0.copy(), dt / 5000
        for _ in range(5000):
            k1 = reaction(u, v, reference_params)
            k2 = reaction(u, v + 0.5 * h * k1, reference_params)
            k3 = reaction(u, v + 0.5 * h * k2, reference_params)
            k4 = reaction(u, v + h * k3, reference_params)
            v = v + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        np.testing.assert_allclose(riccati_v_update(v0, np.full(4, u), dt, reference_params), v, atol=1e-10)

    def test_riccati_is_a_semigroup(self, reference_params):
        rng = np.random.default_rng(4)
        u = rng.uniform(0.0, 3.5, 50)
        v = rng.uniform(0.0, 0.59, 50)
        half = riccati_v_update(riccati_v_update(v, u, 0.35, reference_params), u, 0.35, reference_params)
        np.testing.assert_allclose(half, riccati_v_update(v, u, 0.7, reference_params), atol=1e-13)

    def test_riccati_pure_detachment(self, reference_params):
        v = np.array([0.1, 0.5])
        expected = v * math.exp(-reference_params.epsilon * 0.2)
        np.testing.assert_allclose(riccati_v_update(v, np.zeros(2), 0.2, reference_params), expected, rtol=1e-14)

    def test_riccati_stays_in_box(self, reference_params):
        consts = derived_constants(reference_params)
        rng = np.random.default_rng(8)
        u = rng.uniform(0.0, consts.lambda_, 1000)
        v = rng.uniform(0.0, consts.mu, 1000)
        for dt in (1e-3, 1.0, 100.0):
            updated = riccati_v_update(v, u, dt, reference_params)
            assert np.all(updated >= -1e-15)
            assert np.all(updated <= consts.mu + 1e-12)


class TestStep:

    def test_stationary_pair_is_fixed(self, reference_params, small_grid):
        cfg = RunConfig(params=reference_params, grid=small_grid, dt=1e-2, T=1.0)
        state = _stationary_state(reference_params, small_grid)
        moved = step(state, cfg)
        assert np.max(np.abs(moved.u.values - state.u.values)) < 1e-12
        assert np.max(np.abs(moved.v.values - state.v.values)) < 1e-12
        assert moved.t == pytest.approx(1e-2)

    @pytest.mark.parametrize("scheme", ["riccati-exact", "explicit-euler"])
    def test_mass_is_conserved(self, reference_params, scheme):
        grid = Grid(nx=16, ny=16)
        rng = np.random.default_rng(6)
        state = State(
            u=Field.of(grid, rng.uniform(0.0, 1.0, grid.shape)),
            v=Field.of(grid, rng.uniform(0.0, 0.5, grid.shape)),
        )
        cfg = RunConfig(params=reference_params, grid=grid, dt=1e-2, T=1.0, scheme_v=scheme)
        before = integrate(state.u) + integrate(state.v)
        for _ in range(20):
            state = step(state, cfg)
        assert integrate(state.u) + integrate(state.v) == pytest.approx(before, abs=1e-12)

    def test_flux_closed_u_against_linear_solve(self, reference_params, small_grid):
        state = State(u=Field.constant(small_grid, 0.6), v=Field.constant(small_grid, 0.4))
        gaps = {}
        for scheme in ("explicit-euler", "riccati-exact"):
            for dt in (0.1, 0.05):
                cfg = RunConfig(params=reference_params, grid=small_grid, dt=dt, T=1.0, scheme_v=scheme)
                u_star = implicit_u_solve(state.u.values, state.v.values, state.v.values, reference_params, small_grid, dt)
                gaps[scheme, dt] = float(np.max(np.abs(step(state, cfg).u.values - u_star)))
        assert gaps["explicit-euler", 0.1] < 1e-9
        assert 1e-5 < gaps["riccati-exact", 0.1] < 1e-3
        assert gaps["riccati-exact", 0.1] / gaps["riccati-exact", 0.05] > 3.0

    def test_grid_mismatch(self, reference_params, small_grid):
        cfg = RunConfig(params=reference_params, grid=Grid(nx=4, ny=4), dt=1e-2, T=1.0)
        with pytest.raises(ValueError):
            step(_stationary_state(reference_params, small_grid), cfg)

    def test_cg_iteration_cap(self, reference_params):
        grid = Grid(nx=16, ny=16)
        rng = np.random.default_rng(9)
        state = State(
            u=Field.of(grid, rng.uniform(0.0, 1.0, grid.shape)),
            v=Field.of(grid, rng.uniform(0.0, 0.5, grid.shape)),
        )
        cfg = RunConfig(params=reference_params, grid=grid, dt=0.5, T=1.0, cg_rtol=1e-14, cg_maxiter=1)
        with pytest.raises(LinearSolveDiverged):
            step(state, cfg)


class TestHypotheses:

    def test_sine_mode_data_exceed_mu(self, reference_params):
        f, g = _sine_mode(Grid(nx=48, ny=48))
        violations = check_initial_hypotheses(f, g, derived_constants(reference_params))
        assert len(violations) == 1
        assert violations[0].startswith("max g")

    def test_error_policy(self, reference_params):
        grid = Grid(nx=48, ny=48)
        cfg = RunConfig(params=reference_params, grid=grid, dt=0.1, T=0.1, hypothesis_check="error")
        with pytest.raises(HypothesisViolated) as exc_info:
            run(cfg, _sine_mode(grid))
        assert exc_info.value.violations

    def test_warn_policy(self, reference_params, caplog):
        grid = Grid(nx=48, ny=48)
        cfg = RunConfig(params=reference_params, grid=grid, dt=0.1, T=0.1)
        run(cfg, _sine_mode(grid))
        assert "invariant region" in caplog.text


class TestRun:

    def test_constant_data_follow_ode_reference(self, reference_params, small_grid):
        cfg = RunConfig(params=reference_params, grid=small_grid, dt=1e-4, T=1.0, snapshot_every=10_000)
        result = run(cfg, (Field.constant(small_grid, 0.6), Field.constant(small_grid, 0.4)))
        u_ref, v_ref = homogeneous_ode_reference(0.6, 0.4, reference_params, T=1.0, dt_fine=1e-5)
        assert result.final.t == pytest.approx(1.0)
        assert np.max(np.abs(result.final.u.values - u_ref)) < 1e-5
        assert np.max(np.abs(result.final.v.values - v_ref)) < 1e-5

    def test_first_order_in_time(self, reference_params, small_grid):
        u_ref, v_ref = homogeneous_ode_reference(0.6, 0.4, reference_params, T=1.0, dt_fine=1e-4)
        errors = []
        for dt in (4e-2, 2e-2, 1e-2):
            cfg = RunConfig(params=reference_params, grid=small_grid, dt=dt, T=1.0)
            final = run(cfg, (Field.constant(small_grid, 0.6), Field.constant(small_grid, 0.4))).final
            errors.append(float(np.max(np.abs(final.v.values - v_ref))))
        orders = [math.log2(errors[i] / errors[i + 1]) for i in range(2)]
        assert min(orders) > 0.9

    def test_stationary_data_stay_put(self, reference_params, small_grid):
        cfg = RunConfig(params=reference_params, grid=small_grid, dt=1e-2, T=1.0)
        state = _stationary_state(reference_params, small_grid)
        series = run(cfg, (state.u, state.v)).diagnostics
        for column in (series.u_min, series.u_max, series.v_min, series.v_max, series.mass):
            assert np.max(np.abs(column - column[0])) < 1e-10

    def test_invariant_region_is_kept(self, reference_params):
        grid = Grid(nx=16, ny=16)
        consts = derived_constants(reference_params)
        x, y = grid.cell_centers()
        f = Field.of(grid, 0.6 + 0.3 * np.cos(np.pi * x) * np.cos(np.pi * y))
        g = Field.of(grid, 0.3 + 0.2 * np.sin(np.pi * x) * np.cos(2 * np.pi * y))
        cfg = RunConfig(params=reference_params, grid=grid, dt=1e-2, T=2.0, hypothesis_check="error")
        series = run(cfg, (f, g)).diagnostics
        assert np.min(series.u_min) >= -1e-8
        assert np.max(series.u_max) <= consts.lambda_ + 1e-8
        assert np.min(series.v_min) >= -1e-8
        assert np.max(series.v_max) <= consts.mu + 1e-8

    def test_snapshots(self, reference_params, small_grid):
        cfg = RunConfig(params=reference_params, grid=small_grid, dt=0.1, T=1.0, snapshot_every=3, capture_times=(0.5,))
        result = run(cfg, (Field.constant(small_grid, 0.6), Field.constant(small_grid, 0.4)))
        np.testing.assert_allclose(result.trajectory.times, [0.0, 0.3, 0.5, 0.6, 0.9, 1.0])
        assert len(result.diagnostics) == 11
        assert result.steps == 10
        assert result.stop_reason == "horizon"
        assert result.trajectory.state(-1).t == pytest.approx(1.0)

    def test_stop_at_start_when_already_converged(self, reference_params, small_grid):
        state = _stationary_state(reference_params, small_grid)
        cfg = RunConfig(params=reference_params, grid=small_grid, dt=0.1, T=1.0, stop_rule=StopRule())
        result = run(cfg, (state.u, state.v))
        assert result.steps == 0
        assert result.stop_reason == "threshold"
        assert result.target == pytest.approx(state.v.values[0, 0])
        assert len(result.trajectory) == 1

    def test_sine_mode_converges_to_stationary_root(self, reference_params):
        grid = Grid(nx=32, ny=32)
        cfg = RunConfig(
            params=reference_params, grid=grid, dt=1e-2, T=20.0,
            snapshot_every=1000, stop_rule=StopRule(threshold=1e-3), hypothesis_check="off",
        )
        result = run(cfg, _sine_mode(grid))
        assert result.stop_reason == "threshold"
        assert 5.0 < result.final.t < 20.0

        series = result.diagnostics
        assert np.max(np.abs(series.mass - series.mass[0])) < 1e-8

        default_fits = fit_all(convergence_study(series, result.target, threshold=1e-3))
        assert default_fits["err_max"].residual_std < 5e-2
        fits = _post_transient_fits(result)
        assert set(fits) == {"err_max", "err_min", "err_mean"}
        for name, fit in fits.items():
            assert fit.slope < 0.0, name
            assert fit.residual_std <= 5e-2, name

    @pytest.mark.slow
    def test_sine_mode_full_resolution(self, reference_params):
        grid = Grid(nx=128, ny=128)
        cfg = RunConfig(
            params=reference_params, grid=grid, dt=1e-3, T=30.0,
            snapshot_every=10_000, stop_rule=StopRule(threshold=1e-3), hypothesis_check="off",
        )
        result = run(cfg, _sine_mode(grid))
        assert result.stop_reason == "threshold"
        series = result.diagnostics
        assert np.max(np.abs(series.mass - series.mass[0])) < 1e-8
        fits = _post_transient_fits(result)
        assert set(fits) == {"err_max", "err_min", "err_mean"}
        for name, fit in fits.items():
            assert fit.slope < 0.0, name
            assert fit.residual_std <= 5e-2, name


class TestTrajectory:

    def test_frames_must_match_times(self, small_grid):
        with pytest.raises(ValidationError):
            Trajectory(
                grid=small_grid,
                times=np.array([0.0, 1.0]),
                u_frames=np.zeros((3,) + small_grid.shape),
                v_frames=np.zeros((3,) + small_grid.shape),
            )

    def test_from_states(self, reference_params, small_grid):
        states = [_stationary_state(reference_params, small_grid).model_copy(update={"t": t}) for t in (0.0, 0.5)]
        trajectory = Trajectory.from_states(states)
        assert len(trajectory) == 2
        assert trajectory.u_frames.shape == (2, 8, 8)


class TestHomogeneousReference:

    def test_origin_is_fixed(self, reference_params):
        assert homogeneous_ode_reference(0.0, 0.0, reference_params, T=5.0, dt_fine=1e-2) == (0.0, 0.0)

    def test_sum_is_conserved_and_limit_is_stationary(self, reference_params):
        u, v = homogeneous_ode_reference(0.6, 0.4, reference_params, T=20.0, dt_fine=1e-3)
        v_hat = normalized_stationary(reference_params).admissible
        assert u + v == pytest.approx(1.0, abs=1e-10)
        assert v == pytest.approx(v_hat, abs=1e-5)

    def test_zero_horizon(self, reference_params):
        assert homogeneous_ode_reference(0.6, 0.4, reference_params, T=0.0, dt_fine=1e-3) == (0.6, 0.4)
