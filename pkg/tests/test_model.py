import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.cadherin_core.exceptions import ParameterValidationError
from src.cadherin_core.model import (
    Params,
    binding_equilibrium,
    check_invariant_box,
    check_params,
    derived_constants,
    lipschitz_constant,
    reaction,
    reaction_identity_residual,
    reaction_jacobian,
    validate_params,
)
from src.cadherin_core.verification import REFERENCE_PARAMS, REFERENCE_ROOT


class TestValidateParams:

    def test_reference_set_is_accepted_in_lenient_mode_with_warning(self, caplog):
        """sigma = 1 в мягком режиме дает предупреждение, а не ошибку."""
        with caplog.at_level(logging.WARNING):
            p = validate_params(REFERENCE_PARAMS, mode="lenient")
        assert p.sigma == 1.0
        assert any("sigma" in record.getMessage() for record in caplog.records)

    def test_reference_set_is_rejected_in_strict_mode(self):
        with pytest.raises(ParameterValidationError) as exc_info:
            validate_params(REFERENCE_PARAMS, mode="strict")
        assert exc_info.value.kinds == ["StrictRangeViolated"]
        assert exc_info.value.issues[0].parameter == "sigma"

    def test_eps_alias_is_accepted(self):
        p = validate_params({"rho": 0.7, "sigma": 0.5, "a0": 0.25, "a1": 0.5, "eps": 0.35})
        assert p.epsilon == 0.35

    def test_gregarious_condition(self):
        """a0 = 0.4 >= rho * a1 = 0.35."""
        with pytest.raises(ParameterValidationError) as exc_info:
            validate_params({**REFERENCE_PARAMS, "sigma": 0.5, "a0": 0.4})
        assert "GregariousConditionViolated" in exc_info.value.kinds

    def test_rho_above_one(self):
        with pytest.raises(ParameterValidationError) as exc_info:
            validate_params({**REFERENCE_PARAMS, "rho": 1.2}, mode="lenient")
        assert "RhoOutOfRange" in exc_info.value.kinds

    def test_rho_equal_to_one_is_allowed_in_lenient_mode(self):
        p = validate_params({**REFERENCE_PARAMS, "rho": 1.0}, mode="lenient")
        assert p.rho == 1.0

    def test_all_issues_are_reported_together(self):
        errors, _ = check_params({"rho": 2.0, "sigma": -1.0, "a0": 0.25, "a1": 0.5, "epsilon": 0.35}, mode="lenient")
        kinds = {issue.kind for issue in errors}
        assert {"RhoOutOfRange", "NonPositiveParameter"} <= kinds

    def test_missing_and_non_numeric_values(self):
        with pytest.raises(ParameterValidationError) as exc_info:
            validate_params({"rho": 0.7, "sigma": "abc", "a0": 0.25, "a1": 0.5})
        assert set(exc_info.value.kinds) == {"InvalidValue", "MissingParameter"}

    def test_zero_epsilon_needs_explicit_permission(self):
        raw = {**REFERENCE_PARAMS, "sigma": 0.5, "epsilon": 0.0}
        with pytest.raises(ParameterValidationError) as exc_info:
            validate_params(raw)
        assert exc_info.value.kinds == ["NonPositiveParameter"]
        assert validate_params(raw, allow_zero_epsilon=True).epsilon == 0.0

    def test_params_are_immutable(self, reference_params):
        with pytest.raises(ValidationError):
            reference_params.rho = 0.5

    def test_params_model_rejects_gregarious_violation(self):
        with pytest.raises(ValidationError):
            Params(rho=0.7, sigma=1.0, a0=0.5, a1=0.5, epsilon=0.35)


class TestDerivedConstants:

    def test_reference_values(self, reference_params):
        consts = derived_constants(reference_params)
        assert consts.lambda_ == pytest.approx(3.5, rel=1e-12)
        assert consts.mu == pytest.approx(math.sqrt(0.35), rel=1e-12)
        assert consts.L == pytest.approx(4.0 * 3.5 ** 2, rel=1e-12)
        # Максимум |dQ/ds| достигается в углу (lambda, mu) и равен lambda * mu.
        assert consts.k == pytest.approx(3.5 * math.sqrt(0.35), rel=1e-12)

    def test_lambda_alias_in_dump(self, reference_params):
        dumped = derived_constants(reference_params).model_dump(by_alias=True)
        assert dumped["lambda"] == pytest.approx(3.5)

    def test_k_matches_brute_force_scan(self, reference_params):
        consts = derived_constants(reference_params)
        r, s = np.meshgrid(
            np.linspace(0.0, consts.lambda_, 1001),
            np.linspace(0.0, consts.mu, 1001),
            indexing="ij",
        )
        d_r, d_s = reaction_jacobian(r, s, reference_params)
        scanned = max(float(np.max(np.abs(d_r))), float(np.max(np.abs(d_s))), 1.0)
        assert consts.k == pytest.approx(scanned, abs=1e-6)

    def test_k_is_at_least_one(self):
        p = Params(rho=0.2, sigma=0.1, a0=0.01, a1=0.1, epsilon=0.01)
        assert derived_constants(p).k >= 1.0

    def test_lipschitz_inequality_on_random_pairs(self, reference_params):
        consts = derived_constants(reference_params)
        rng = np.random.default_rng(7)
        r1, r2 = rng.uniform(0.0, consts.lambda_, (2, 10_000))
        s1, s2 = rng.uniform(0.0, consts.mu, (2, 10_000))
        lhs = np.abs(reaction(r1, s1, reference_params) - reaction(r2, s2, reference_params))
        rhs = consts.k * (np.abs(r1 - r2) + np.abs(s1 - s2))
        assert np.all(lhs <= rhs + 1e-12)

    def test_degenerate_box_is_rejected(self, reference_params):
        with pytest.raises(ValueError):
            lipschitz_constant(reference_params, 0.0, 0.5)

    def test_domain_area_scales_L(self, reference_params):
        assert derived_constants(reference_params, domain_area=2.0).L == pytest.approx(2.0 * 49.0)
        with pytest.raises(ValueError):
            derived_constants(reference_params, domain_area=0.0)


class TestReaction:

    def test_zero_at_origin(self, reference_params):
        assert reaction(0.0, 0.0, reference_params) == 0.0

    def test_vanishes_at_box_corner(self, reference_params):
        consts = derived_constants(reference_params)
        assert abs(reaction(consts.lambda_, consts.mu, reference_params)) < 1e-14

    def test_vanishes_at_stationary_pair(self, reference_params):
        v_hat = REFERENCE_ROOT
        assert abs(reaction(1.0 - v_hat, v_hat, reference_params)) < 1e-5

    def test_broadcasts_over_arrays(self, reference_params):
        r = np.array([0.0, 1.0, 2.0])
        s = np.array([0.1, 0.2, 0.3])
        expected = [(0.7 - si) * (0.25 + 0.5 * si) * ri - 0.35 * si for ri, si in zip(r, s)]
        np.testing.assert_allclose(reaction(r, s, reference_params), expected, rtol=1e-15)

    def test_identity_on_lambda_line(self, reference_params):
        v = np.linspace(-1.0, 2.0, 301)
        assert np.max(np.abs(reaction_identity_residual(v, reference_params))) < 1e-12


class TestReactionJacobian:

    def test_closed_form_at_origin(self, reference_params):
        d_r, d_s = reaction_jacobian(0.0, 0.0, reference_params)
        assert d_r == pytest.approx(0.175)
        assert d_s == pytest.approx(-0.35)

    def test_matches_central_differences(self, reference_params):
        consts = derived_constants(reference_params)
        rng = np.random.default_rng(3)
        r = rng.uniform(0.0, consts.lambda_, 100)
        s = rng.uniform(0.0, consts.mu, 100)
        h = 1e-6
        fd_r = (reaction(r + h, s, reference_params) - reaction(r - h, s, reference_params)) / (2 * h)
        fd_s = (reaction(r, s + h, reference_params) - reaction(r, s - h, reference_params)) / (2 * h)
        d_r, d_s = reaction_jacobian(r, s, reference_params)
        assert np.all(np.abs(fd_r - d_r) <= 1e-6 * np.maximum(1.0, np.abs(d_r)))
        assert np.all(np.abs(fd_s - d_s) <= 1e-6 * np.maximum(1.0, np.abs(d_s)))

    def test_signs_inside_invariant_box(self, reference_params):
        consts = derived_constants(reference_params)
        r, s = np.meshgrid(np.linspace(0.0, consts.lambda_, 101), np.linspace(0.0, consts.mu, 101), indexing="ij")
        d_r, d_s = reaction_jacobian(r, s, reference_params)
        assert np.all(d_r >= 0.0)
        assert np.all(d_s <= 1e-15)


class TestInvariantBox:

    def test_inside(self, reference_params):
        consts = derived_constants(reference_params)
        box = check_invariant_box(np.array([0.0, 3.5]), np.array([0.0, 0.5]), consts)
        assert box.ok
        assert box.violations == []

    def test_outside_reports_each_violation(self, reference_params):
        consts = derived_constants(reference_params)
        box = check_invariant_box(np.array([-0.1, 4.0]), np.array([0.2, 0.7]), consts)
        assert not box.ok
        assert len(box.violations) == 3

    def test_slack_absorbs_rounding(self, reference_params):
        consts = derived_constants(reference_params)
        assert check_invariant_box(np.array([-1e-10]), np.array([0.1]), consts).ok


class TestBindingEquilibrium:

    def test_roots_are_zeros_of_q(self, reference_params):
        u = np.linspace(0.01, 3.5, 50)
        r_low, r_high = binding_equilibrium(u, reference_params)
        assert np.all(r_low <= 0.0)
        assert np.all(r_high >= 0.0)
        assert np.max(np.abs(reaction(u, r_high, reference_params))) < 1e-13
        assert np.max(np.abs(reaction(u, r_low, reference_params))) < 1e-12

    def test_zero_u(self, reference_params):
        r_low, r_high = binding_equilibrium(0.0, reference_params)
        assert r_high == 0.0
        assert r_low == -math.inf

    def test_upper_root_reaches_mu_at_lambda(self, reference_params):
        consts = derived_constants(reference_params)
        _, r_high = binding_equilibrium(consts.lambda_, reference_params)
        assert r_high == pytest.approx(consts.mu, rel=1e-12)
