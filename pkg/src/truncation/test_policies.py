import math

import numpy as np
import pytest

from src.sde.systems import build_preset
from src.truncation.policies import (
    example1_l,
    inverse_policy,
    invert_radius,
    policy_from_spec,
    power_policy,
    validate_policy,
)
from src.types.policy import TruncationPolicy
from src.utils.errors import ConfigError, NoSolutionError, PolicyError

LADDER = [2.0 ** -11, 2.0 ** -10, 2.0 ** -9, 2.0 ** -8]


class TestPowerPolicy:

    def test_values(self):
        policy = power_policy(0.25)
        assert policy.radius(2.0 ** -8) == pytest.approx(4.0)
        assert policy.label == "pow(0.25)"
        assert power_policy(0.5, scale=3).label == "3*pow(0.5)"

    def test_strictly_decreasing(self):
        policy = power_policy(1.0 / 13.0)
        radii = [policy.radius(d) for d in sorted(LADDER)]
        assert all(a > b for a, b in zip(radii, radii[1:]))

    def test_invalid(self):
        with pytest.raises(PolicyError):
            power_policy(0.0)
        with pytest.raises(PolicyError):
            power_policy(0.5, scale=-1.0)
        with pytest.raises(PolicyError):
            power_policy(0.5, delta_star=2.0)


class TestInvertRadius:

    def test_reciprocal(self):
        assert invert_radius(lambda r: 1.0 / r, 0.25) == pytest.approx(4.0, rel=1e-12)

    def test_exponential(self):
        assert invert_radius(lambda r: math.exp(-r), math.exp(-3.0)) == pytest.approx(3.0, rel=1e-12)

    def test_bracket_below_start(self):
        assert invert_radius(lambda r: 1.0 / r, 16.0) == pytest.approx(1.0 / 16.0, rel=1e-12)

    def test_example1_round_trip(self):
        l = example1_l(0.5)
        target = 2.0 ** -10
        r = invert_radius(l, target)
        assert l(r) == pytest.approx(target, rel=1e-12)

    def test_no_solution(self):
        with pytest.raises(NoSolutionError):
            invert_radius(lambda r: 1.0, 0.5)
        with pytest.raises(NoSolutionError):
            invert_radius(lambda r: 0.1, 0.5)

    def test_target_must_be_positive(self):
        with pytest.raises(PolicyError):
            invert_radius(lambda r: 1.0 / r, 0.0)


class TestExample1L:

    def test_decreasing_and_finite(self):
        l = example1_l(0.5)
        values = [l(r) for r in (0.5, 1.0, 2.0, 50.0, 500.0)]
        assert all(a > b for a, b in zip(values, values[1:]))
        assert all(v >= 0 for v in values)

    def test_epsilon_range(self):
        with pytest.raises(PolicyError):
            example1_l(1.5)

    def test_inverse_policy_caches(self):
        calls = []

        def l(r):
            calls.append(r)
            return 1.0 / r

        policy = inverse_policy(l)
        first = policy.radius(0.25)
        n_calls = len(calls)
        assert policy.radius(0.25) == first
        assert len(calls) == n_calls


class TestPolicyFromSpec:

    def test_empty_spec_uses_preset(self):
        preset = build_preset("example2")
        assert policy_from_spec({}, preset) is preset.policy

    def test_empty_spec_without_preset(self):
        with pytest.raises(ConfigError):
            policy_from_spec({})

    def test_pow_attaches_growth(self):
        preset = build_preset("example2")
        policy = policy_from_spec({"h": "pow", "exponent": 0.008}, preset)
        assert policy.label == "pow(0.008)"
        assert policy.k_bar(1.0) == 81.0

    def test_exponent_implies_pow(self):
        assert policy_from_spec({"exponent": 0.25}).radius(2.0 ** -8) == pytest.approx(4.0)

    def test_inverse(self):
        policy = policy_from_spec({"h": "inverse", "l": "example1", "epsilon": 0.5})
        assert policy.label == "inverse(example1, eps=0.5)"
        assert policy.radius(2.0 ** -10) > policy.radius(2.0 ** -8)

    @pytest.mark.parametrize("spec", [
        {"h": "pow"},
        {"h": "spline"},
        {"h": "inverse", "l": "unknown"},
    ])
    def test_bad_specs(self, spec):
        with pytest.raises(ConfigError):
            policy_from_spec(spec)


class TestValidatePolicy:

    def test_example3_trend_decreases(self):
        policy = build_preset("example3-consistent").policy
        report = validate_policy(policy, LADDER)
        assert report.monotone_ok
        assert report.convergence_ok is None
        values = [v for _, v in report.stability_trend]
        expected = [18.0 ** 6 * d ** (1.0 / 13.0) for d in sorted(LADDER)]
        np.testing.assert_allclose(values, expected, rtol=1e-9)
        assert values == sorted(values)
        assert "no K_bar" in report.notes

    def test_example2_literal_policy_violates_convergence_constraint(self):
        preset = build_preset("example2")
        policy = power_policy(2.0 * 0.1 / 25.0).with_growth(preset.k_plain, preset.k_bar)
        report = validate_policy(policy, [2.0 ** -8])
        assert report.convergence_ok is False
        assert report.convergence_values[0][1] == pytest.approx(127.0, rel=0.01)

    def test_rate_condition_reported(self):
        preset = build_preset("example2")
        report = validate_policy(preset.policy, LADDER, p=7, q=2)
        assert report.rate_condition_ok is not None
        bad = validate_policy(preset.policy, LADDER, p=2, q=7)
        assert bad.rate_condition_ok is None
        assert "0 < q < p" in bad.notes

    def test_non_monotone_policy(self):
        policy = TruncationPolicy(h=lambda delta: 1.0 + delta)
        report = validate_policy(policy, LADDER)
        assert not report.monotone_ok
        assert report.stability_trend == []
