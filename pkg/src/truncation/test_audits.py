import numpy as np
import pytest

from src.sde.sampling import uniform_ball
from src.sde.systems import build_preset
from src.truncation.audits import (
    check_truncated_dissipativity,
    check_truncated_khasminskii,
    check_truncated_lipschitz,
)
from src.truncation.policies import power_policy
from src.utils.errors import InputError

DELTA = 2.0 ** -8


class TestTruncatedLipschitz:

    def test_example2_bound_has_no_violations(self):
        preset = build_preset("example2")
        # literal radius delta^(-2 eps / 25) with eps = 0.1
        policy = power_policy(0.008).with_growth(preset.k_plain, preset.k_bar)
        ball = 2.0 * policy.radius(DELTA)
        xs = uniform_ball(10_000, 2, ball, seed=31)
        ys = uniform_ball(10_000, 2, ball, seed=32)
        report = check_truncated_lipschitz(preset.system, policy, DELTA, xs, ys)
        assert report.passed
        assert report.name == "truncated_lipschitz"
        assert report.samples_tested == 10_000

    def test_needs_growth_function(self):
        preset = build_preset("example3-consistent")
        xs = uniform_ball(10, 2, 1.0, seed=1)
        with pytest.raises(InputError):
            check_truncated_lipschitz(preset.system, preset.policy, DELTA, xs, xs)

    def test_paired_shapes(self):
        preset = build_preset("example2")
        with pytest.raises(InputError):
            check_truncated_lipschitz(preset.system, preset.policy, DELTA,
                                      uniform_ball(10, 2, seed=1), uniform_ball(11, 2, seed=2))


class TestTruncatedGrowthConditions:

    def test_khasminskii_carries_over(self):
        preset = build_preset("example2")
        policy = power_policy(0.008).with_growth(preset.k_plain, preset.k_bar)
        samples = uniform_ball(10_000, 2, 10.0, seed=3)
        report = check_truncated_khasminskii(preset.system, policy, DELTA, preset.assumptions, samples)
        assert report.passed

    def test_dissipativity_carries_over(self):
        preset = build_preset("example3-consistent")
        samples = uniform_ball(10_000, 2, 10.0, seed=4)
        report = check_truncated_dissipativity(preset.system, preset.policy, DELTA, preset.assumptions, samples)
        assert report.passed
        assert report.name == "truncated_dissipativity"

    def test_scaling_outside_the_ball(self):
        # <x, f~> + 3 |g~|^2 = (|x|/h)^2 (<pi, f(pi)> + 3 |g(pi)|^2)
        preset = build_preset("example3-consistent")
        sys = preset.system
        h = preset.policy.radius(DELTA)
        x = np.array([[3.0 * h, 0.0]])
        report = check_truncated_dissipativity(sys, preset.policy, DELTA, preset.assumptions, x)
        pi = np.array([h, 0.0])
        inner = pi @ sys.drift(pi) + 3.0 * np.sum(sys.diffusion(pi) ** 2)
        assert report.worst_margin == pytest.approx(9.0 * inner + 9.0 * h * h)
