import numpy as np
import pytest

from src.experiments.stability import log_mean_moment, moment_exponent, tail_average
from src.sde.systems import build_preset
from src.types.reports import StabilityConfig
from src.utils.errors import InputError


def make_config(label, params=None, **overrides):
    preset = build_preset(label, params)
    settings = dict(system=preset.system, policy=preset.policy, x0=preset.x0, p=2.0,
                    delta=2.0 ** -4, n_steps=64, n_paths=20, batch_size=5)
    settings.update(overrides)
    return StabilityConfig(**settings)


class TestLogMeanMoment:

    def test_far_below_the_smallest_float(self):
        assert log_mean_moment(np.full(10, np.exp(-500.0)), 2) == pytest.approx(-1000.0)

    def test_matches_direct_mean(self):
        values = np.array([0.5, -2.0, 3.0])
        assert log_mean_moment(values, 3) == pytest.approx(np.log(np.mean(np.abs(values) ** 3)))

    def test_zeros(self):
        assert log_mean_moment(np.zeros(3), 2) == -np.inf

    def test_empty(self):
        with pytest.raises(InputError):
            log_mean_moment([], 2)


class TestTailAverage:

    def test_last_quartile(self):
        assert tail_average(np.arange(1.0, 9.0)) == 7.5

    def test_skips_non_finite(self):
        assert tail_average(np.array([1.0, 2.0, 3.0, 4.0, np.nan, 6.0, 7.0, 8.0])) == 7.5
        assert tail_average(np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, np.nan])) == 7.0

    def test_nothing_finite(self):
        assert tail_average(np.array([1.0, 2.0, 3.0, np.nan])) is None


class TestMomentExponent:

    def test_deterministic_decay(self):
        # Y_k = (1 - delta)^k, so log E|Y_k|^2 / (k delta) = 2 log(1 - delta) / delta
        config = make_config("gbm", {"mu": -1.0, "sigma": 0.0}, x0=[1.0])
        report = moment_exponent(config)
        expected = 2.0 * np.log(1.0 - config.delta) / config.delta
        np.testing.assert_allclose(report.exponents, expected, rtol=1e-3)
        assert report.tail_exponent == pytest.approx(expected, rel=1e-3)
        assert report.ks == list(range(1, 65))
        assert report.n_valid == 20 and report.n_diverged == 0

    def test_exact_zero_is_flagged(self):
        # mu = -2, delta = 1/2 sends every path to 0 after one step
        config = make_config("gbm", {"mu": -2.0, "sigma": 0.0}, x0=[1.0], delta=0.5, n_steps=4)
        report = moment_exponent(config)
        assert report.flagged == [True] * 4
        assert all(np.isnan(report.exponents))
        assert report.log_moments == [-np.inf] * 4
        assert report.tail_exponent is None

    def test_sampling_keeps_last_step(self):
        config = make_config("example3-consistent", n_steps=50, sample_every=8)
        report = moment_exponent(config)
        assert report.ks == [8, 16, 24, 32, 40, 48, 50]
        assert len(report.exponents) == 7

    def test_component_and_norm_agree_in_one_dimension(self):
        norm = moment_exponent(make_config("gbm", {"mu": -1.0, "sigma": 0.5}))
        first = moment_exponent(make_config("gbm", {"mu": -1.0, "sigma": 0.5}, component=0))
        np.testing.assert_allclose(norm.log_moments, first.log_moments, rtol=1e-14)

    def test_worker_count_does_not_change_result(self):
        config = make_config("example3-consistent", n_paths=23, batch_size=4)
        serial = moment_exponent(config, max_workers=1)
        threaded = moment_exponent(config, max_workers=3)
        assert serial.log_moments == threaded.log_moments

    def test_gbm_moment_decays(self):
        # E|X_t|^2 = e^{(2 mu + sigma^2) t} with 2 mu + sigma^2 = -1.75
        config = make_config("gbm", {"mu": -1.0, "sigma": 0.5}, x0=[1.0], delta=2.0 ** -6,
                             n_steps=2 ** 8, n_paths=4000, batch_size=500)
        report = moment_exponent(config, max_workers=2)
        assert report.tail_exponent == pytest.approx(-1.75, abs=0.25)


class TestReproductions:

    def test_example3_smoke(self):
        # reduced horizon k <= 2^10 of the long-horizon run below
        preset = build_preset("example3-consistent")
        config = StabilityConfig(system=preset.system, policy=preset.policy, x0=preset.x0, p=preset.assumptions.p,
                                 delta=2.0 ** -10, n_steps=2 ** 10, n_paths=200, batch_size=50, component=0,
                                 sample_every=8, lam=preset.assumptions.lam)
        report = moment_exponent(config, max_workers=4)
        assert report.ks[-1] == 2 ** 10
        assert report.n_diverged == 0
        assert report.exponents[-1] < 0


@pytest.mark.slow
class TestLongHorizon:

    def test_example3_is_stable(self):
        preset = build_preset("example3-consistent")
        config = StabilityConfig(system=preset.system, policy=preset.policy, x0=preset.x0, p=preset.assumptions.p,
                                 delta=2.0 ** -10, n_steps=5 * 2 ** 12, n_paths=2000, component=0,
                                 sample_every=8, lam=preset.assumptions.lam)
        report = moment_exponent(config, max_workers=4)
        assert report.tail_exponent is not None
        assert report.tail_exponent <= -5.0
        late = [e for t, e in zip(report.times, report.exponents) if t >= 1.0]
        assert max(late) < 0
