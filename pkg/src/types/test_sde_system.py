import numpy as np
import pytest

from src.sde.systems import build_preset
from src.truncation.policies import power_policy
from src.types.sde_system import AssumptionParams, CheckReport, SdeSystem
from src.types.trajectory import Trajectory
from src.utils.errors import InputError, PolicyError


@pytest.fixture
def example2():
    return build_preset("example2").system


class TestSdeSystem:

    def test_point_validation(self, example2):
        assert example2.point([1, 2]).tolist() == [1.0, 2.0]
        with pytest.raises(InputError):
            example2.point([1, 2, 3])
        with pytest.raises(InputError):
            example2.point([np.nan, 0])

    def test_states_validation(self, example2):
        with pytest.raises(InputError):
            example2.states(np.zeros((0, 2)))
        with pytest.raises(InputError):
            example2.states(np.zeros(2))

    def test_indices(self, example2):
        assert example2.noise_index(1) == 1
        with pytest.raises(InputError):
            example2.noise_index(2)
        with pytest.raises(InputError):
            example2.state_index(-1)

    def test_dimensions_must_be_positive(self):
        with pytest.raises(InputError):
            SdeSystem(d=0, m=1, drift=lambda x: x, diffusion=lambda x: x[..., None],
                      diffusion_jacobian=lambda x: x, label="broken")

    def test_describe(self):
        gbm = build_preset("gbm", {"mu": -1.0, "sigma": 0.5}).system
        assert gbm.describe() == "gbm (d=1, m=1, mu=-1, sigma=0.5)"


class TestAssumptionParams:

    @pytest.mark.parametrize("p", [2, 1.5, 0, -3])
    def test_p_must_exceed_two(self, p):
        with pytest.raises(InputError):
            AssumptionParams(p=p, K=1)

    def test_khasminskii_requires_K(self):
        with pytest.raises(InputError):
            AssumptionParams(p=3).require_khasminskii()
        AssumptionParams(p=3, K=1).require_khasminskii()

    def test_positive_constants(self):
        with pytest.raises(InputError):
            AssumptionParams(p=3, K=0)
        with pytest.raises(InputError):
            AssumptionParams(p=3, lam=-1)

    def test_dissipativity_requires_lambda(self):
        with pytest.raises(InputError):
            AssumptionParams(p=7).require_dissipativity()


class TestCheckReport:

    def test_from_margins_picks_the_worst(self):
        points = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 0.0]])
        report = CheckReport.from_margins("demo", points, np.array([-3.0, 0.5, -1.0]))
        assert not report.passed
        assert report.worst_point == [1.0, 1.0]
        assert report.worst_margin == 0.5
        assert report.samples_tested == 3

    def test_zero_margin_passes(self):
        report = CheckReport.from_margins("demo", np.zeros((2, 1)), np.array([0.0, -1.0]))
        assert report.passed

    def test_dict_round_trip(self):
        report = CheckReport(name="khasminskii", passed=True, worst_point=[1.0, 2.0],
                             worst_margin=-6.0, samples_tested=100)
        assert CheckReport.from_dict(report.to_dict()) == report


class TestTruncationPolicy:

    def test_radius_window(self):
        policy = power_policy(0.25, delta_star=0.5)
        assert policy.radius(2.0 ** -8) == pytest.approx(4.0)
        with pytest.raises(PolicyError):
            policy.radius(0.75)
        with pytest.raises(PolicyError):
            policy.radius(0.0)

    def test_with_growth_keeps_existing(self):
        policy = power_policy(0.25).with_growth(lambda R: 1.0, None)
        extended = policy.with_growth(lambda R: 2.0, lambda R: 3.0)
        assert extended.k_plain(5.0) == 1.0
        assert extended.k_bar(5.0) == 3.0
        assert extended.label == policy.label


class TestTrajectory:

    def test_dict_round_trip(self):
        trajectory = Trajectory(delta=0.25, times=np.array([0.0, 0.25]),
                                states=np.array([[1.0], [1.5]]), scheme_label="milstein")
        restored = Trajectory.from_dict(trajectory.to_dict())
        np.testing.assert_array_equal(restored.states, trajectory.states)
        assert restored.final.tolist() == [1.5]
        assert restored.scheme_label == "milstein"
