"""
End-to-end tests of the command line front end
==============================================

Each test runs one small configured command into a temporary output
directory and checks the exit status and the files it leaves behind.
"""
import json
import logging

import pytest

from src.pipelines.base import PipelineBase
from src.pipelines.check_pipeline import policy_checks
from src.pipelines.run_experiment import collect_overrides, main, parse_args, run
from src.pipelines.simulate_pipeline import SimulatePipeline
from src.sde.systems import build_preset
from src.truncation.policies import power_policy, validate_policy
from src.types.reports import StabilityReport, StrongErrorReport, read_check_csv
from src.utils.config import RunConfig
from src.utils.errors import ConfigError


def overrides(tmp_path, **values):
    values.setdefault("out", str(tmp_path))
    return values


# ============================================================================
# Exit codes
# ============================================================================


class TestExitCodes:

    def test_list_systems(self, capsys):
        assert run(command="list-systems") == 0
        out = capsys.readouterr().out
        assert "example2: " in out
        assert "noncommutative-witness: " in out

    def test_unknown_system(self, tmp_path, capsys):
        assert run(command="simulate", overrides=overrides(tmp_path, system="example9")) == 3
        assert "UnknownSystemError" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path):
        assert run(config_path=str(tmp_path / "missing.conf"), command="check") == 2

    def test_missing_command(self, tmp_path):
        assert run(overrides=overrides(tmp_path, system="example2")) == 2

    def test_missing_system(self, tmp_path):
        assert run(command="check", overrides=overrides(tmp_path)) == 2

    def test_bad_component(self, tmp_path):
        status = run(command="stability",
                     overrides=overrides(tmp_path, system="example3-consistent", component=3))
        assert status == 2

    def test_non_commutative_system(self, tmp_path):
        status = run(command="simulate", overrides=overrides(tmp_path, system="noncommutative-witness"))
        assert status == 8

    def test_divergence(self, tmp_path):
        status = run(command="simulate",
                     overrides=overrides(tmp_path, system="example2", scheme="milstein",
                                         x0=[10.0, 0.0], delta=0.5, T=20.0))
        assert status == 9

    def test_main_exits_with_status(self):
        with pytest.raises(SystemExit) as info:
            main(["list-systems"])
        assert info.value.code == 0


# ============================================================================
# Commands
# ============================================================================


class TestCommands:

    def test_simulate(self, tmp_path, capsys):
        status = run(command="simulate",
                     overrides=overrides(tmp_path, system="example2", delta=2.0 ** -6))
        assert status == 0
        lines = (tmp_path / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "k,t,y1,y2"
        assert lines[1] == "0,0,1,1"
        assert len(lines) == 2 + 64
        assert (tmp_path / "trajectory.svg").exists()
        assert "final state = " in capsys.readouterr().out
        state = json.loads((tmp_path / "pipeline_state.json").read_text())
        assert state["state"] == "COMPLETED"

    def test_check(self, tmp_path, capsys):
        status = run(command="check", overrides=overrides(tmp_path, system="example2", n_samples=2000))
        assert status == 0
        reports = {r.name: r for r in read_check_csv(tmp_path / "check.csv")}
        assert reports["commutativity"].passed
        assert reports["khasminskii"].passed
        assert reports["truncated_lipschitz"].passed
        assert "policy_monotone" in reports
        assert "commutativity: pass" in capsys.readouterr().out

    def test_check_flags_the_printed_variant(self, tmp_path):
        status = run(command="check",
                     overrides=overrides(tmp_path, system="example3-paper", n_samples=2000, **{"lambda": 1.0}))
        assert status == 0
        reports = {r.name: r for r in read_check_csv(tmp_path / "check.csv")}
        assert not reports["dissipativity"].passed

    def test_convergence(self, tmp_path, capsys):
        status = run(command="convergence",
                     overrides=overrides(tmp_path, system="gbm", reference="exact",
                                         deltas=[2.0 ** -6, 2.0 ** -5, 2.0 ** -4], delta_ref=2.0 ** -6,
                                         n_paths=40, batch_size=10, max_workers=2))
        assert status == 0
        report = StrongErrorReport.read_csv(tmp_path / "convergence.csv")
        assert report.deltas == [2.0 ** -6, 2.0 ** -5, 2.0 ** -4]
        assert (tmp_path / "convergence.svg").exists()
        assert "slope = " in capsys.readouterr().out

    def test_convergence_table_ignores_worker_count(self, tmp_path):
        base = dict(system="example2", deltas=[2.0 ** -8, 2.0 ** -7], delta_ref=2.0 ** -10,
                    n_paths=24, batch_size=5)
        assert run(command="convergence", overrides=overrides(tmp_path / "one", max_workers=1, **base)) == 0
        assert run(command="convergence", overrides=overrides(tmp_path / "three", max_workers=3, **base)) == 0
        assert (tmp_path / "one" / "convergence.csv").read_bytes() == (tmp_path / "three" / "convergence.csv").read_bytes()

    def test_convergence_keeps_table_with_reference_step(self, tmp_path, capsys):
        status = run(command="convergence",
                     overrides=overrides(tmp_path, system="example2", deltas=[2.0 ** -8, 2.0 ** -6],
                                         delta_ref=2.0 ** -8, n_paths=10))
        assert status == 0
        report = StrongErrorReport.read_csv(tmp_path / "convergence.csv")
        assert report.errors[0] == 0.0
        assert report.errors[1] > 0.0
        assert "slope = nan" in capsys.readouterr().out

    def test_convergence_of_one_component(self, tmp_path):
        status = run(command="convergence",
                     overrides=overrides(tmp_path, system="example2", deltas=[2.0 ** -7, 2.0 ** -6],
                                         delta_ref=2.0 ** -8, n_paths=12, component=2))
        assert status == 0
        estimated = json.loads((tmp_path / "estimated.json").read_text())
        assert estimated["component"] == 1

    def test_stability(self, tmp_path, capsys):
        status = run(command="stability",
                     overrides=overrides(tmp_path, system="example3-consistent", delta=2.0 ** -4,
                                         n_steps=64, n_paths=20, component=1, sample_every=4))
        assert status == 0
        report = StabilityReport.read_csv(tmp_path / "stability.csv")
        assert report.ks == list(range(4, 65, 4))
        assert report.delta == 2.0 ** -4
        assert (tmp_path / "stability.svg").exists()
        assert (tmp_path / "moment.svg").exists()
        assert "tail_exponent = " in capsys.readouterr().out

    def test_seed_changes_the_result(self, tmp_path):
        base = dict(system="gbm", delta=2.0 ** -4)
        run(command="simulate", overrides=overrides(tmp_path / "a", **base))
        run(command="simulate", overrides=overrides(tmp_path / "b", **base))
        run(command="simulate", overrides=overrides(tmp_path / "c", master_seed=7, **base))
        a, b, c = [(tmp_path / name / "trajectory.csv").read_text() for name in "abc"]
        assert a == b
        assert a != c


# ============================================================================
# Helpers
# ============================================================================


class TestArguments:

    def test_flags_become_overrides(self):
        args = parse_args(["convergence", "--seed", "7", "--out", "results", "--set", "n_paths=10",
                           "--set", "h=pow", "--max-workers", "3"])
        assert args.command == "convergence"
        assert collect_overrides(args) == {"n_paths": 10, "h": "pow", "master_seed": 7,
                                           "out": "results", "max_workers": 3}

    def test_malformed_set(self):
        with pytest.raises(ConfigError):
            collect_overrides(parse_args(["--set", "n_paths"]))


class TestPolicyChecks:

    def test_example3_rows(self):
        deltas = [2.0 ** -11, 2.0 ** -10, 2.0 ** -9, 2.0 ** -8]
        report = validate_policy(build_preset("example3-consistent").policy, deltas)
        rows = {r.name: r for r in policy_checks(report, deltas)}
        assert set(rows) == {"policy_stability_trend", "policy_monotone"}
        assert rows["policy_stability_trend"].passed
        assert rows["policy_monotone"].passed

    def test_literal_example2_policy_fails_convergence_row(self):
        preset = build_preset("example2")
        policy = power_policy(0.008).with_growth(preset.k_plain, preset.k_bar)
        report = validate_policy(policy, [2.0 ** -8])
        rows = {r.name: r for r in policy_checks(report, [2.0 ** -8])}
        assert not rows["policy_convergence"].passed
        assert rows["policy_convergence"].worst_point == [2.0 ** -8]


class TestPipelineLifecycle:

    def test_close_releases_log_file(self, tmp_path):
        pipeline = SimulatePipeline(RunConfig.load(None, {"out": str(tmp_path), "system": "gbm"}))
        handlers = list(pipeline.logger.handlers)
        assert any(isinstance(h, logging.FileHandler) for h in handlers)
        pipeline.close()
        assert pipeline.logger.handlers == []
        assert all(h.stream is None for h in handlers if isinstance(h, logging.FileHandler))

    @pytest.mark.parametrize("extra, expected", [({}, 0), ({"scheme": "milstein", "x0": [10.0, 0.0],
                                                            "delta": 0.5, "T": 20.0}, 9)])
    def test_run_closes_the_pipeline(self, tmp_path, monkeypatch, extra, expected):
        closed = []
        monkeypatch.setattr(PipelineBase, "close", lambda self: closed.append(type(self).__name__))
        status = run(command="simulate", overrides=overrides(tmp_path, system="example2", **extra))
        assert status == expected
        assert closed == ["SimulatePipeline"]
