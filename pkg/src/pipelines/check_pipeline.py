from enum import Enum
from typing import List, Optional

import numpy as np

from src.pipelines.base import PipelineBase
from src.sde.assumptions import check_commutativity, check_derivatives, check_dissipativity, check_khasminskii
from src.sde.sampling import DEFAULT_RADIUS, DEFAULT_SAMPLES, uniform_ball, uniform_box
from src.sde.systems import SystemPreset
from src.truncation.audits import (
    check_truncated_dissipativity,
    check_truncated_khasminskii,
    check_truncated_lipschitz,
)
from src.truncation.policies import policy_from_spec, validate_policy
from src.types.policy import PolicyReport
from src.types.reports import write_check_csv
from src.types.sde_system import AssumptionParams, CheckReport
from src.utils.config import RunConfig

DEFAULT_CHECK_DELTAS = [2.0 ** -11, 2.0 ** -10, 2.0 ** -9, 2.0 ** -8]
DERIVATIVE_SAMPLES = 1000


class CheckState(Enum):
    """Check pipeline states"""
    INIT = 0
    AUDITS = 1
    TRUNCATED_AUDITS = 2
    POLICY = 3
    COMPLETED = 4


def policy_checks(report: PolicyReport, deltas: List[float]) -> List[CheckReport]:
    """Policy diagnostics as check.csv rows; the worst point is the offending step size"""
    deltas = sorted(deltas)
    rows = []
    if report.convergence_values:
        margins = np.array([v - 1.0 for _, v in report.convergence_values])
        rows.append(CheckReport.from_margins("policy_convergence", np.array(deltas), margins))
    if report.stability_trend and len(report.stability_trend) > 1:
        values = np.array([v for _, v in report.stability_trend])
        # values must decrease towards the smallest step
        margins = values[:-1] - values[1:]
        rows.append(CheckReport.from_margins("policy_stability_trend", np.array(deltas[:-1]), margins))
    if report.rate_condition_ok is not None:
        margin = 0.0 if report.rate_condition_ok else 1.0
        rows.append(CheckReport(name="policy_rate_condition", passed=report.rate_condition_ok,
                                worst_point=[], worst_margin=margin, samples_tested=len(deltas)))
    rows.append(CheckReport(name="policy_monotone", passed=report.monotone_ok, worst_point=[],
                            worst_margin=0.0 if report.monotone_ok else 1.0, samples_tested=len(deltas)))
    return rows


class CheckPipeline(PipelineBase):
    """Sampled audits of the standing assumptions, the truncated coefficients and the policy"""

    def __init__(self,
                 config: RunConfig,
                 log_level: str = "INFO",
                 log_progress: bool = False,
                 max_workers: int = 1):
        super().__init__(config, pipeline_dir="check", log_level=log_level,
                         log_progress=log_progress, max_workers=max_workers)
        self.reports: List[CheckReport] = []

    def _assumptions(self, preset: SystemPreset) -> AssumptionParams:
        defaults = preset.assumptions
        return AssumptionParams(
            p=self.config.get_float("p", defaults.p),
            K=self.config.get_float("K", defaults.K),
            lam=self.config.get_float("lambda", defaults.lam),
        )

    def _samples(self, d: int) -> np.ndarray:
        n = self.config.get_int("n_samples", DEFAULT_SAMPLES)
        radius = self.config.get_float("radius", DEFAULT_RADIUS)
        return uniform_ball(n, d, radius, seed=self.config.master_seed)

    def _audit(self, preset: SystemPreset, params: AssumptionParams, samples: np.ndarray) -> None:
        sys = preset.system
        tol = self.config.get_float("tol", 1e-10)
        self.reports.append(check_commutativity(sys, samples, tol=tol, logger=self.logger))
        if params.K is not None:
            self.reports.append(check_khasminskii(sys, params, samples, logger=self.logger))
        if params.lam is not None:
            self.reports.append(check_dissipativity(sys, params, samples, logger=self.logger))
        box = uniform_box(DERIVATIVE_SAMPLES, sys.d, seed=self.config.master_seed)
        self.reports.append(check_derivatives(sys, box, logger=self.logger))

    def _truncated_audit(self, preset: SystemPreset, params: AssumptionParams,
                         samples: np.ndarray, delta: float) -> None:
        sys = preset.system
        policy = policy_from_spec(self.config.policy_spec, preset)
        if params.K is not None:
            self.reports.append(check_truncated_khasminskii(sys, policy, delta, params, samples, logger=self.logger))
        if params.lam is not None:
            self.reports.append(check_truncated_dissipativity(sys, policy, delta, params, samples, logger=self.logger))
        if policy.k_bar is not None:
            ball = 2.0 * policy.radius(delta)
            n = len(samples)
            xs = uniform_ball(n, sys.d, ball, seed=self.config.master_seed + 1)
            ys = uniform_ball(n, sys.d, ball, seed=self.config.master_seed + 2)
            self.reports.append(check_truncated_lipschitz(sys, policy, delta, xs, ys, logger=self.logger))

    async def run(self) -> bool:
        """Run all audits and write check.csv"""
        self.save_state(CheckState.INIT)
        preset = self.load_preset()
        params = self._assumptions(preset)
        deltas = self.config.get_list("deltas", DEFAULT_CHECK_DELTAS)
        self.save_output(CheckState.INIT, {"preset": preset.to_dict(), "assumptions": params.to_dict()})

        self.save_state(CheckState.AUDITS)
        self.logger.info("1. Auditing the untruncated coefficients...")
        samples = self._samples(preset.system.d)
        self._audit(preset, params, samples)

        self.save_state(CheckState.TRUNCATED_AUDITS)
        delta = self.config.get_float("delta", max(deltas))
        self.logger.info(f"2. Auditing the truncated coefficients at delta={delta:g}...")
        self._truncated_audit(preset, params, samples, delta)

        self.save_state(CheckState.POLICY)
        self.logger.info("3. Validating the truncation policy...")
        policy = policy_from_spec(self.config.policy_spec, preset)
        q: Optional[float] = self.config.get_float("q")
        report = validate_policy(policy, deltas, p=params.p if q is not None else None, q=q, logger=self.logger)
        self.reports.extend(policy_checks(report, deltas))
        self.save_output(CheckState.POLICY, report.to_dict())

        path = write_check_csv(self.output_path / "check.csv", self.reports)
        self.logger.info(f"Wrote {path}")
        for r in self.reports:
            print(f"{r.name}: {'pass' if r.passed else 'FAIL'} (worst margin {r.worst_margin:.6g})")

        self.save_state(CheckState.COMPLETED)
        self.save_output(CheckState.COMPLETED, [r.to_dict() for r in self.reports])
        self.logger.info("Check pipeline completed successfully")
        return True
