from enum import Enum

from src.experiments.convergence import strong_error_async
from src.pipelines.base import PipelineBase
from src.sde.systems import SystemPreset
from src.tools.visualization import emit_plot
from src.truncation.policies import policy_from_spec
from src.types.reports import ConvergenceConfig, StrongErrorReport
from src.utils.config import RunConfig

DEFAULT_DELTAS = [2.0 ** -11, 2.0 ** -10, 2.0 ** -9, 2.0 ** -8]
DEFAULT_DELTA_REF = 2.0 ** -15


class ConvergenceState(Enum):
    """Convergence pipeline states"""
    INIT = 0
    ESTIMATED = 1
    COMPLETED = 2


def build_convergence_config(config: RunConfig, preset: SystemPreset) -> ConvergenceConfig:
    """Resolve a strong-error study from run keys, falling back to preset defaults"""
    return ConvergenceConfig(
        system=preset.system,
        policy=policy_from_spec(config.policy_spec, preset),
        x0=config.get_list("x0", preset.x0.tolist()),
        deltas=config.get_list("deltas", DEFAULT_DELTAS),
        delta_ref=config.get_float("delta_ref", DEFAULT_DELTA_REF),
        q=config.get_float("q", 2.0),
        T=config.get_float("T", 1.0),
        n_paths=config.get_int("n_paths", 1000),
        master_seed=config.master_seed,
        reference=config.get("reference", "numerical"),
        scheme=config.get("scheme", "mtm"),
        batch_size=config.get_int("batch_size", 100),
        component=config.get_component(preset.system.d),
    )


class ConvergencePipeline(PipelineBase):
    """Coupled strong-error study, convergence.csv and the log-log plot"""

    def __init__(self,
                 config: RunConfig,
                 log_level: str = "INFO",
                 log_progress: bool = False,
                 max_workers: int = 1):
        super().__init__(config, pipeline_dir="convergence", log_level=log_level,
                         log_progress=log_progress, max_workers=max_workers)

    async def run(self) -> bool:
        self.save_state(ConvergenceState.INIT)
        preset = self.load_preset()
        study = build_convergence_config(self.config, preset)
        self.save_output(ConvergenceState.INIT, {
            "preset": preset.to_dict(),
            "policy": study.policy.label,
            "deltas": study.deltas,
            "delta_ref": study.delta_ref,
            "n_paths": study.n_paths,
            "component": "norm" if study.component is None else study.component + 1,
            "master_seed": study.master_seed,
        })

        self.save_state(ConvergenceState.ESTIMATED)
        self.logger.info("1. Estimating strong errors...")
        report = await strong_error_async(study, max_workers=self.max_workers, logger=self.logger)
        self.save_output(ConvergenceState.ESTIMATED, report.to_dict())

        path = report.write_csv(self.output_path / "convergence.csv")
        self.logger.info(f"Wrote {path}")
        emit_plot(report, "convergence", self.output_path / "convergence.svg", logger=self.logger)
        self._print_summary(report)

        self.save_state(ConvergenceState.COMPLETED)
        self.logger.info("Convergence pipeline completed successfully")
        return True

    @staticmethod
    def _print_summary(report: StrongErrorReport) -> None:
        for delta, error, n_div in zip(report.deltas, report.errors, report.n_diverged):
            print(f"delta={delta:g} error={error:.6g} diverged={n_div}")
        if report.slope is not None:
            print(f"slope = {report.slope:.6f}")
        else:
            print("slope = nan")
