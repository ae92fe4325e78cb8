from enum import Enum

from src.experiments.stability import moment_exponent_async
from src.pipelines.base import PipelineBase
from src.sde.systems import SystemPreset
from src.tools.visualization import emit_plot, representable_moments
from src.truncation.policies import policy_from_spec
from src.types.reports import StabilityConfig
from src.utils.config import RunConfig

DEFAULT_DELTA = 2.0 ** -10
DEFAULT_STEPS = 5 * 2 ** 12


class StabilityState(Enum):
    """Stability pipeline states"""
    INIT = 0
    ESTIMATED = 1
    COMPLETED = 2


def build_stability_config(config: RunConfig, preset: SystemPreset) -> StabilityConfig:
    """Resolve a moment-exponent study from run keys, falling back to preset defaults"""
    sys = preset.system
    return StabilityConfig(
        system=sys,
        policy=policy_from_spec(config.policy_spec, preset),
        x0=config.get_list("x0", preset.x0.tolist()),
        p=config.get_float("p", preset.assumptions.p),
        delta=config.get_float("delta", DEFAULT_DELTA),
        n_steps=config.get_int("n_steps", DEFAULT_STEPS),
        n_paths=config.get_int("n_paths", 2000),
        master_seed=config.master_seed,
        component=config.get_component(sys.d),
        sample_every=config.get_int("sample_every", 1),
        lam=config.get_float("lambda", preset.assumptions.lam),
        epsilon_ref=config.get_float("epsilon_ref", 0.0),
        batch_size=config.get_int("batch_size", 100),
    )


class StabilityPipeline(PipelineBase):
    """Long-horizon moment exponent, stability.csv, the exponent curve and the moment path"""

    def __init__(self,
                 config: RunConfig,
                 log_level: str = "INFO",
                 log_progress: bool = False,
                 max_workers: int = 1):
        super().__init__(config, pipeline_dir="stability", log_level=log_level,
                         log_progress=log_progress, max_workers=max_workers)

    async def run(self) -> bool:
        self.save_state(StabilityState.INIT)
        preset = self.load_preset()
        study = build_stability_config(self.config, preset)
        self.save_output(StabilityState.INIT, {
            "preset": preset.to_dict(),
            "policy": study.policy.label,
            "p": study.p,
            "delta": study.delta,
            "n_steps": study.n_steps,
            "n_paths": study.n_paths,
            "component": "norm" if study.component is None else study.component + 1,
            "master_seed": study.master_seed,
        })

        self.save_state(StabilityState.ESTIMATED)
        self.logger.info("1. Estimating the moment exponent...")
        report = await moment_exponent_async(study, max_workers=self.max_workers, logger=self.logger)
        self.save_output(StabilityState.ESTIMATED, report.to_dict())

        path = report.write_csv(self.output_path / "stability.csv")
        self.logger.info(f"Wrote {path}")
        emit_plot(report, "stability", self.output_path / "stability.svg", logger=self.logger)
        if representable_moments(report)[0].size:
            emit_plot(report, "moment", self.output_path / "moment.svg", logger=self.logger)
        else:
            self.logger.warning("No representable moment value, moment plot skipped")
        if report.tail_exponent is not None:
            print(f"tail_exponent = {report.tail_exponent:.6f}")
        else:
            print("tail_exponent = nan")
        print(f"final_exponent = {report.exponents[-1]:.6f}")

        self.save_state(StabilityState.COMPLETED)
        self.logger.info("Stability pipeline completed successfully")
        return True
