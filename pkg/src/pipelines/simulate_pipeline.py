from enum import Enum

from src.brownian.increments import sample_grid
from src.integrate.milstein import simulate
from src.pipelines.base import PipelineBase
from src.tools.visualization import emit_plot
from src.truncation.policies import policy_from_spec
from src.types.reports import format_float, integral_ratio, write_trajectory_csv
from src.utils.config import RunConfig
from src.utils.errors import InputError

DEFAULT_DELTA = 2.0 ** -10


class SimulateState(Enum):
    """Simulate pipeline states"""
    INIT = 0
    SIMULATED = 1
    COMPLETED = 2


class SimulatePipeline(PipelineBase):
    """One trajectory of the configured scheme, driven by path 0 of the master seed"""

    def __init__(self,
                 config: RunConfig,
                 log_level: str = "INFO",
                 log_progress: bool = False,
                 max_workers: int = 1):
        super().__init__(config, pipeline_dir="simulate", log_level=log_level,
                         log_progress=log_progress, max_workers=max_workers)

    async def run(self) -> bool:
        self.save_state(SimulateState.INIT)
        preset = self.load_preset()
        sys = preset.system
        policy = policy_from_spec(self.config.policy_spec, preset)
        delta = self.config.get_float("delta", DEFAULT_DELTA)
        T = self.config.get_float("T", 1.0)
        scheme = self.config.get("scheme", "mtm")
        x0 = self.config.get_list("x0", preset.x0.tolist())
        n_steps = integral_ratio(T, delta)
        if n_steps is None:
            raise InputError(f"T={T:g} is not a multiple of delta={delta:g}")
        self.save_output(SimulateState.INIT, {"preset": preset.to_dict(), "delta": delta, "T": T,
                                              "scheme": scheme, "x0": x0, "policy": policy.label})

        self.save_state(SimulateState.SIMULATED)
        self.logger.info(f"1. Simulating {scheme} on {sys.label}: delta={delta:g}, {n_steps} steps")
        grid = sample_grid(self.config.master_seed, 0, sys.m, n_steps, delta)
        trajectory = simulate(sys, policy, scheme, delta, x0, grid.increments, logger=self.logger)
        self.save_output(SimulateState.SIMULATED, trajectory.to_dict())

        path = write_trajectory_csv(self.output_path / "trajectory.csv", trajectory)
        self.logger.info(f"Wrote {path}")
        emit_plot(trajectory, "trajectory", self.output_path / "trajectory.svg", logger=self.logger)
        print("final state = " + ", ".join(format_float(v) for v in trajectory.final))

        self.save_state(SimulateState.COMPLETED)
        self.logger.info("Simulate pipeline completed successfully")
        return True
