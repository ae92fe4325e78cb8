from enum import Enum
from pathlib import Path
from typing import Any
import json
import datetime
from abc import ABC, abstractmethod

from src.sde.systems import SystemPreset, build_preset
from src.utils.config import RunConfig
from src.utils.errors import ConfigError, OutputError
from src.utils.logger import get_logger


class PipelineBase(ABC):
    """Base class for experiment pipelines with state and output persistence"""

    def __init__(self,
                 config: RunConfig,
                 pipeline_dir: str,
                 log_level: str = "INFO",
                 log_progress: bool = False,
                 max_workers: int = 1):
        """Initialize pipeline

        Args:
            config: Parsed run configuration
            pipeline_dir: Name of this pipeline, used for the logger
            log_level: Logging level
            log_progress: Whether to log per-batch Monte Carlo progress
            max_workers: Maximum number of parallel path batches
        """
        self.config = config
        self.output_path = Path(config.output_dir)
        self.max_workers = max(1, int(config.get("max_workers", max_workers)))

        try:
            self.output_path.mkdir(parents=True, exist_ok=True)
            marker = self.output_path / ".write_test"
            marker.touch()
            marker.unlink()
        except OSError as e:
            raise OutputError(f"Output directory {self.output_path} is not writable: {e}")

        log_file = self.output_path / "log.txt"
        self.logger = get_logger(
            name=f"{pipeline_dir}_pipeline",
            log_level=log_level,
            log_progress=log_progress,
            log_file=str(log_file)
        )
        self.logger.info(f"Pipeline initialized. Outputs will be saved to: {self.output_path}")

        for key in config.unknown_keys():
            self.logger.warning(f"Ignoring unknown config key: {key}")

    def load_preset(self) -> SystemPreset:
        if not self.config.system:
            raise ConfigError("No system configured (set 'system = <label>')")
        preset = build_preset(self.config.system, self.config.system_params)
        self.logger.info(f"System: {preset.system.describe()}")
        return preset

    def save_state(self, state: Enum) -> None:
        """Save current pipeline state"""
        state_file = self.output_path / "pipeline_state.json"
        with open(state_file, 'w') as f:
            json.dump({
                "state": state.name,
                "timestamp": str(datetime.datetime.now())
            }, f)

    def save_output(self, state: Enum, data: Any) -> None:
        """Save pipeline output for a state"""
        output_file = self.output_path / f"{state.name.lower()}.json"
        try:
            with open(output_file, 'w') as f:
                json.dump(data, f, indent=4, ensure_ascii=False)
        except OSError as e:
            raise OutputError(f"Cannot write {output_file}: {e}")

    @abstractmethod
    async def run(self) -> bool:
        """Run the pipeline"""
        pass

    def close(self) -> None:
        """Detach and close the log handlers, releasing log.txt"""
        for handler in list(self.logger.handlers):
            self.logger.removeHandler(handler)
            handler.close()
