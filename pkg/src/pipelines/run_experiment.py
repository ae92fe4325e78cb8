"""Command line front end: one configured run per invocation.

    python -m src.pipelines.run_experiment convergence --config configs/example2_convergence.conf

Exit status is 0 on success and the ``exit_code`` of the raised error
otherwise (1 for anything unexpected).
"""
from typing import Dict, List, Optional, Sequence
import argparse
import asyncio
import sys

from src.pipelines.check_pipeline import CheckPipeline
from src.pipelines.convergence_pipeline import ConvergencePipeline
from src.pipelines.simulate_pipeline import SimulatePipeline
from src.pipelines.stability_pipeline import StabilityPipeline
from src.sde.systems import list_systems
from src.utils.config import COMMANDS, load_run_config, parse_overrides
from src.utils.errors import ConfigError, MtmError

PIPELINES: Dict[str, type] = {
    "simulate": SimulatePipeline,
    "convergence": ConvergencePipeline,
    "stability": StabilityPipeline,
    "check": CheckPipeline,
}


def run(config_path: Optional[str] = None,
        command: Optional[str] = None,
        overrides: Optional[Dict] = None,
        log_level: str = "INFO",
        log_progress: bool = False) -> int:
    """Run one command and return its exit status"""
    try:
        config = load_run_config(config_path, overrides)
        command = command or config.command
        if command is None:
            raise ConfigError("No command given (pass it on the command line or set 'command = ...')")
        if command == "list-systems":
            for label, description in list_systems():
                print(f"{label}: {description}")
            return 0
        pipeline = PIPELINES[command](config, log_level=log_level, log_progress=log_progress)
        try:
            success = asyncio.run(pipeline.run())
        finally:
            pipeline.close()
        return 0 if success else 1
    except MtmError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        print(f"error: unexpected {type(e).__name__}: {e}", file=sys.stderr)
        return 1


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="Modified truncated Milstein experiments")

    parser.add_argument("command", nargs="?", choices=COMMANDS, default=None,
                        help="Command to run (default: the config's 'command' key)")
    parser.add_argument("--config", default=None,
                        help="Path to a key = value run configuration")
    parser.add_argument("--seed", type=int, default=None,
                        help="Master seed (default: 4321)")
    parser.add_argument("--out", default=None,
                        help="Output directory")
    parser.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="Override a config key, may be repeated")

    # Logging settings
    parser.add_argument("--log-level", default="INFO",
                        choices=["DEBUG", "PROGRESS", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        help="Set the logging level")
    parser.add_argument("--log-progress", action="store_true",
                        help="Log per-batch Monte Carlo progress")

    parser.add_argument("--max-workers", type=int, default=None,
                        help="Maximum number of path batches run in parallel")

    return parser.parse_args(argv)


def collect_overrides(args: argparse.Namespace) -> Dict:
    overrides = parse_overrides(args.overrides)
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.out is not None:
        overrides["out"] = args.out
    if args.max_workers is not None:
        overrides["max_workers"] = args.max_workers
    return overrides


def main(argv: Optional[List[str]] = None):
    """Command line interface"""
    args = parse_args(argv)
    try:
        overrides = collect_overrides(args)
    except MtmError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        exit(e.exit_code)
    status = run(args.config, command=args.command, overrides=overrides,
                 log_level=args.log_level, log_progress=args.log_progress)
    exit(status)


if __name__ == "__main__":
    main()
