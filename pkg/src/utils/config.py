"""Flat ``key = value`` run configuration.

Numbers may be written the way the experiments are usually stated, e.g.
``delta = 2^-10`` or ``n_steps = 5*2^12``. Comma separated values become lists.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence
import re

from src.utils.errors import ConfigError

COMMANDS = ("simulate", "convergence", "stability", "check", "list-systems")

POLICY_KEYS = ("h", "exponent", "scale", "l", "epsilon", "delta_star")
SYSTEM_PARAM_KEYS = ("mu", "sigma")

KNOWN_KEYS = {
    "command", "system", "out", "master_seed", "x0",
    "q", "T", "delta_ref", "deltas", "n_paths", "reference", "scheme",
    "p", "delta", "n_steps", "component", "lambda", "epsilon_ref", "sample_every",
    "K", "n_samples", "radius", "tol",
    "batch_size", "max_workers",
    *POLICY_KEYS, *SYSTEM_PARAM_KEYS,
}

DEFAULT_SEED = 4321

_NUMBER_FACTOR = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def parse_number(text: str) -> float:
    """Parse ``2^-10``, ``5*2^12``, ``1e-3`` style numbers.

    Integral products of non-negative powers come back as ``int``.
    """
    result: Any = 1
    for factor in text.replace(" ", "").split("*"):
        if "^" in factor:
            base, exponent = factor.split("^", 1)
            if not _NUMBER_FACTOR.match(base) or not _NUMBER_FACTOR.match(exponent):
                raise ConfigError(f"Not a number: {text!r}")
            b, e = _to_number(base), _to_number(exponent)
            value = b ** e if isinstance(b, int) and isinstance(e, int) and e >= 0 else float(b) ** float(e)
        else:
            if not _NUMBER_FACTOR.match(factor):
                raise ConfigError(f"Not a number: {text!r}")
            value = _to_number(factor)
        result = result * value
    return result


def _to_number(token: str):
    if re.fullmatch(r"[+-]?\d+", token):
        return int(token)
    return float(token)


def parse_value(text: str) -> Any:
    """Parse one config value: list, number, bool or string"""
    text = text.strip()
    if "," in text:
        return [parse_value(part) for part in text.split(",") if part.strip()]
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return parse_number(text)
    except ConfigError:
        return text


def parse_lines(lines: Sequence[str], source: str = "<config>") -> Dict[str, Any]:
    values: Dict[str, Any] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        values[key] = parse_value(value)
    return values


@dataclass
class RunConfig:
    """Parsed run configuration"""
    command: Optional[str] = None
    system: Optional[str] = None
    output_dir: Path = Path("outputs")
    master_seed: int = DEFAULT_SEED
    values: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def load(cls,
             path: Optional[str] = None,
             overrides: Optional[Dict[str, Any]] = None) -> 'RunConfig':
        """Load config file and apply overrides (overrides win)"""
        values: Dict[str, Any] = {}
        if path is not None:
            config_path = Path(path)
            try:
                text = config_path.read_text()
            except OSError as e:
                raise ConfigError(f"Cannot read config {config_path}: {e}")
            values.update(parse_lines(text.splitlines(), source=str(config_path)))
        values.update(overrides or {})

        command = values.pop("command", None)
        if command is not None and command not in COMMANDS:
            raise ConfigError(f"Unknown command: {command}")
        system = values.pop("system", None)
        output_dir = Path(str(values.pop("out", "outputs")))
        seed = values.pop("master_seed", DEFAULT_SEED)
        if not isinstance(seed, int) or seed < 0:
            raise ConfigError(f"master_seed must be a non-negative integer, got {seed!r}")
        return cls(command=command, system=system, output_dir=output_dir,
                   master_seed=seed, values=values)

    def unknown_keys(self) -> List[str]:
        return sorted(k for k in self.values if k not in KNOWN_KEYS)

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)

    def get_float(self, key: str, default: Optional[float] = None) -> Optional[float]:
        value = self.values.get(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{key} must be a number, got {value!r}")
        return float(value)

    def get_int(self, key: str, default: Optional[int] = None) -> Optional[int]:
        value = self.values.get(key, default)
        if value is None:
            return None
        if isinstance(value, float) and value.is_integer():
            value = int(value)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return value

    def get_list(self, key: str, default: Optional[list] = None) -> Optional[List[float]]:
        value = self.values.get(key, default)
        if value is None:
            return None
        if not isinstance(value, list):
            value = [value]
        for item in value:
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"{key} must be a list of numbers, got {value!r}")
        return [float(v) for v in value]

    def get_component(self, d: int) -> Optional[int]:
        return parse_component(self.values.get("component"), d)

    @property
    def policy_spec(self) -> Dict[str, Any]:
        return {k: self.values[k] for k in POLICY_KEYS if k in self.values}

    @property
    def system_params(self) -> Dict[str, float]:
        return {k: float(self.values[k]) for k in SYSTEM_PARAM_KEYS if k in self.values}


def parse_component(value, d: int) -> Optional[int]:
    """Config component (1..d or 'norm') to a 0-based index, None for the norm"""
    if value is None or value == "norm":
        return None
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int) or not 1 <= value <= d:
        raise ConfigError(f"component must be 1..{d} or 'norm', got {value!r}")
    return value - 1


def parse_overrides(items: Optional[Sequence[str]]) -> Dict[str, Any]:
    """Parse repeated ``--set key=value`` flags"""
    overrides: Dict[str, Any] = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = parse_value(value)
    return overrides


def load_run_config(path: Optional[str], overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    return RunConfig.load(path, overrides)
