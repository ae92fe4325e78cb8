"""Experiment configurations and reports.

Reports serialise to JSON through ``to_dict``/``from_dict`` and to the fixed
CSV schemas used by the command line front end. CSV numbers are written with
17 significant digits so that parsing them back is exact.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union
import csv
import math

import numpy as np

from src.types.policy import TruncationPolicy
from src.types.sde_system import CheckReport, SdeSystem
from src.types.trajectory import Trajectory
from src.utils.errors import InputError, OutputError

CONVERGENCE_COLUMNS = ["delta", "error", "stderr", "n_diverged"]
STABILITY_COLUMNS = ["k", "t", "log_moment", "exponent"]
CHECK_COLUMNS = ["check_name", "passed", "worst_margin", "worst_point"]
SCHEMES = ("mtm", "milstein")


def format_float(value: float) -> str:
    return f"{value:.17g}"


def integral_ratio(numerator: float, denominator: float) -> Optional[int]:
    """numerator / denominator if it is (numerically) a positive integer"""
    ratio = numerator / denominator
    k = int(round(ratio))
    if k >= 1 and abs(ratio - k) <= 1e-9 * k:
        return k
    return None


def _write_rows(path: Path, header: List[str], rows: List[List[str]]) -> Path:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as e:
        raise OutputError(f"Cannot write {path}: {e}")
    return path


def _read_rows(path: Path, header: List[str]) -> List[Dict[str, str]]:
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or list(reader.fieldnames[:len(header)]) != header:
            raise InputError(f"{path}: expected header {header}, got {reader.fieldnames}")
        return list(reader)


@dataclass
class ConvergenceConfig:
    """Coupled strong-error study on a ladder of power-of-two step sizes"""
    system: SdeSystem
    policy: TruncationPolicy
    x0: Sequence[float]
    deltas: Sequence[float]
    delta_ref: float
    q: float = 2.0
    T: float = 1.0
    n_paths: int = 1000
    master_seed: int = 4321
    reference: str = "numerical"
    scheme: str = "mtm"
    batch_size: int = 100
    component: Optional[int] = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=np.float64).reshape(-1)
        self.deltas = sorted(float(d) for d in self.deltas)
        if self.x0.shape != (self.system.d,):
            raise InputError(f"x0 must have length {self.system.d}, got {self.x0.shape}")
        if self.component is not None and not 0 <= self.component < self.system.d:
            raise InputError(f"component {self.component} out of range [0, {self.system.d})")
        if not self.deltas:
            raise InputError("ConvergenceConfig needs at least one coarse step size")
        if not self.q > 0 or not self.T > 0 or not self.delta_ref > 0:
            raise InputError("q, T and delta_ref must be positive")
        if self.n_paths < 1 or self.batch_size < 1:
            raise InputError("n_paths and batch_size must be positive")
        if self.reference not in ("numerical", "exact"):
            raise InputError(f"Unknown reference kind: {self.reference}")
        if self.reference == "exact" and self.system.exact_solution is None:
            raise InputError(f"{self.system.label} has no exact solution")
        if self.scheme not in SCHEMES:
            raise InputError(f"Unknown scheme: {self.scheme}")
        if integral_ratio(self.T, self.delta_ref) is None:
            raise InputError(f"T={self.T} is not a multiple of delta_ref={self.delta_ref}")
        for delta in self.deltas:
            factor = integral_ratio(delta, self.delta_ref)
            if factor is None or factor & (factor - 1):
                raise InputError(f"Step {delta} is not a power-of-two multiple of delta_ref={self.delta_ref}")
            if integral_ratio(self.T, delta) is None:
                raise InputError(f"T={self.T} is not a multiple of step {delta}")

    @property
    def n_fine(self) -> int:
        return integral_ratio(self.T, self.delta_ref)

    def factor(self, delta: float) -> int:
        return integral_ratio(delta, self.delta_ref)


@dataclass
class StrongErrorReport:
    """Strong errors per step size and the fitted log-log order"""
    system_label: str
    q: float
    deltas: List[float]
    errors: List[float]
    stderrs: List[float]
    n_diverged: List[int]
    n_valid: List[int] = field(default_factory=list)
    slope: Optional[float] = None
    intercept: Optional[float] = None
    scheme: str = "mtm"
    reference: str = "numerical"
    component: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system_label,
            "q": self.q,
            "deltas": self.deltas,
            "errors": self.errors,
            "stderrs": self.stderrs,
            "n_diverged": self.n_diverged,
            "n_valid": self.n_valid,
            "slope": self.slope,
            "intercept": self.intercept,
            "scheme": self.scheme,
            "reference": self.reference,
            "component": self.component,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StrongErrorReport':
        return cls(
            system_label=data['system'],
            q=data['q'],
            deltas=list(data['deltas']),
            errors=list(data['errors']),
            stderrs=list(data['stderrs']),
            n_diverged=list(data['n_diverged']),
            n_valid=list(data.get('n_valid', [])),
            slope=data.get('slope'),
            intercept=data.get('intercept'),
            scheme=data.get('scheme', 'mtm'),
            reference=data.get('reference', 'numerical'),
            component=data.get('component'),
        )

    def write_csv(self, path: Path) -> Path:
        rows = [[format_float(d), format_float(e), format_float(s), str(n)]
                for d, e, s, n in zip(self.deltas, self.errors, self.stderrs, self.n_diverged)]
        return _write_rows(Path(path), CONVERGENCE_COLUMNS, rows)

    @classmethod
    def read_csv(cls, path: Path, system_label: str = "unknown", q: float = 2.0) -> 'StrongErrorReport':
        rows = _read_rows(Path(path), CONVERGENCE_COLUMNS)
        return cls(
            system_label=system_label,
            q=q,
            deltas=[float(r['delta']) for r in rows],
            errors=[float(r['error']) for r in rows],
            stderrs=[float(r['stderr']) for r in rows],
            n_diverged=[int(r['n_diverged']) for r in rows],
        )


@dataclass
class StabilityConfig:
    """Long-horizon p-th moment study of one step size"""
    system: SdeSystem
    policy: TruncationPolicy
    x0: Sequence[float]
    p: float
    delta: float
    n_steps: int
    n_paths: int = 2000
    master_seed: int = 4321
    component: Optional[int] = None
    sample_every: int = 1
    lam: Optional[float] = None
    epsilon_ref: float = 0.0
    batch_size: int = 100

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=np.float64).reshape(-1)
        if self.x0.shape != (self.system.d,):
            raise InputError(f"x0 must have length {self.system.d}, got {self.x0.shape}")
        if not self.p > 0:
            raise InputError(f"p must be positive, got {self.p}")
        if self.n_steps < 1:
            raise InputError(f"n_steps must be at least 1, got {self.n_steps}")
        if not self.delta > 0:
            raise InputError(f"delta must be positive, got {self.delta}")
        if self.n_paths < 1 or self.batch_size < 1 or self.sample_every < 1:
            raise InputError("n_paths, batch_size and sample_every must be positive")
        if self.component is not None and not 0 <= self.component < self.system.d:
            raise InputError(f"component {self.component} out of range [0, {self.system.d})")

    def sampled_steps(self) -> np.ndarray:
        """Sampled k values; k = 0 is excluded, the last step always included"""
        ks = np.arange(self.sample_every, self.n_steps + 1, self.sample_every, dtype=np.int64)
        if ks.size == 0 or ks[-1] != self.n_steps:
            ks = np.append(ks, self.n_steps)
        return ks


@dataclass
class StabilityReport:
    """Log-moment estimates and the moment exponent curve"""
    system_label: str
    p: float
    delta: float
    component: Optional[int]
    ks: List[int]
    log_moments: List[float]
    exponents: List[float]
    flagged: List[bool]
    tail_exponent: Optional[float] = None
    n_valid: int = 0
    n_diverged: int = 0
    lam: Optional[float] = None
    epsilon_ref: float = 0.0

    @property
    def times(self) -> List[float]:
        return [k * self.delta for k in self.ks]

    @property
    def reference_level(self) -> Optional[float]:
        """-p (lambda - epsilon) when lambda is configured"""
        if self.lam is None:
            return None
        return -self.p * (self.lam - self.epsilon_ref)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system_label,
            "p": self.p,
            "delta": self.delta,
            "component": self.component,
            "ks": self.ks,
            "log_moments": [_json_float(v) for v in self.log_moments],
            "exponents": [_json_float(v) for v in self.exponents],
            "flagged": self.flagged,
            "tail_exponent": self.tail_exponent,
            "n_valid": self.n_valid,
            "n_diverged": self.n_diverged,
            "lambda": self.lam,
            "epsilon_ref": self.epsilon_ref,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'StabilityReport':
        return cls(
            system_label=data['system'],
            p=data['p'],
            delta=data['delta'],
            component=data.get('component'),
            ks=list(data['ks']),
            log_moments=[_from_json_float(v) for v in data['log_moments']],
            exponents=[_from_json_float(v) for v in data['exponents']],
            flagged=list(data['flagged']),
            tail_exponent=data.get('tail_exponent'),
            n_valid=data.get('n_valid', 0),
            n_diverged=data.get('n_diverged', 0),
            lam=data.get('lambda'),
            epsilon_ref=data.get('epsilon_ref', 0.0),
        )

    def write_csv(self, path: Path) -> Path:
        rows = [[str(k), format_float(t), format_float(L), format_float(e)]
                for k, t, L, e in zip(self.ks, self.times, self.log_moments, self.exponents)]
        return _write_rows(Path(path), STABILITY_COLUMNS, rows)

    @classmethod
    def read_csv(cls, path: Path, system_label: str = "unknown", p: float = 2.0,
                 component: Optional[int] = None) -> 'StabilityReport':
        rows = _read_rows(Path(path), STABILITY_COLUMNS)
        ks = [int(r['k']) for r in rows]
        times = [float(r['t']) for r in rows]
        delta = times[0] / ks[0] if ks else 0.0
        log_moments = [float(r['log_moment']) for r in rows]
        return cls(
            system_label=system_label,
            p=p,
            delta=delta,
            component=component,
            ks=ks,
            log_moments=log_moments,
            exponents=[float(r['exponent']) for r in rows],
            flagged=[not math.isfinite(v) for v in log_moments],
        )


def write_check_csv(path: Path, reports: Sequence[CheckReport]) -> Path:
    """check.csv: one row per audit, worst point coordinates in trailing columns"""
    width = max((len(r.worst_point) for r in reports), default=0)
    header = CHECK_COLUMNS[:-1] + [f"worst_point_{i + 1}" for i in range(width)]
    rows = [[r.name, str(r.passed).lower(), format_float(r.worst_margin)]
            + [format_float(v) for v in r.worst_point] + [""] * (width - len(r.worst_point))
            for r in reports]
    return _write_rows(Path(path), header, rows)


def read_check_csv(path: Path) -> List[CheckReport]:
    reports = []
    with open(path, newline='') as f:
        reader = csv.DictReader(f)
        for row in reader:
            point = [float(row[k]) for k in reader.fieldnames if k.startswith("worst_point_") and row[k]]
            reports.append(CheckReport(
                name=row['check_name'],
                passed=row['passed'] == "true",
                worst_point=point,
                worst_margin=float(row['worst_margin']),
                samples_tested=0,
            ))
    return reports


def _json_float(value: float) -> Union[float, str, None]:
    """JSON has no infinities; they travel as "inf" / "-inf", NaN as null"""
    if math.isnan(value):
        return None
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def _from_json_float(value: Union[float, str, None]) -> float:
    return float("nan") if value is None else float(value)


def write_trajectory_csv(path: Path, trajectory: Trajectory) -> Path:
    """trajectory.csv: k, t, y1..yd"""
    d = trajectory.states.shape[1]
    header = ["k", "t"] + [f"y{i + 1}" for i in range(d)]
    rows = [[str(k), format_float(t)] + [format_float(v) for v in state]
            for k, (t, state) in enumerate(zip(trajectory.times, trajectory.states))]
    return _write_rows(Path(path), header, rows)
