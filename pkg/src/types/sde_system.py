from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from src.utils.errors import InputError

# f: (..., d) -> (..., d)
DriftFn = Callable[[np.ndarray], np.ndarray]
# g: (..., d) -> (..., d, m), column j is g_j
DiffusionFn = Callable[[np.ndarray], np.ndarray]
# J: (..., d) -> (..., d, m, d), J[..., i, j, l] = d g_{i,j} / d x^l
JacobianFn = Callable[[np.ndarray], np.ndarray]
# (x0, t, B(t)) -> x(t)
ExactSolutionFn = Callable[[np.ndarray, float, np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SdeSystem:
    """Autonomous Ito SDE dx = f(x) dt + sum_j g_j(x) dB^j

    All coefficient callables are vectorised over leading batch axes.
    """
    d: int
    m: int
    drift: DriftFn
    diffusion: DiffusionFn
    diffusion_jacobian: JacobianFn
    label: str
    exact_solution: Optional[ExactSolutionFn] = None
    params: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1 or self.m < 1:
            raise InputError(f"Dimensions must be positive, got d={self.d}, m={self.m}")

    def point(self, x) -> np.ndarray:
        """Validate a single state vector"""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.d,):
            raise InputError(f"{self.label}: expected state of shape ({self.d},), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InputError(f"{self.label}: non-finite state {x}")
        return x

    def states(self, x) -> np.ndarray:
        """Validate a stack of state vectors (n, d)"""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.d:
            raise InputError(f"{self.label}: expected states of shape (n, {self.d}), got {x.shape}")
        if x.shape[0] == 0:
            raise InputError(f"{self.label}: empty sample set")
        return x

    def noise_index(self, j: int) -> int:
        if not 0 <= j < self.m:
            raise InputError(f"{self.label}: noise index {j} out of range [0, {self.m})")
        return j

    def state_index(self, l: int) -> int:
        if not 0 <= l < self.d:
            raise InputError(f"{self.label}: state index {l} out of range [0, {self.d})")
        return l

    def diffusion_derivative(self, x: np.ndarray, j: int, l: int) -> np.ndarray:
        """G_j^l(x) = d g_j / d x^l"""
        return self.diffusion_jacobian(x)[..., :, j, l]

    @cached_property
    def commutative(self) -> bool:
        """Commutativity verdict on the standard sample cloud (cached)"""
        from src.sde.assumptions import commutativity_guard
        return commutativity_guard(self)

    def describe(self) -> str:
        params = ", ".join(f"{k}={v:g}" for k, v in self.params.items())
        return f"{self.label} (d={self.d}, m={self.m}{', ' + params if params else ''})"


@dataclass(frozen=True)
class AssumptionParams:
    """Constants of the Khasminskii-type and dissipativity conditions"""
    p: float
    K: Optional[float] = None
    lam: Optional[float] = None

    def __post_init__(self):
        if not self.p > 2:
            raise InputError(f"Moment order p must exceed 2, got {self.p}")
        if self.K is not None and not self.K > 0:
            raise InputError(f"K must be positive, got {self.K}")
        if self.lam is not None and not self.lam > 0:
            raise InputError(f"lambda must be positive, got {self.lam}")

    def require_khasminskii(self) -> None:
        if self.K is None:
            raise InputError("Khasminskii condition needs K")

    def require_dissipativity(self) -> None:
        if self.lam is None:
            raise InputError("Dissipativity condition needs lambda")

    def to_dict(self) -> Dict[str, Any]:
        return {"p": self.p, "K": self.K, "lambda": self.lam}


@dataclass
class CheckReport:
    """Result of a sampled inequality audit; margin <= 0 means it holds"""
    name: str
    passed: bool
    worst_point: List[float]
    worst_margin: float
    samples_tested: int

    @classmethod
    def from_margins(cls, name: str, points: np.ndarray, margins: np.ndarray) -> 'CheckReport':
        worst = int(np.argmax(margins))
        worst_margin = float(margins[worst])
        return cls(
            name=name,
            passed=bool(worst_margin <= 0),
            worst_point=[float(v) for v in np.atleast_1d(points[worst])],
            worst_margin=worst_margin,
            samples_tested=int(len(margins)),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "worst_point": self.worst_point,
            "worst_margin": self.worst_margin,
            "samples_tested": self.samples_tested,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'CheckReport':
        return cls(
            name=data['name'],
            passed=data['passed'],
            worst_point=list(data.get('worst_point', [])),
            worst_margin=data['worst_margin'],
            samples_tested=data.get('samples_tested', 0),
        )
