from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

from src.utils.errors import PolicyError

RadiusFn = Callable[[float], float]
GrowthFn = Callable[[float], float]


@dataclass(frozen=True, eq=False)
class TruncationPolicy:
    """Truncation radius h(delta) on (0, delta_star]

    k_bar and k_plain are the local growth functions R -> K_bar_R and R -> K_R;
    they only feed the admissibility diagnostics, never the scheme itself.
    """
    h: RadiusFn
    delta_star: float = 1.0
    k_bar: Optional[GrowthFn] = None
    k_plain: Optional[GrowthFn] = None
    label: str = "custom"

    def __post_init__(self):
        if not 0 < self.delta_star <= 1:
            raise PolicyError(f"delta_star must lie in (0, 1], got {self.delta_star}")

    def radius(self, delta: float) -> float:
        """h(delta), after checking delta lies in (0, delta_star]"""
        if not 0 < delta <= self.delta_star:
            raise PolicyError(f"Step {delta} outside (0, {self.delta_star}] for policy {self.label}")
        return float(self.h(delta))

    def with_growth(self, k_plain: Optional[GrowthFn], k_bar: Optional[GrowthFn]) -> 'TruncationPolicy':
        return TruncationPolicy(h=self.h, delta_star=self.delta_star,
                                k_bar=self.k_bar or k_bar, k_plain=self.k_plain or k_plain,
                                label=self.label)


@dataclass
class PolicyReport:
    """Admissibility diagnostics of a truncation policy over the sampled step sizes"""
    convergence_ok: Optional[bool]
    stability_trend: List[Tuple[float, float]] = field(default_factory=list)
    notes: str = ""
    convergence_values: List[Tuple[float, float]] = field(default_factory=list)
    rate_condition_ok: Optional[bool] = None
    monotone_ok: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "convergence_ok": self.convergence_ok,
            "stability_trend": [list(pair) for pair in self.stability_trend],
            "notes": self.notes,
            "convergence_values": [list(pair) for pair in self.convergence_values],
            "rate_condition_ok": self.rate_condition_ok,
            "monotone_ok": self.monotone_ok,
        }
