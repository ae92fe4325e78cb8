from dataclasses import dataclass
from typing import Any, Dict

import numpy as np


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Grid values Y_0..Y_N of one path"""
    delta: float
    times: np.ndarray
    states: np.ndarray
    scheme_label: str

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "delta": self.delta,
            "scheme": self.scheme_label,
            "times": self.times.tolist(),
            "states": self.states.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'Trajectory':
        return cls(
            delta=data['delta'],
            times=np.asarray(data['times'], dtype=np.float64),
            states=np.asarray(data['states'], dtype=np.float64),
            scheme_label=data['scheme'],
        )


@dataclass(frozen=True, eq=False)
class PathBatch:
    """Recorded states of a stack of paths

    states[p, r] is the iterate of path p at step ``record_steps[r]``;
    diverged_at[p] is the first non-finite step index, or -1.
    """
    record_steps: np.ndarray
    states: np.ndarray
    diverged_at: np.ndarray

    @property
    def diverged(self) -> np.ndarray:
        return self.diverged_at >= 0
