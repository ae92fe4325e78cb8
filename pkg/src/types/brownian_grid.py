from dataclasses import dataclass
from typing import Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class BrownianGrid:
    """Brownian increments of one path at the finest resolution

    ``increments`` has shape (n_fine, m) and is read-only; coarser grids are
    derived with ``src.brownian.increments.aggregate``.
    """
    m: int
    delta_fine: float
    n_fine: int
    increments: np.ndarray
    seed_info: Tuple[int, int]

    @property
    def horizon(self) -> float:
        return self.n_fine * self.delta_fine
