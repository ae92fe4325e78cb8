"""Reproducible Brownian increments and their coarsening.

Each path owns a Philox stream keyed by (master_seed, path_index), so a path
draws the same numbers no matter which worker generates it or in which order.
Gaussians come from the inverse normal CDF of 53-bit uniforms: one counter
draw per increment, row-major over (step, component).
"""
from typing import Iterable

import numpy as np
from scipy import special

from src.types.brownian_grid import BrownianGrid
from src.utils.errors import InputError

_UNIFORM_BITS = 53
_UNIFORM_SCALE = 2.0 ** -_UNIFORM_BITS


def path_generator(master_seed: int, path_index: int) -> np.random.Generator:
    if master_seed < 0 or path_index < 0:
        raise InputError(f"Seeds must be non-negative, got ({master_seed}, {path_index})")
    key = np.array([master_seed, path_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _standard_normals(master_seed: int, path_index: int, shape) -> np.ndarray:
    bits = path_generator(master_seed, path_index).integers(0, 2 ** _UNIFORM_BITS, size=shape, dtype=np.int64)
    return special.ndtri((bits + 0.5) * _UNIFORM_SCALE)


def _check_sizes(m: int, n_fine: int, delta_fine: float) -> None:
    if m < 1 or n_fine < 1:
        raise InputError(f"Need m >= 1 and n_fine >= 1, got m={m}, n_fine={n_fine}")
    if not delta_fine > 0:
        raise InputError(f"delta_fine must be positive, got {delta_fine}")


def sample_grid(master_seed: int, path_index: int, m: int, n_fine: int, delta_fine: float) -> BrownianGrid:
    _check_sizes(m, n_fine, delta_fine)
    increments = _standard_normals(master_seed, path_index, (n_fine, m)) * np.sqrt(delta_fine)
    increments.setflags(write=False)
    return BrownianGrid(m=m, delta_fine=delta_fine, n_fine=n_fine,
                        increments=increments, seed_info=(master_seed, path_index))


def sample_increments(master_seed: int, path_indices: Iterable[int], m: int, n_fine: int,
                      delta_fine: float) -> np.ndarray:
    """Stacked fine increments (n_paths, n_fine, m); row p equals sample_grid(..., path_indices[p])"""
    _check_sizes(m, n_fine, delta_fine)
    scale = np.sqrt(delta_fine)
    return np.stack([_standard_normals(master_seed, p, (n_fine, m)) * scale for p in path_indices])


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def aggregate_increments(increments: np.ndarray, factor: int) -> np.ndarray:
    """Sum consecutive blocks of ``factor`` rows along the step axis (-2).

    Power-of-two factors are summed by repeated pairwise halving, so that
    coarsening by 4 equals coarsening by 2 twice bit for bit; other factors
    are summed sequentially in ascending index order.
    """
    increments = np.asarray(increments, dtype=np.float64)
    n = increments.shape[-2]
    if not isinstance(factor, (int, np.integer)) or factor < 1:
        raise InputError(f"Aggregation factor must be a positive integer, got {factor}")
    if n % factor:
        raise InputError(f"Factor {factor} does not divide {n} fine steps")
    if factor == 1:
        return increments.copy()
    if _is_power_of_two(factor):
        out = increments
        while out.shape[-2] > n // factor:
            out = out[..., 0::2, :] + out[..., 1::2, :]
        return out
    blocks = increments.reshape(increments.shape[:-2] + (n // factor, factor, increments.shape[-1]))
    return np.cumsum(blocks, axis=-2)[..., -1, :]


def aggregate(grid: BrownianGrid, factor: int) -> np.ndarray:
    """Increments at step factor * delta_fine driven by the same path

    Power-of-two factors deviate from plain ascending-order summation: each
    block is a pairwise tree sum (adjacent pairs first), which telescopes
    exactly across the ladder. Within a block the result may differ from a
    left-to-right sum in the last bits.
    """
    return aggregate_increments(grid.increments, factor)


def total_displacement(increments: np.ndarray) -> np.ndarray:
    """B(T) - B(0) per component, in the same summation order as ``aggregate``"""
    increments = np.asarray(increments, dtype=np.float64)
    return aggregate_increments(increments, increments.shape[-2])[..., 0, :]
