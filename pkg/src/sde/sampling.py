"""Deterministic sample clouds for the sampled assumption audits."""
import numpy as np

from src.utils.errors import InputError

DEFAULT_SAMPLES = 10_000
DEFAULT_RADIUS = 10.0
DEFAULT_SAMPLE_SEED = 2024


def _generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def uniform_ball(n: int, d: int, radius: float = DEFAULT_RADIUS, seed: int = DEFAULT_SAMPLE_SEED) -> np.ndarray:
    """n points uniform in the closed Euclidean ball of the given radius"""
    if n < 1 or d < 1:
        raise InputError(f"Need n >= 1 and d >= 1, got n={n}, d={d}")
    if not radius > 0:
        raise InputError(f"Ball radius must be positive, got {radius}")
    rng = _generator(seed)
    directions = rng.standard_normal((n, d))
    norms = np.linalg.norm(directions, axis=-1, keepdims=True)
    directions = directions / np.where(norms > 0, norms, 1.0)
    radii = radius * rng.random((n, 1)) ** (1.0 / d)
    return directions * radii


def uniform_box(n: int, d: int, half_width: float = 5.0, seed: int = DEFAULT_SAMPLE_SEED) -> np.ndarray:
    """n points uniform in the cube [-half_width, half_width]^d"""
    if n < 1 or d < 1:
        raise InputError(f"Need n >= 1 and d >= 1, got n={n}, d={d}")
    if not half_width > 0:
        raise InputError(f"Box half width must be positive, got {half_width}")
    return _generator(seed).uniform(-half_width, half_width, size=(n, d))
