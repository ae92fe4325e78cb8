"""Modified truncated coefficients.

Outside the ball |x| <= h the drift and diffusion are evaluated at the radial
projection and scaled by |x|/h; the diffusion derivatives are evaluated at the
projection without scaling. Inside the ball (ties included) every truncated
quantity equals the plain one bit for bit.
"""
from typing import Tuple

import numpy as np

from src.sde.coefficients import bracket
from src.types.policy import TruncationPolicy
from src.types.sde_system import SdeSystem
from src.utils.errors import InputError


def radial_projection(x: np.ndarray, radius: float) -> Tuple[np.ndarray, np.ndarray]:
    """(projection onto the ball, scale |x|/radius outside and exactly 1 inside)"""
    r = np.asarray(np.linalg.norm(x, axis=-1))
    outside = r > radius
    scale = np.where(outside, r / radius, 1.0)
    shrink = np.divide(radius, r, out=np.ones_like(r), where=outside)
    projected = np.where(outside[..., None], x * shrink[..., None], x)
    return projected, scale


def project(x, radius: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise InputError(f"Cannot project non-finite point {x}")
    if not radius > 0:
        raise InputError(f"Projection radius must be positive, got {radius}")
    return radial_projection(x, radius)[0]


def coefficients_at_radius(sys: SdeSystem, radius: float,
                           x: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Truncated (f, g, J) for states stacked on leading axes"""
    projected, scale = radial_projection(x, radius)
    f = sys.drift(projected) * scale[..., None]
    g = sys.diffusion(projected) * scale[..., None, None]
    return f, g, sys.diffusion_jacobian(projected)


def truncated_coefficients(sys: SdeSystem, policy: TruncationPolicy, delta: float,
                           x) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    radius = policy.radius(delta)
    return coefficients_at_radius(sys, radius, np.asarray(x, dtype=np.float64))


def truncated_drift(sys: SdeSystem, policy: TruncationPolicy, delta: float, x) -> np.ndarray:
    radius = policy.radius(delta)
    projected, scale = radial_projection(sys.point(x), radius)
    return sys.drift(projected) * scale


def truncated_diffusion(sys: SdeSystem, policy: TruncationPolicy, delta: float, x) -> np.ndarray:
    radius = policy.radius(delta)
    projected, scale = radial_projection(sys.point(x), radius)
    return sys.diffusion(projected) * scale


def truncated_diffusion_derivative(sys: SdeSystem, policy: TruncationPolicy, delta: float,
                                   x, j: int, l: int) -> np.ndarray:
    radius = policy.radius(delta)
    j, l = sys.noise_index(j), sys.state_index(l)
    projected, _ = radial_projection(sys.point(x), radius)
    return sys.diffusion_derivative(projected, j, l)


def truncated_levy_term(sys: SdeSystem, policy: TruncationPolicy, delta: float,
                        x, j1: int, j2: int) -> np.ndarray:
    """L^{j1} g~_{j2}(x) = sum_l g~[l, j1] G~_{j2}^l(x)"""
    j1, j2 = sys.noise_index(j1), sys.noise_index(j2)
    _, g, J = truncated_coefficients(sys, policy, delta, sys.point(x))
    return bracket(g, J, j1, j2)
