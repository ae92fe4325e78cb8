"""Coefficient evaluation and the Milstein bracket L^{j1} g_{j2}.

Indices are 0-based: noise index j in [0, m), state index l in [0, d).
"""
import numpy as np

from src.types.sde_system import SdeSystem
from src.utils.errors import InputError


def state_norm(x: np.ndarray) -> np.ndarray:
    """Euclidean norm over the last axis"""
    return np.linalg.norm(x, axis=-1)


def eval_drift(sys: SdeSystem, x) -> np.ndarray:
    return sys.drift(sys.point(x))


def eval_diffusion(sys: SdeSystem, x) -> np.ndarray:
    """d x m matrix whose column j is g_j(x)"""
    return sys.diffusion(sys.point(x))


def eval_diffusion_derivative(sys: SdeSystem, x, j: int, l: int) -> np.ndarray:
    return sys.diffusion_derivative(sys.point(x), sys.noise_index(j), sys.state_index(l))


def bracket(g: np.ndarray, jacobian: np.ndarray, j1: int, j2: int) -> np.ndarray:
    """sum_l g[l, j1] * G_{j2}^l, accumulated in ascending l

    Works on stacked inputs: g is (..., d, m), jacobian is (..., d, m, d).
    """
    d = g.shape[-2]
    result = np.zeros(g.shape[:-1], dtype=np.float64)
    for l in range(d):
        result = result + g[..., l, j1, None] * jacobian[..., :, j2, l]
    return result


def bracket_tensor(g: np.ndarray, jacobian: np.ndarray) -> np.ndarray:
    """All brackets at once: out[..., i, j1, j2] = (L^{j1} g_{j2})_i"""
    return np.einsum('...la,...ibl->...iab', g, jacobian)


def levy_term(sys: SdeSystem, x, j1: int, j2: int) -> np.ndarray:
    """L^{j1} g_{j2}(x)"""
    x = sys.point(x)
    j1, j2 = sys.noise_index(j1), sys.noise_index(j2)
    return bracket(sys.diffusion(x), sys.diffusion_jacobian(x), j1, j2)


def drift_inner(x: np.ndarray, f: np.ndarray) -> np.ndarray:
    """<x, f> over the last axis"""
    return np.sum(x * f, axis=-1)


def diffusion_energy(g: np.ndarray) -> np.ndarray:
    """sum_j |g_j|^2, i.e. the squared trace norm of g"""
    return np.sum(g * g, axis=(-2, -1))


def finite_difference_jacobian(sys: SdeSystem, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
    """Central differences of the diffusion, same layout as ``diffusion_jacobian``"""
    if not step > 0:
        raise InputError(f"Finite difference step must be positive, got {step}")
    x = np.asarray(x, dtype=np.float64)
    columns = []
    for l in range(sys.d):
        e = np.zeros(sys.d)
        e[l] = step
        columns.append((sys.diffusion(x + e) - sys.diffusion(x - e)) / (2.0 * step))
    return np.stack(columns, axis=-1)
