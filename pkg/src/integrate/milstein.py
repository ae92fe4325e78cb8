"""Modified truncated Milstein (mtm) and classical Milstein steppers.

For commutative noise one step reads

    Y' = Y + f dt + sum_j g_j dB^j
           + 1/2 sum_{j1,j2} L^{j1} g_{j2} dB^{j2} dB^{j1}
           - 1/2 sum_j L^j g_j dt

with (f, g, G) replaced by their truncated versions for mtm. The double sum
factorises as sum_l (g dB)_l (G dB)_{., l}, so a step costs O(d^2 m).
"""
from logging import Logger
from typing import Optional, Sequence

import numpy as np

from src.truncation.truncated import coefficients_at_radius
from src.types.policy import TruncationPolicy
from src.types.sde_system import SdeSystem
from src.types.trajectory import PathBatch, Trajectory
from src.utils.errors import DivergenceError, InputError, NonCommutativeError

SCHEMES = ("mtm", "milstein")


def milstein_update(y: np.ndarray, f: np.ndarray, g: np.ndarray, J: np.ndarray,
                    delta: float, db: np.ndarray) -> np.ndarray:
    """One step for stacked states y (P, d) with coefficients already evaluated"""
    g_db = np.einsum('pdm,pm->pd', g, db)
    J_db = np.einsum('pijl,pj->pil', J, db)
    double = np.einsum('pl,pil->pi', g_db, J_db)
    correction = np.einsum('plj,pijl->pi', g, J)
    return y + f * delta + g_db + 0.5 * double - 0.5 * delta * correction


def _coefficients(sys: SdeSystem, scheme: str, radius: Optional[float], y: np.ndarray):
    if scheme == "mtm":
        return coefficients_at_radius(sys, radius, y)
    return sys.drift(y), sys.diffusion(y), sys.diffusion_jacobian(y)


def _check_scheme(scheme: str, policy: Optional[TruncationPolicy]) -> None:
    if scheme not in SCHEMES:
        raise InputError(f"Unknown scheme '{scheme}', expected one of {SCHEMES}")
    if scheme == "mtm" and policy is None:
        raise InputError("The mtm scheme needs a truncation policy")


def _step(sys: SdeSystem, policy: Optional[TruncationPolicy], scheme: str, delta: float, y, db) -> np.ndarray:
    y = sys.point(y)
    db = np.asarray(db, dtype=np.float64)
    if db.shape != (sys.m,):
        raise InputError(f"{sys.label}: expected increment of shape ({sys.m},), got {db.shape}")
    radius = policy.radius(delta) if scheme == "mtm" else None
    f, g, J = _coefficients(sys, scheme, radius, y[None])
    return milstein_update(y[None], f, g, J, delta, db[None])[0]


def mtm_step(sys: SdeSystem, policy: TruncationPolicy, delta: float, y, db) -> np.ndarray:
    _check_scheme("mtm", policy)
    return _step(sys, policy, "mtm", delta, y, db)


def milstein_step(sys: SdeSystem, delta: float, y, db) -> np.ndarray:
    if not delta > 0:
        raise InputError(f"Step size must be positive, got {delta}")
    return _step(sys, None, "milstein", delta, y, db)


def integrate(sys: SdeSystem, policy: Optional[TruncationPolicy], delta: float, x0,
              increments: np.ndarray, scheme: str = "mtm",
              record_steps: Optional[Sequence[int]] = None,
              logger: Optional[Logger] = None) -> PathBatch:
    """Advance a stack of paths over their increments (P, N, m).

    Paths whose iterate turns non-finite are marked in ``diverged_at`` with
    the first bad step index and carried as NaN from then on.
    """
    _check_scheme(scheme, policy)
    if sys.m > 1 and not sys.commutative:
        raise NonCommutativeError(f"{sys.label}: diffusion is not commutative, the Milstein schemes do not apply")
    increments = np.asarray(increments, dtype=np.float64)
    if increments.ndim != 3 or increments.shape[-1] != sys.m:
        raise InputError(f"{sys.label}: expected increments of shape (P, N, {sys.m}), got {increments.shape}")
    n_paths, n_steps, _ = increments.shape
    if not delta > 0:
        raise InputError(f"Step size must be positive, got {delta}")
    radius = policy.radius(delta) if scheme == "mtm" else None

    y = np.array(np.broadcast_to(np.asarray(x0, dtype=np.float64), (n_paths, sys.d)))
    if not np.all(np.isfinite(y)):
        raise InputError(f"{sys.label}: non-finite initial value")

    steps = np.arange(n_steps + 1) if record_steps is None else np.asarray(sorted(set(record_steps)), dtype=np.int64)
    if steps.size and (steps[0] < 0 or steps[-1] > n_steps):
        raise InputError(f"Recorded steps must lie in [0, {n_steps}]")
    states = np.empty((n_paths, steps.size, sys.d))
    slot = 0
    if slot < steps.size and steps[0] == 0:
        states[:, 0] = y
        slot = 1

    diverged_at = np.full(n_paths, -1, dtype=np.int64)
    with np.errstate(all='ignore'):
        for k in range(n_steps):
            f, g, J = _coefficients(sys, scheme, radius, y)
            y = milstein_update(y, f, g, J, delta, increments[:, k, :])
            bad = ~np.all(np.isfinite(y), axis=-1)
            if bad.any():
                fresh = bad & (diverged_at < 0)
                if fresh.any():
                    diverged_at[fresh] = k + 1
                    if logger:
                        logger.debug(f"{int(fresh.sum())} path(s) of {sys.label} diverged at step {k + 1}")
                y[bad] = np.nan
            if slot < steps.size and steps[slot] == k + 1:
                states[:, slot] = y
                slot += 1

    return PathBatch(record_steps=steps, states=states, diverged_at=diverged_at)


def simulate(sys: SdeSystem, policy: Optional[TruncationPolicy], scheme_label: str, delta: float,
             x0, increments: np.ndarray, logger: Optional[Logger] = None) -> Trajectory:
    """Single trajectory Y_0..Y_N driven by increments (N, m)"""
    x0 = sys.point(x0)
    increments = np.asarray(increments, dtype=np.float64)
    if increments.ndim != 2 or increments.shape[1] != sys.m:
        raise InputError(f"{sys.label}: expected increments of shape (N, {sys.m}), got {increments.shape}")
    batch = integrate(sys, policy, delta, x0, increments[None], scheme=scheme_label, logger=logger)
    if batch.diverged[0]:
        step = int(batch.diverged_at[0])
        raise DivergenceError(f"{sys.label}: {scheme_label} iterate became non-finite at step {step}", step_index=step)
    n_steps = increments.shape[0]
    return Trajectory(delta=delta, times=np.arange(n_steps + 1) * delta,
                      states=batch.states[0], scheme_label=scheme_label)
