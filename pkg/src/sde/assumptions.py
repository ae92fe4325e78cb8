"""Sampled audits of the standing assumptions.

Each audit evaluates a margin per sample point, defined so that a margin
<= 0 means the inequality holds there, and reports the worst point.
"""
from logging import Logger
from typing import Optional

import numpy as np

from src.sde.coefficients import (
    bracket_tensor,
    diffusion_energy,
    drift_inner,
    finite_difference_jacobian,
)
from src.sde.sampling import uniform_ball
from src.types.sde_system import AssumptionParams, CheckReport, SdeSystem
from src.utils.errors import InputError

GUARD_POINTS = 100
GUARD_RADIUS = 10.0
GUARD_TOL = 1e-8
GUARD_SEED = 7


def commutator_norms(sys: SdeSystem, samples: np.ndarray) -> np.ndarray:
    """max over (j1, j2) of |L^{j1}g_{j2} - L^{j2}g_{j1}| per sample"""
    L = bracket_tensor(sys.diffusion(samples), sys.diffusion_jacobian(samples))
    gap = np.linalg.norm(L - np.swapaxes(L, -1, -2), axis=-3)
    return gap.reshape(len(samples), -1).max(axis=-1)


def check_commutativity(sys: SdeSystem, samples, tol: float = 1e-10,
                        logger: Optional[Logger] = None) -> CheckReport:
    if not tol > 0:
        raise InputError(f"Tolerance must be positive, got {tol}")
    X = sys.states(samples)
    report = CheckReport.from_margins("commutativity", X, commutator_norms(sys, X) - tol)
    if logger:
        logger.info(f"Commutativity of {sys.label}: passed={report.passed}, worst margin {report.worst_margin:.3e}")
    return report


def khasminskii_lhs(sys: SdeSystem, X: np.ndarray, p: float) -> np.ndarray:
    """<x, f(x)> + (p - 1)/2 sum_j |g_j(x)|^2"""
    return drift_inner(X, sys.drift(X)) + 0.5 * (p - 1.0) * diffusion_energy(sys.diffusion(X))


def check_khasminskii(sys: SdeSystem, params: AssumptionParams, samples,
                      logger: Optional[Logger] = None) -> CheckReport:
    params.require_khasminskii()
    X = sys.states(samples)
    margins = khasminskii_lhs(sys, X, params.p) - params.K * (1.0 + np.sum(X * X, axis=-1))
    report = CheckReport.from_margins("khasminskii", X, margins)
    if logger:
        logger.info(f"Khasminskii (p={params.p:g}, K={params.K:g}) for {sys.label}: passed={report.passed}")
    return report


def check_dissipativity(sys: SdeSystem, params: AssumptionParams, samples,
                        logger: Optional[Logger] = None) -> CheckReport:
    params.require_dissipativity()
    X = sys.states(samples)
    margins = khasminskii_lhs(sys, X, params.p) + params.lam * np.sum(X * X, axis=-1)
    report = CheckReport.from_margins("dissipativity", X, margins)
    if logger:
        logger.info(f"Dissipativity (p={params.p:g}, lambda={params.lam:g}) for {sys.label}: passed={report.passed}")
    return report


def check_derivatives(sys: SdeSystem, samples, step: float = 1e-6, rel_tol: float = 1e-4,
                      logger: Optional[Logger] = None) -> CheckReport:
    """Compare the analytic diffusion Jacobian against central differences.

    Deviation is measured entrywise relative to max(|analytic|, 1).
    """
    X = sys.states(samples)
    analytic = sys.diffusion_jacobian(X)
    numeric = finite_difference_jacobian(sys, X, step)
    deviation = np.abs(numeric - analytic) / np.maximum(np.abs(analytic), 1.0)
    margins = deviation.reshape(len(X), -1).max(axis=-1) - rel_tol
    report = CheckReport.from_margins("derivatives", X, margins)
    if logger:
        logger.info(f"Derivative audit of {sys.label}: passed={report.passed}")
    return report


def commutativity_guard(sys: SdeSystem) -> bool:
    """Commutativity verdict on a fixed sample cloud; m = 1 is always commutative"""
    if sys.m == 1:
        return True
    cloud = uniform_ball(GUARD_POINTS, sys.d, GUARD_RADIUS, seed=GUARD_SEED)
    return check_commutativity(sys, cloud, tol=GUARD_TOL).passed
