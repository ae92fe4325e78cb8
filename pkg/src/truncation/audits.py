"""Sampled audits of the truncated coefficients at a fixed step size."""
from logging import Logger
from typing import Optional

import numpy as np

from src.sde.coefficients import bracket_tensor, diffusion_energy, drift_inner
from src.truncation.truncated import coefficients_at_radius
from src.types.policy import TruncationPolicy
from src.types.sde_system import AssumptionParams, CheckReport, SdeSystem
from src.utils.errors import InputError


def _truncated_lhs(sys: SdeSystem, radius: float, X: np.ndarray, p: float) -> np.ndarray:
    f, g, _ = coefficients_at_radius(sys, radius, X)
    return drift_inner(X, f) + 0.5 * (p - 1.0) * diffusion_energy(g)


def check_truncated_lipschitz(sys: SdeSystem, policy: TruncationPolicy, delta: float,
                              xs, ys, logger: Optional[Logger] = None) -> CheckReport:
    """|F(x) - F(y)| <= 4 K_bar_{h(delta)} |x - y| for F in f~, g~_j, L^{j1} g~_{j2}"""
    if policy.k_bar is None:
        raise InputError(f"Policy {policy.label} carries no K_bar growth function")
    X, Y = sys.states(xs), sys.states(ys)
    if X.shape != Y.shape:
        raise InputError(f"Paired samples differ in shape: {X.shape} vs {Y.shape}")
    radius = policy.radius(delta)
    bound = 4.0 * policy.k_bar(radius) * np.linalg.norm(X - Y, axis=-1)

    fx, gx, Jx = coefficients_at_radius(sys, radius, X)
    fy, gy, Jy = coefficients_at_radius(sys, radius, Y)
    gaps = [
        np.linalg.norm(fx - fy, axis=-1),
        np.linalg.norm(gx - gy, axis=-2).max(axis=-1),
        np.linalg.norm(bracket_tensor(gx, Jx) - bracket_tensor(gy, Jy), axis=-3).reshape(len(X), -1).max(axis=-1),
    ]
    margins = np.max(gaps, axis=0) - bound
    report = CheckReport.from_margins("truncated_lipschitz", X, margins)
    if logger:
        logger.info(f"Truncated Lipschitz bound for {sys.label} at h={radius:.6g}: passed={report.passed}")
    return report


def check_truncated_khasminskii(sys: SdeSystem, policy: TruncationPolicy, delta: float,
                                params: AssumptionParams, samples,
                                logger: Optional[Logger] = None) -> CheckReport:
    """<x, f~> + (p-1)/2 |g~|^2 <= 2K (1 + |x|^2)"""
    params.require_khasminskii()
    X = sys.states(samples)
    radius = policy.radius(delta)
    margins = _truncated_lhs(sys, radius, X, params.p) - 2.0 * params.K * (1.0 + np.sum(X * X, axis=-1))
    report = CheckReport.from_margins("truncated_khasminskii", X, margins)
    if logger:
        logger.info(f"Truncated Khasminskii for {sys.label} at h={radius:.6g}: passed={report.passed}")
    return report


def check_truncated_dissipativity(sys: SdeSystem, policy: TruncationPolicy, delta: float,
                                  params: AssumptionParams, samples,
                                  logger: Optional[Logger] = None) -> CheckReport:
    """<x, f~> + (p-1)/2 |g~|^2 <= -lambda |x|^2"""
    params.require_dissipativity()
    X = sys.states(samples)
    radius = policy.radius(delta)
    margins = _truncated_lhs(sys, radius, X, params.p) + params.lam * np.sum(X * X, axis=-1)
    report = CheckReport.from_margins("truncated_dissipativity", X, margins)
    if logger:
        logger.info(f"Truncated dissipativity for {sys.label} at h={radius:.6g}: passed={report.passed}")
    return report
