"""Coupled strong-error study and log-log order fit.

Every path draws one fine Brownian grid at delta_ref. The reference solution
(mtm at delta_ref, or the exact solution where the system has one) and all
coarse runs consume aggregates of that grid. A path on which any of these runs
diverges is left out of every step size, so all errors average over the same
paths.
"""
from dataclasses import dataclass
from logging import Logger
from typing import List, Optional, Sequence, Tuple
import asyncio
import math

import numpy as np

from src.brownian.increments import aggregate_increments, sample_increments, total_displacement
from src.experiments.parallel import path_batches, run_batches
from src.integrate.milstein import integrate
from src.types.reports import ConvergenceConfig, StrongErrorReport
from src.utils.errors import ExperimentError, FitError


@dataclass
class _BatchErrors:
    """Per-path gaps (rows) for each step size (columns) and where a run diverged"""
    gaps: np.ndarray
    diverged: np.ndarray


def _run_batch(config: ConvergenceConfig, paths: range) -> _BatchErrors:
    sys = config.system
    n_fine = config.n_fine
    fine = sample_increments(config.master_seed, paths, sys.m, n_fine, config.delta_ref)
    fine_total = total_displacement(fine)

    if config.reference == "exact":
        x0 = np.broadcast_to(config.x0, (len(paths), sys.d))
        with np.errstate(all='ignore'):
            reference = sys.exact_solution(x0, config.T, fine_total)
        reference_bad = ~np.all(np.isfinite(reference), axis=-1)
    else:
        run = integrate(sys, config.policy, config.delta_ref, config.x0, fine,
                        scheme="mtm", record_steps=[n_fine])
        reference = run.states[:, -1]
        reference_bad = run.diverged

    gaps = np.empty((len(paths), len(config.deltas)))
    diverged = np.empty((len(paths), len(config.deltas)), dtype=bool)
    for column, delta in enumerate(config.deltas):
        factor = config.factor(delta)
        coarse = aggregate_increments(fine, factor)
        _check_coupling(fine_total, total_displacement(coarse), delta, n_fine)
        run = integrate(sys, config.policy, delta, config.x0, coarse,
                        scheme=config.scheme, record_steps=[n_fine // factor])
        with np.errstate(all='ignore'):
            gaps[:, column] = state_gap(reference, run.states[:, -1], config.component)
        diverged[:, column] = reference_bad | run.diverged
    return _BatchErrors(gaps=gaps, diverged=diverged)


def state_gap(reference: np.ndarray, approx: np.ndarray, component: Optional[int] = None) -> np.ndarray:
    """|reference - approx| in the full norm, or in one coordinate"""
    diff = reference - approx
    if component is None:
        return np.linalg.norm(diff, axis=-1)
    return np.abs(diff[..., component])


def _check_coupling(fine_total: np.ndarray, coarse_total: np.ndarray, delta: float, n_fine: int) -> None:
    """Total Brownian displacement must agree across resolutions"""
    if n_fine & (n_fine - 1) == 0:
        coupled = np.array_equal(fine_total, coarse_total)
    else:
        coupled = np.allclose(fine_total, coarse_total, rtol=1e-12, atol=1e-12)
    if not coupled:
        raise ExperimentError(f"Coarse increments at delta={delta:g} are not coupled to the fine grid")


def surviving_paths(diverged: np.ndarray, deltas: Sequence[float]) -> np.ndarray:
    """Paths on which the reference and every coarse run stayed finite

    Raises ExperimentError when some step size lost every path, or when no
    path survives all step sizes at once.
    """
    for column, delta in enumerate(deltas):
        if np.all(diverged[:, column]):
            raise ExperimentError(f"All {len(diverged)} paths diverged at delta={delta:g}")
    valid = ~np.any(diverged, axis=1)
    if not np.any(valid):
        counts = ", ".join(f"{d:g}: {int(n)}" for d, n in zip(deltas, diverged.sum(axis=0)))
        raise ExperimentError(f"No path stayed finite at every step size (diverged per delta: {counts})")
    return valid


def summarize_errors(gaps: np.ndarray, q: float) -> Tuple[float, float, int]:
    """(error, delta-method standard error, number of valid paths) from per-path gaps"""
    valid = gaps[np.isfinite(gaps)]
    n_valid = valid.size
    if n_valid == 0:
        return float("nan"), float("nan"), 0
    powered = valid ** q
    moment = float(np.mean(powered))
    error = moment ** (1.0 / q)
    if n_valid < 2 or error == 0:
        return error, 0.0, n_valid
    spread = float(np.std(powered, ddof=1)) / np.sqrt(n_valid)
    return error, (1.0 / q) * error ** (1.0 - q) * spread, n_valid


def fit_log_log(deltas: Sequence[float], errors: Sequence[float]) -> Tuple[float, float]:
    """Least squares of log2 error against log2 delta"""
    deltas = np.asarray(deltas, dtype=np.float64)
    errors = np.asarray(errors, dtype=np.float64)
    if deltas.size < 2 or deltas.size != errors.size:
        raise FitError(f"Need at least two (delta, error) pairs, got {deltas.size} and {errors.size}")
    if not np.all(np.isfinite(errors)) or np.any(errors <= 0):
        raise FitError(f"Errors must be finite and positive for a log-log fit, got {errors.tolist()}")
    slope, intercept = np.polyfit(np.log2(deltas), np.log2(errors), 1)
    return float(slope), float(intercept)


def fit_order(report: StrongErrorReport) -> Tuple[float, float]:
    """Order fit over every row of the report; a zero error raises FitError"""
    return fit_log_log(report.deltas, report.errors)


def fit_positive_errors(report: StrongErrorReport,
                        logger: Optional[Logger] = None) -> Tuple[Optional[float], Optional[float]]:
    """Fit over the rows with a finite positive error; (None, None) if fewer than two remain"""
    rows = [(d, e) for d, e in zip(report.deltas, report.errors) if math.isfinite(e) and e > 0]
    skipped = [d for d, e in zip(report.deltas, report.errors) if not (math.isfinite(e) and e > 0)]
    if skipped and logger:
        logger.warning(f"Left out of the order fit (zero or non-finite error): delta={skipped}")
    if len(rows) < 2:
        if logger:
            logger.warning("Fewer than two positive errors, no order fitted")
        return None, None
    deltas, errors = zip(*rows)
    return fit_log_log(deltas, errors)


async def strong_error_async(config: ConvergenceConfig,
                             max_workers: int = 1,
                             logger: Optional[Logger] = None) -> StrongErrorReport:
    sys = config.system
    if logger:
        target = "norm" if config.component is None else f"component {config.component + 1}"
        logger.info(f"Strong error study of {sys.label} ({target}): {config.n_paths} paths, reference "
                    f"{config.reference} at delta_ref={config.delta_ref:g}, steps {config.deltas}")

    batches = path_batches(config.n_paths, config.batch_size)
    results = await run_batches(batches, lambda paths: _run_batch(config, paths),
                                max_workers=max_workers, logger=logger, label="convergence")
    gaps = np.concatenate([r.gaps for r in results], axis=0)
    diverged = np.concatenate([r.diverged for r in results], axis=0)

    valid = surviving_paths(diverged, config.deltas)
    excluded = config.n_paths - int(valid.sum())
    if excluded and logger:
        per_delta = ", ".join(f"{d:g}: {int(n)}" for d, n in zip(config.deltas, diverged.sum(axis=0)))
        logger.warning(f"{excluded} path(s) excluded from every step size (diverged per delta: {per_delta})")

    errors: List[float] = []
    stderrs: List[float] = []
    n_valid: List[int] = []
    for column in range(len(config.deltas)):
        error, stderr, count = summarize_errors(gaps[valid, column], config.q)
        errors.append(error)
        stderrs.append(stderr)
        n_valid.append(count)

    report = StrongErrorReport(system_label=sys.label, q=config.q, deltas=list(config.deltas),
                               errors=errors, stderrs=stderrs, n_diverged=[excluded] * len(errors),
                               n_valid=n_valid, scheme=config.scheme, reference=config.reference,
                               component=config.component)
    if len(report.deltas) >= 2:
        report.slope, report.intercept = fit_positive_errors(report, logger)
        if logger and report.slope is not None:
            logger.info(f"Fitted strong order {report.slope:.4f}")
    return report


def strong_error(config: ConvergenceConfig,
                 max_workers: int = 1,
                 logger: Optional[Logger] = None) -> StrongErrorReport:
    return asyncio.run(strong_error_async(config, max_workers=max_workers, logger=logger))
