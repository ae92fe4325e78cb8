"""Long-horizon p-th moment exponent of the mtm scheme.

L_k = log mean_paths |Y_k|^p is accumulated in the log domain (log-sum-exp per
batch, logaddexp across batches in batch order), so moments far below the
smallest float stay representable.
"""
from dataclasses import dataclass
from logging import Logger
from typing import Optional
import asyncio

import numpy as np
from scipy import special

from src.brownian.increments import sample_increments
from src.experiments.parallel import path_batches, run_batches
from src.integrate.milstein import integrate
from src.types.reports import StabilityConfig, StabilityReport
from src.utils.errors import ExperimentError, InputError


@dataclass
class _BatchMoments:
    log_sums: np.ndarray
    n_valid: int


def log_mean_moment(values, p: float) -> float:
    """log(mean |v|^p) without forming |v|^p"""
    values = np.abs(np.asarray(values, dtype=np.float64)).reshape(-1)
    if values.size == 0:
        raise InputError("log_mean_moment needs at least one value")
    with np.errstate(divide='ignore'):
        return float(special.logsumexp(p * np.log(values)) - np.log(values.size))


def _magnitudes(states: np.ndarray, component: Optional[int]) -> np.ndarray:
    if component is None:
        return np.linalg.norm(states, axis=-1)
    return np.abs(states[..., component])


def _run_batch(config: StabilityConfig, ks: np.ndarray, paths: range) -> _BatchMoments:
    sys = config.system
    increments = sample_increments(config.master_seed, paths, sys.m, config.n_steps, config.delta)
    run = integrate(sys, config.policy, config.delta, config.x0, increments,
                    scheme="mtm", record_steps=ks)
    kept = ~run.diverged
    with np.errstate(divide='ignore'):
        log_values = config.p * np.log(_magnitudes(run.states[kept], config.component))
    if log_values.shape[0] == 0:
        return _BatchMoments(log_sums=np.full(ks.size, -np.inf), n_valid=0)
    return _BatchMoments(log_sums=special.logsumexp(log_values, axis=0), n_valid=int(kept.sum()))


def tail_average(values: np.ndarray) -> Optional[float]:
    """Mean of the finite entries in the last quartile"""
    tail = values[int(np.floor(0.75 * values.size)):]
    tail = tail[np.isfinite(tail)]
    return float(np.mean(tail)) if tail.size else None


async def moment_exponent_async(config: StabilityConfig,
                                max_workers: int = 1,
                                logger: Optional[Logger] = None) -> StabilityReport:
    sys = config.system
    ks = config.sampled_steps()
    target = "|Y|" if config.component is None else f"|Y^({config.component + 1})|"
    if logger:
        logger.info(f"Moment exponent of {sys.label}: E{target}^{config.p:g}, delta={config.delta:g}, "
                    f"{config.n_steps} steps, {config.n_paths} paths")

    batches = path_batches(config.n_paths, config.batch_size)
    results = await run_batches(batches, lambda paths: _run_batch(config, ks, paths),
                                max_workers=max_workers, logger=logger, label="stability")

    accumulated = np.full(ks.size, -np.inf)
    n_valid = 0
    for result in results:
        accumulated = np.logaddexp(accumulated, result.log_sums)
        n_valid += result.n_valid
    if n_valid == 0:
        raise ExperimentError(f"All {config.n_paths} paths diverged at delta={config.delta:g}")
    n_diverged = config.n_paths - n_valid
    if n_diverged and logger:
        logger.warning(f"{n_diverged} diverged path(s) excluded from the moment estimate")

    log_moments = accumulated - np.log(n_valid)
    flagged = ~np.isfinite(log_moments)
    exponents = np.where(flagged, np.nan, log_moments / (ks * config.delta))
    if flagged.any() and logger:
        logger.warning(f"{int(flagged.sum())} sampled step(s) have a zero moment estimate and are flagged")

    report = StabilityReport(
        system_label=sys.label,
        p=config.p,
        delta=config.delta,
        component=config.component,
        ks=[int(k) for k in ks],
        log_moments=log_moments.tolist(),
        exponents=exponents.tolist(),
        flagged=flagged.tolist(),
        tail_exponent=tail_average(exponents),
        n_valid=n_valid,
        n_diverged=n_diverged,
        lam=config.lam,
        epsilon_ref=config.epsilon_ref,
    )
    if logger and report.tail_exponent is not None:
        logger.info(f"Tail moment exponent {report.tail_exponent:.4f}")
    return report


def moment_exponent(config: StabilityConfig,
                    max_workers: int = 1,
                    logger: Optional[Logger] = None) -> StabilityReport:
    return asyncio.run(moment_exponent_async(config, max_workers=max_workers, logger=logger))
