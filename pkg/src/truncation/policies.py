"""Truncation radius policies h(delta) and their admissibility diagnostics."""
from functools import lru_cache
from logging import Logger
from typing import Any, Callable, Dict, Optional, Sequence
import math

import numpy as np
from scipy import optimize

from src.types.policy import PolicyReport, TruncationPolicy
from src.utils.errors import ConfigError, NoSolutionError, PolicyError

MAX_BRACKET_STEPS = 200
INVERSION_RTOL = 1e-12

RadiusToStep = Callable[[float], float]


def power_policy(exponent: float, scale: float = 1.0, delta_star: float = 1.0) -> TruncationPolicy:
    """h(delta) = scale * delta^(-exponent)"""
    if not exponent > 0:
        raise PolicyError(f"Power policy needs a positive exponent to be strictly decreasing, got {exponent}")
    if not scale > 0:
        raise PolicyError(f"Power policy scale must be positive, got {scale}")

    def h(delta: float) -> float:
        return scale * delta ** (-exponent)

    label = f"pow({exponent:g})" if scale == 1 else f"{scale:g}*pow({exponent:g})"
    return TruncationPolicy(h=h, delta_star=delta_star, label=label)


def example1_l(epsilon: float = 0.5) -> RadiusToStep:
    """l(r) = 1 / (18^(5/2) r^(15/2 + eps) e^(5r)), evaluated in the log domain"""
    if not 0 < epsilon < 1:
        raise PolicyError(f"epsilon must lie in (0, 1), got {epsilon}")
    log_c = 2.5 * math.log(18.0)

    def l(r: float) -> float:
        with np.errstate(divide='ignore', over='ignore'):
            return float(np.exp(-(log_c + (7.5 + epsilon) * np.log(r) + 5.0 * r)))

    return l


NAMED_L = {"example1": example1_l}


def invert_radius(l: RadiusToStep, target_delta: float, start: float = 1.0) -> float:
    """Solve l(r) = target_delta for a strictly decreasing l.

    The bracket starts at [start, 2*start] and is doubled (or halved) until it
    encloses the target, then refined by bisection.
    """
    if not target_delta > 0:
        raise PolicyError(f"Target step must be positive, got {target_delta}")

    def excess(r: float) -> float:
        return l(r) - target_delta

    lo, hi = start, 2.0 * start
    for _ in range(MAX_BRACKET_STEPS):
        if excess(hi) <= 0:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NoSolutionError(f"Could not bracket l(r) = {target_delta:g} from above")
    for _ in range(MAX_BRACKET_STEPS):
        if excess(lo) >= 0:
            break
        lo, hi = 0.5 * lo, lo
    else:
        raise NoSolutionError(f"Could not bracket l(r) = {target_delta:g} from below")

    if excess(lo) == 0:
        return lo
    if excess(hi) == 0:
        return hi
    return optimize.bisect(excess, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000)


def inverse_policy(l: RadiusToStep, delta_star: float = 1.0, label: str = "inverse") -> TruncationPolicy:
    """h = l^{-1}, cached per step size"""

    @lru_cache(maxsize=None)
    def h(delta: float) -> float:
        return invert_radius(l, delta, start=delta_star)

    return TruncationPolicy(h=h, delta_star=delta_star, label=label)


def policy_from_spec(spec: Dict[str, Any], preset=None) -> TruncationPolicy:
    """Build a policy from config keys (h, exponent, scale, l, epsilon, delta_star).

    An empty spec selects the preset's default policy; growth functions of the
    preset are attached in both cases.
    """
    if not spec:
        if preset is None:
            raise ConfigError("No truncation policy configured and no system preset to default to")
        return preset.policy

    kind = spec.get("h", "pow" if "exponent" in spec else None)
    delta_star = float(spec.get("delta_star", 1.0))
    if kind == "pow":
        if "exponent" not in spec:
            raise ConfigError("h = pow needs an exponent")
        policy = power_policy(float(spec["exponent"]), float(spec.get("scale", 1.0)), delta_star)
    elif kind == "inverse":
        name = spec.get("l", "example1")
        if name not in NAMED_L:
            raise ConfigError(f"Unknown radius inverse l = {name}; known: {', '.join(NAMED_L)}")
        epsilon = float(spec.get("epsilon", 0.5))
        policy = inverse_policy(NAMED_L[name](epsilon), delta_star, label=f"inverse({name}, eps={epsilon:g})")
    else:
        raise ConfigError(f"Unknown policy kind h = {kind}; expected pow or inverse")

    if preset is not None:
        policy = policy.with_growth(preset.k_plain, preset.k_bar)
    return policy


def validate_policy(policy: TruncationPolicy, deltas: Sequence[float],
                    p: Optional[float] = None, q: Optional[float] = None,
                    logger: Optional[Logger] = None) -> PolicyReport:
    """Probe the step/radius constraints of a policy over the given step sizes.

    convergence: delta * K_bar(h)^(9/4) <= 1
    stability trend: delta * K(h)^6, expected to decrease towards 0
    rate condition (p, q given): h >= (delta^q K_bar(h)^(5q/2))^(-1/(p-q))
    """
    deltas = sorted(float(d) for d in deltas)
    radii = [policy.radius(d) for d in deltas]
    notes = []

    monotone_ok = all(r1 > r2 for r1, r2 in zip(radii, radii[1:]))
    if not monotone_ok:
        notes.append("h is not strictly decreasing over the sampled steps")

    convergence_ok = None
    convergence_values = []
    rate_condition_ok = None
    if policy.k_bar is None:
        notes.append("convergence constraint not checkable: no K_bar growth function")
    else:
        convergence_values = [(d, d * policy.k_bar(r) ** 2.25) for d, r in zip(deltas, radii)]
        convergence_ok = all(v <= 1 for _, v in convergence_values)
        if p is not None and q is not None:
            if not 0 < q < p:
                notes.append(f"rate condition needs 0 < q < p, got p={p:g}, q={q:g}")
            else:
                rate_condition_ok = all(
                    math.log(r) >= -(q * math.log(d) + 2.5 * q * math.log(policy.k_bar(r))) / (p - q)
                    for d, r in zip(deltas, radii))

    stability_trend = []
    if policy.k_plain is None:
        notes.append("stability trend not checkable: no K growth function")
    else:
        stability_trend = [(d, d * policy.k_plain(r) ** 6) for d, r in zip(deltas, radii)]

    report = PolicyReport(
        convergence_ok=convergence_ok,
        stability_trend=stability_trend,
        notes="; ".join(notes),
        convergence_values=convergence_values,
        rate_condition_ok=rate_condition_ok,
        monotone_ok=monotone_ok,
    )
    if logger:
        logger.info(f"Policy {policy.label}: convergence_ok={convergence_ok}, rate_condition_ok={rate_condition_ok}")
        if report.notes:
            logger.warning(f"Policy {policy.label}: {report.notes}")
    return report
