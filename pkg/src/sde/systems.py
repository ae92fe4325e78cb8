"""Built-in SDE problems.

Every preset bundles the system with the initial value, default truncation
policy, assumption constants and local growth functions R -> K_R, K_bar_R
used for its experiments.
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Tuple
import math

import numpy as np

from src.truncation.policies import example1_l, inverse_policy, power_policy
from src.types.policy import GrowthFn, TruncationPolicy
from src.types.sde_system import AssumptionParams, SdeSystem
from src.utils.errors import InputError, UnknownSystemError

SQRT2 = math.sqrt(2.0)

# Example 2 radius h(delta) = scale * delta^(-2 eps / 25)
EXAMPLE2_EPSILON = 0.1
EXAMPLE2_SCALE = 128.0
EXAMPLE1_EPSILON = 0.5


@dataclass(frozen=True, eq=False)
class SystemPreset:
    system: SdeSystem
    x0: np.ndarray
    policy: TruncationPolicy
    assumptions: AssumptionParams
    k_plain: Optional[GrowthFn]
    k_bar: Optional[GrowthFn]
    description: str

    def to_dict(self) -> Dict:
        return {
            "label": self.system.label,
            "d": self.system.d,
            "m": self.system.m,
            "x0": self.x0.tolist(),
            "policy": self.policy.label,
            "assumptions": self.assumptions.to_dict(),
            "params": dict(self.system.params),
            "description": self.description,
        }


def _radius(x: np.ndarray) -> np.ndarray:
    return np.linalg.norm(x, axis=-1)


def _safe_inverse(r: np.ndarray) -> np.ndarray:
    """1/r with 0 at r = 0"""
    return np.divide(1.0, r, out=np.zeros_like(r), where=r > 0)


# Example 1: exponentially growing coefficients, m = 1

def _example1_drift(x):
    x1, x2 = x[..., 0], x[..., 1]
    e = np.exp(_radius(x))
    return np.stack([x1 - 2.0 * x1 * e - x2 * e, x2 + x1 * e - 2.0 * x2 * e], axis=-1)


def _example1_diffusion(x):
    return (x * np.exp(0.5 * _radius(x))[..., None])[..., None]


def _example1_jacobian(x):
    r = _radius(x)
    outer = x[..., :, None] * x[..., None, :] * (0.5 * _safe_inverse(r))[..., None, None]
    J = np.exp(0.5 * r)[..., None, None] * (np.eye(x.shape[-1]) + outer)
    return J[..., :, None, :]


def _example1() -> SystemPreset:
    system = SdeSystem(d=2, m=1, drift=_example1_drift, diffusion=_example1_diffusion,
                       diffusion_jacobian=_example1_jacobian, label="example1")
    k_plain = lambda R: 3.0 * R * math.exp(R)
    k_bar = lambda R: 18.0 * R ** 3 * math.exp(2.0 * R)
    policy = inverse_policy(example1_l(EXAMPLE1_EPSILON), label=f"inverse(example1, eps={EXAMPLE1_EPSILON:g})")
    return SystemPreset(system=system, x0=np.array([1.0, 1.0]),
                        policy=policy.with_growth(k_plain, k_bar),
                        assumptions=AssumptionParams(p=5, K=1), k_plain=k_plain, k_bar=k_bar,
                        description="exponentially growing drift and diffusion, scalar noise")


# Example 2: polynomial growth, diagonal noise

def _example2_drift(x):
    x1, x2 = x[..., 0], x[..., 1]
    return np.stack([1.0 - 3.0 * x1 ** 3 + x2, x1], axis=-1)


def _example2_diffusion(x):
    g = np.zeros(x.shape[:-1] + (2, 2))
    g[..., 0, 0] = x[..., 0] ** 2
    g[..., 1, 1] = x[..., 1]
    return g


def _example2_jacobian(x):
    J = np.zeros(x.shape[:-1] + (2, 2, 2))
    J[..., 0, 0, 0] = 2.0 * x[..., 0]
    J[..., 1, 1, 1] = 1.0
    return J


def _example2() -> SystemPreset:
    system = SdeSystem(d=2, m=2, drift=_example2_drift, diffusion=_example2_diffusion,
                       diffusion_jacobian=_example2_jacobian, label="example2")
    k_plain = lambda R: 9.0 * R ** 2
    k_bar = lambda R: 81.0 * R ** 5
    policy = power_policy(2.0 * EXAMPLE2_EPSILON / 25.0, scale=EXAMPLE2_SCALE)
    return SystemPreset(system=system, x0=np.array([1.0, 1.0]),
                        policy=policy.with_growth(k_plain, k_bar),
                        assumptions=AssumptionParams(p=7, K=4), k_plain=k_plain, k_bar=k_bar,
                        description="cubic drift, diagonal noise diag(x1^2, x2)")


# Example 3: dissipative cubic drift, scalar noise

def _example3_drift(x):
    x1, x2 = x[..., 0], x[..., 1]
    return np.stack([-x1 - 2.0 * x1 ** 3 - x2, -x2 + x1 - 2.0 * x2 ** 3], axis=-1)


def _example3_paper_diffusion(x):
    return (_radius(x)[..., None] * x)[..., None]


def _example3_paper_jacobian(x):
    r = _radius(x)
    outer = x[..., :, None] * x[..., None, :] * _safe_inverse(r)[..., None, None]
    J = r[..., None, None] * np.eye(x.shape[-1]) + outer
    return J[..., :, None, :]


def _example3_consistent_diffusion(x):
    return (x * x / SQRT2)[..., None]


def _example3_consistent_jacobian(x):
    J = np.zeros(x.shape + (1, x.shape[-1]))
    for i in range(x.shape[-1]):
        J[..., i, 0, i] = SQRT2 * x[..., i]
    return J


def _example3(variant: str) -> SystemPreset:
    if variant == "paper":
        diffusion, jacobian = _example3_paper_diffusion, _example3_paper_jacobian
        description = "dissipative cubic drift, diffusion |x| x as printed"
    else:
        diffusion, jacobian = _example3_consistent_diffusion, _example3_consistent_jacobian
        description = "dissipative cubic drift, diffusion (x1^2, x2^2)/sqrt(2)"
    system = SdeSystem(d=2, m=1, drift=_example3_drift, diffusion=diffusion,
                       diffusion_jacobian=jacobian, label=f"example3-{variant}")
    k_plain = lambda R: 18.0 * R ** 2
    policy = power_policy(1.0 / 13.0)
    return SystemPreset(system=system, x0=np.array([1.0, -1.0]),
                        policy=policy.with_growth(k_plain, None),
                        assumptions=AssumptionParams(p=7, lam=1), k_plain=k_plain, k_bar=None,
                        description=description)


# Geometric Brownian motion, the exact-solution oracle

def _gbm(mu: float = 0.5, sigma: float = 1.0) -> SystemPreset:
    def drift(x):
        return mu * x

    def diffusion(x):
        return (sigma * x)[..., None]

    def jacobian(x):
        return np.full(x.shape + (1, 1), sigma)

    def exact(x0, t, b):
        return x0 * np.exp((mu - 0.5 * sigma ** 2) * t + sigma * b)

    system = SdeSystem(d=1, m=1, drift=drift, diffusion=diffusion, diffusion_jacobian=jacobian,
                       label="gbm", exact_solution=exact, params={"mu": mu, "sigma": sigma})
    growth = max(abs(mu), abs(sigma), sigma ** 2)
    k_plain = lambda R: growth
    k_bar = lambda R: growth
    p = 3.0
    rate = mu + 0.5 * (p - 1.0) * sigma ** 2
    assumptions = AssumptionParams(p=p, K=abs(mu) + 0.5 * (p - 1.0) * sigma ** 2 or 1.0,
                                   lam=-rate if rate < 0 else None)
    # Linear coefficients need no taming
    policy = power_policy(1.0, scale=1e6)
    return SystemPreset(system=system, x0=np.array([1.0]),
                        policy=policy.with_growth(k_plain, k_bar),
                        assumptions=assumptions, k_plain=k_plain, k_bar=k_bar,
                        description=f"geometric Brownian motion, mu={mu:g}, sigma={sigma:g}")


# Non-commutative witness: g_1 = (x2, 0), g_2 = (0, x1)

def _witness_diffusion(x):
    g = np.zeros(x.shape[:-1] + (2, 2))
    g[..., 0, 0] = x[..., 1]
    g[..., 1, 1] = x[..., 0]
    return g


def _witness_jacobian(x):
    J = np.zeros(x.shape[:-1] + (2, 2, 2))
    J[..., 0, 0, 1] = 1.0
    J[..., 1, 1, 0] = 1.0
    return J


def _witness() -> SystemPreset:
    system = SdeSystem(d=2, m=2, drift=lambda x: -x, diffusion=_witness_diffusion,
                       diffusion_jacobian=_witness_jacobian, label="noncommutative-witness")
    return SystemPreset(system=system, x0=np.array([1.0, 1.0]), policy=power_policy(0.25),
                        assumptions=AssumptionParams(p=3, K=1), k_plain=None, k_bar=None,
                        description="linear diffusion violating commutativity")


REGISTRY: Dict[str, Tuple[Callable[..., SystemPreset], Tuple[str, ...]]] = {
    "example1": (_example1, ()),
    "example2": (_example2, ()),
    "example3-paper": (lambda: _example3("paper"), ()),
    "example3-consistent": (lambda: _example3("consistent"), ()),
    "gbm": (_gbm, ("mu", "sigma")),
    "noncommutative-witness": (_witness, ()),
}


def build_preset(label: str, params: Optional[Mapping[str, float]] = None) -> SystemPreset:
    """Instantiate a registry entry; only gbm accepts parameters (mu, sigma)"""
    if label not in REGISTRY:
        raise UnknownSystemError(f"Unknown system '{label}'. Known systems: {', '.join(REGISTRY)}")
    factory, accepted = REGISTRY[label]
    params = dict(params or {})
    unexpected = sorted(set(params) - set(accepted))
    if unexpected:
        raise InputError(f"System '{label}' takes no parameters {unexpected}")
    return factory(**params)


def get_system(label: str, params: Optional[Mapping[str, float]] = None) -> SdeSystem:
    return build_preset(label, params).system


def list_systems() -> List[Tuple[str, str]]:
    """(label, one-line description) for every registry entry"""
    return [(label, build_preset(label).description) for label in REGISTRY]
