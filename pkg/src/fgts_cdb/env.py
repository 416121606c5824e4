"""Synthetic linear dueling-bandit instances, BTL feedback and regret accounting."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import preference_probability


class InvalidConfigurationError(ValueError):
    pass


class FeatureConvention(str, enum.Enum):
    RAW_PM1 = "raw"
    UNIT_NORMALIZED = "unit"

    @classmethod
    def parse(cls, value) -> "FeatureConvention":
        if isinstance(value, cls):
            return value
        aliases = {"raw": cls.RAW_PM1, "raw_pm1": cls.RAW_PM1,
                   "unit": cls.UNIT_NORMALIZED, "unit_normalized": cls.UNIT_NORMALIZED}
        try:
            return aliases[str(value).lower()]
        except KeyError:
            raise InvalidConfigurationError(f"unknown feature convention {value!r}") from None


@dataclass(frozen=True, eq=False)
class BanditInstance:
    theta_star: np.ndarray
    arms: np.ndarray
    convention: FeatureConvention = FeatureConvention.RAW_PM1

    def __post_init__(self):
        self.theta_star.setflags(write=False)
        self.arms.setflags(write=False)

    @property
    def d(self) -> int:
        return self.arms.shape[1]

    @property
    def K(self) -> int:
        return self.arms.shape[0]

    def rewards(self, arms: Optional[np.ndarray] = None) -> np.ndarray:
        arms = self.arms if arms is None else arms
        return arms @ self.theta_star

    def best_arm(self, arms: Optional[np.ndarray] = None) -> int:
        return int(np.argmax(self.rewards(arms)))

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.theta_star).tobytes())
        h.update(np.ascontiguousarray(self.arms).tobytes())
        return h.hexdigest()[:16]


def _distinct_sign_vectors(rng: np.random.Generator, d: int, K: int) -> np.ndarray:
    if K > 2 ** d:
        raise InvalidConfigurationError(
            f"cannot draw K={K} distinct arms from {{-1,1}}^{d} (only {2 ** d} exist)"
        )
    if d > 60:
        seen_rows: set[bytes] = set()
        rows = []
        while len(rows) < K:
            v = rng.choice([-1.0, 1.0], size=d)
            if v.tobytes() not in seen_rows:
                seen_rows.add(v.tobytes())
                rows.append(v)
        return np.array(rows)
    if 2 * K >= 2 ** d:
        # rejection stalls near exhaustion; enumerate codes and sample without replacement
        codes = rng.permutation(2 ** d)[:K]
    else:
        seen: set[int] = set()
        codes = []
        while len(codes) < K:
            c = int(rng.integers(0, 2 ** d))
            if c not in seen:
                seen.add(c)
                codes.append(c)
        codes = np.asarray(codes)
    bits = (codes[:, None] >> np.arange(d)[None, :]) & 1
    return (2.0 * bits - 1.0).astype(float)


def draw_arms(rng: np.random.Generator, d: int, K: int, convention=FeatureConvention.RAW_PM1) -> np.ndarray:
    convention = FeatureConvention.parse(convention)
    arms = _distinct_sign_vectors(rng, d, K)
    if convention is FeatureConvention.UNIT_NORMALIZED:
        arms = arms / np.sqrt(d)
    return arms


def generate_instance(seed, d: int, K: int, convention=FeatureConvention.RAW_PM1) -> BanditInstance:
    """Draw a unit-norm ``theta_star`` and ``K`` distinct sign-vector arms.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng`.
    """
    if d < 1 or K < 1:
        raise InvalidConfigurationError(f"d and K must be positive, got d={d}, K={K}")
    convention = FeatureConvention.parse(convention)
    rng = np.random.default_rng(seed)
    theta = rng.standard_normal(d)
    while not np.any(theta):
        theta = rng.standard_normal(d)
    theta = theta / np.linalg.norm(theta)
    arms = draw_arms(rng, d, K, convention)
    return BanditInstance(theta_star=theta, arms=arms, convention=convention)


def sample_preference(rng: np.random.Generator, instance: BanditInstance, a1: int, a2: int,
                      arms: Optional[np.ndarray] = None) -> int:
    r = instance.rewards(arms)
    p = preference_probability(r[a1], r[a2])
    return 1 if rng.random() < p else -1


def per_round_regret(instance: BanditInstance, a1: int, a2: int,
                     arms: Optional[np.ndarray] = None) -> float:
    """``r*(a*) - (r*(a1) + r*(a2)) / 2``."""
    r = instance.rewards(arms)
    return float(r.max() - 0.5 * (r[a1] + r[a2]))


def regret_decomposition_check(instance: BanditInstance, theta1, theta2, a1: int, a2: int,
                               arms: Optional[np.ndarray] = None) -> float:
    """Residual of the Bellman-error / Feel-Good decomposition of one round's regret.

    With ``a_j`` the argmax arm under ``theta_j`` the regret equals
    ``(BE1 + BE2 - FG1 - FG2) / 2`` exactly; the returned residual is the
    absolute floating-point discrepancy. Nothing is asserted here, so a
    violated argmax precondition simply shows up as a large residual.
    """
    phi = instance.arms if arms is None else arms
    theta_star = instance.theta_star
    thetas = (np.asarray(theta1, dtype=float), np.asarray(theta2, dtype=float))
    chosen = (a1, a2)
    best = phi[int(np.argmax(phi @ theta_star))]

    total = 0.0
    for j in range(2):
        own, other = phi[chosen[j]], phi[chosen[1 - j]]
        bellman = (thetas[j] - theta_star) @ (own - other)
        feel_good = np.max((phi - other) @ thetas[j]) - theta_star @ (best - other)
        total += bellman - feel_good
    return abs(per_round_regret(instance, a1, a2, arms) - 0.5 * total)


@dataclass
class RegretTrace:
    """Per-round regret of one run. ``error`` is set when the run failed."""

    instantaneous: np.ndarray
    run_index: int = 0
    instance_hash: str = ""
    error: Optional[str] = None

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.instantaneous)

    @property
    def failed(self) -> bool:
        return self.error is not None

    def __len__(self) -> int:
        return len(self.instantaneous)
