"""Feel-Good likelihood, Langevin sampling of the two-chain posterior, and a grid oracle.

The posterior of chain ``j`` after records ``S`` is the Gibbs density
``exp(-I(theta))`` with potential

    I(theta) = sum_{records} L_j(theta, record) - log p0(theta)
    L_j      = eta * sigma(y <theta, phi(a1) - phi(a2)>)
               - mu * max_a' <theta, phi(a') - phi(a_{3-j})>

Two evaluation paths exist. :func:`potential` / :func:`potential_gradient`
walk the records one by one and serve as the reference. :class:`DuelStats`
compresses a history into deduplicated oriented feature differences plus
per-chain adversary sums; the SGLD kernel runs on that compact form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numba
import numpy as np

from .core import DuelingRecord, History, link_sigma, link_sigma_prime
from .env import BanditInstance


class SamplerDivergenceError(RuntimeError):
    def __init__(self, round: int, message: str = ""):
        self.round = round
        super().__init__(message or f"SGLD iterate became non-finite in round {round}")


@dataclass(frozen=True)
class LikelihoodConfig:
    eta: float = 1.0
    mu: float = 0.0
    chain: int = 1

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if not self.mu >= 0:
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if self.chain not in (1, 2):
            raise ValueError(f"chain must be 1 or 2, got {self.chain}")

    def for_chain(self, chain: int) -> "LikelihoodConfig":
        return LikelihoodConfig(self.eta, self.mu, chain)


@dataclass(frozen=True)
class SgldConfig:
    step0: float = 0.005
    decay: float = 0.99
    inner_steps: int = 100
    warm_start: bool = True

    def __post_init__(self):
        if not self.step0 > 0:
            raise ValueError(f"step0 must be positive, got {self.step0}")
        if not 0 < self.decay <= 1:
            raise ValueError(f"decay must lie in (0, 1], got {self.decay}")
        if self.inner_steps < 1:
            raise ValueError(f"inner_steps must be >= 1, got {self.inner_steps}")

    def step_size(self, round: int) -> float:
        return self.step0 * self.decay ** (round - 1)


@dataclass(frozen=True)
class PriorSpec:
    """``gaussian``: N(0, scale^2 I). ``uniform_ball``: uniform on ``||theta|| <= scale``.

    The ball prior is handled by projecting iterates back onto the ball.
    """

    kind: str = "gaussian"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform_ball"):
            raise ValueError(f"unknown prior kind {self.kind!r}")
        if not self.scale > 0:
            raise ValueError(f"prior scale must be positive, got {self.scale}")

    def neg_log_density(self, theta: np.ndarray) -> float:
        """``-log p0(theta)`` up to an additive constant."""
        if self.kind == "gaussian":
            return float(theta @ theta) / (2.0 * self.scale ** 2)
        return 0.0 if np.linalg.norm(theta) <= self.scale else np.inf

    def neg_log_gradient(self, theta: np.ndarray) -> np.ndarray:
        if self.kind == "gaussian":
            return theta / self.scale ** 2
        return np.zeros_like(theta)


# --------------------------------------------------------------------------
# per-record reference path


def _oriented_diff(record: DuelingRecord, phi: np.ndarray) -> np.ndarray:
    return record.preference * (phi[record.arm1] - phi[record.arm2])


def _adversary(record: DuelingRecord, chain: int) -> int:
    # chain j compares against the other chain's arm a^{3-j}
    return record.arm2 if chain == 1 else record.arm1


def feel_good_likelihood(theta, record: DuelingRecord, instance: BanditInstance,
                         config: LikelihoodConfig) -> float:
    theta = np.asarray(theta, dtype=float)
    phi = record.features(instance.arms)
    fit = config.eta * link_sigma(theta @ _oriented_diff(record, phi))
    if config.mu == 0:
        return float(fit)
    adv = phi[_adversary(record, config.chain)]
    optimism = np.max((phi - adv) @ theta)
    return float(fit - config.mu * optimism)


def potential(theta, history: Sequence[DuelingRecord], instance: BanditInstance,
              lik: LikelihoodConfig, prior: PriorSpec) -> float:
    theta = np.asarray(theta, dtype=float)
    total = 0.0
    for rec in history:
        total += feel_good_likelihood(theta, rec, instance, lik)
    return total + prior.neg_log_density(theta)


def potential_gradient(theta, history: Sequence[DuelingRecord], instance: BanditInstance,
                       lik: LikelihoodConfig, prior: PriorSpec) -> np.ndarray:
    """Gradient of :func:`potential`; the max term uses its active (lowest-index) arm."""
    theta = np.asarray(theta, dtype=float)
    grad = prior.neg_log_gradient(theta).astype(float)
    for rec in history:
        phi = rec.features(instance.arms)
        diff = _oriented_diff(rec, phi)
        grad += lik.eta * link_sigma_prime(theta @ diff) * diff
        if lik.mu:
            best = int(np.argmax(phi @ theta))
            grad -= lik.mu * (phi[best] - phi[_adversary(rec, lik.chain)])
    return grad


# --------------------------------------------------------------------------
# compact sufficient statistics


class DuelStats:
    """Deduplicated summary of a history, sufficient for both chains' potentials.

    * ``diffs``/``weights``: distinct oriented differences ``y (phi(a1) - phi(a2))``
      with accumulated weights (counts, or importance weights for layered
      estimators);
    * ``adv_sum[j]``: sum of the adversary features ``phi(a^{3-j})`` for chain ``j``;
    * ``arm_sets``/``set_counts``: the action sets the records were drawn from,
      with multiplicities, for the Feel-Good max term.
    """

    def __init__(self, d: int):
        self.d = d
        self.n = 0
        self._diffs = np.zeros((8, d))
        self._weights = np.zeros(8)
        self._m = 0
        self._index: dict[bytes, int] = {}
        self.adv_sum = np.zeros((2, d))
        self._sets: list[np.ndarray] = []
        self._set_ids: dict[int, int] = {}
        self._set_counts: list[float] = []

    @classmethod
    def from_history(cls, history: Sequence[DuelingRecord], instance: BanditInstance) -> "DuelStats":
        stats = cls(instance.d)
        for rec in history:
            stats.add(rec, instance.arms)
        return stats

    @property
    def diffs(self) -> np.ndarray:
        return self._diffs[: self._m]

    @property
    def weights(self) -> np.ndarray:
        return self._weights[: self._m]

    @property
    def arm_sets(self) -> np.ndarray:
        if not self._sets:
            return np.zeros((0, 1, self.d))
        return np.stack(self._sets)

    @property
    def set_counts(self) -> np.ndarray:
        return np.asarray(self._set_counts, dtype=float)

    def add_diff(self, diff: np.ndarray, weight: float = 1.0) -> None:
        key = np.ascontiguousarray(diff, dtype=float).tobytes()
        i = self._index.get(key)
        if i is None:
            if self._m == len(self._weights):
                self._diffs = np.concatenate([self._diffs, np.zeros_like(self._diffs)])
                self._weights = np.concatenate([self._weights, np.zeros_like(self._weights)])
            i = self._m
            self._index[key] = i
            self._diffs[i] = diff
            self._m += 1
        self._weights[i] += weight

    def add(self, record: DuelingRecord, arms: np.ndarray) -> None:
        phi = record.features(arms)
        self.add_diff(_oriented_diff(record, phi))
        self.adv_sum[0] += phi[record.arm2]
        self.adv_sum[1] += phi[record.arm1]
        key = id(phi)
        g = self._set_ids.get(key)
        if g is None:
            g = len(self._sets)
            self._set_ids[key] = g
            self._sets.append(phi)
            self._set_counts.append(0.0)
        self._set_counts[g] += 1.0
        self.n += 1


def stats_potential(theta, stats: DuelStats, lik: LikelihoodConfig, prior: PriorSpec) -> float:
    theta = np.asarray(theta, dtype=float)
    val = lik.eta * float(stats.weights @ link_sigma(stats.diffs @ theta)) if stats.n else 0.0
    if lik.mu and stats.n:
        best = np.max(stats.arm_sets @ theta, axis=1)
        val -= lik.mu * (float(stats.set_counts @ best) - float(stats.adv_sum[lik.chain - 1] @ theta))
    return val + prior.neg_log_density(theta)


def stats_gradient(theta, stats: DuelStats, lik: LikelihoodConfig, prior: PriorSpec) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    grad = prior.neg_log_gradient(theta).astype(float)
    if stats.n:
        grad += lik.eta * (stats.weights * link_sigma_prime(stats.diffs @ theta)) @ stats.diffs
        if lik.mu:
            sets = stats.arm_sets
            best = np.argmax(sets @ theta, axis=1)
            chosen = sets[np.arange(len(sets)), best]
            grad -= lik.mu * (stats.set_counts @ chosen - stats.adv_sum[lik.chain - 1])
    return grad


# --------------------------------------------------------------------------
# Langevin kernel


@numba.njit(cache=True)
def _langevin_steps(theta, diffs, weights, arm_sets, set_counts, adv_sum,
                    eta, mu, ball, prior_scale, delta, noise):
    d = theta.shape[0]
    m = diffs.shape[0]
    G = arm_sets.shape[0]
    K = arm_sets.shape[1]
    x = theta.copy()
    grad = np.empty(d)
    inv_var = 1.0 / (prior_scale * prior_scale)
    root = np.sqrt(2.0 * delta)
    for step in range(noise.shape[0]):
        for i in range(d):
            grad[i] = 0.0 if ball else x[i] * inv_var
        for k in range(m):
            z = 0.0
            for i in range(d):
                z += diffs[k, i] * x[i]
            if z >= 0:
                e = np.exp(-z)
                s = -e / (1.0 + e)
            else:
                s = -1.0 / (1.0 + np.exp(z))
            c = eta * weights[k] * s
            for i in range(d):
                grad[i] += c * diffs[k, i]
        if mu != 0.0:
            for g in range(G):
                best = 0
                best_val = -np.inf
                for a in range(K):
                    v = 0.0
                    for i in range(d):
                        v += arm_sets[g, a, i] * x[i]
                    if v > best_val:
                        best_val = v
                        best = a
                for i in range(d):
                    grad[i] -= mu * set_counts[g] * arm_sets[g, best, i]
            for i in range(d):
                grad[i] += mu * adv_sum[i]
        for i in range(d):
            x[i] = x[i] - delta * grad[i] + root * noise[step, i]
        if ball:
            norm = 0.0
            for i in range(d):
                norm += x[i] * x[i]
            norm = np.sqrt(norm)
            if norm > prior_scale:
                for i in range(d):
                    x[i] *= prior_scale / norm
        for i in range(d):
            if not np.isfinite(x[i]):
                return x, False
    return x, True


def sgld_sample(rng: np.random.Generator, init, history: Union[History, Sequence[DuelingRecord], DuelStats],
                instance: BanditInstance, lik: LikelihoodConfig, prior: PriorSpec,
                sgld: SgldConfig, round: int, *, step_size: Optional[float] = None) -> np.ndarray:
    """Run ``sgld.inner_steps`` Langevin iterations from ``init`` and return the last iterate.

    The step size is ``step0 * decay**(round - 1)`` unless ``step_size`` is
    given. ``history`` may be a record sequence or a prebuilt :class:`DuelStats`.
    """
    if round < 1:
        raise ValueError(f"round must be >= 1, got {round}")
    stats = history if isinstance(history, DuelStats) else DuelStats.from_history(history, instance)
    delta = sgld.step_size(round) if step_size is None else step_size
    return run_langevin(rng, init, stats, lik, prior, delta, sgld.inner_steps, round)


def run_langevin(rng: np.random.Generator, init, stats: DuelStats, lik: LikelihoodConfig,
                 prior: PriorSpec, delta: float, steps: int, round: int = 1) -> np.ndarray:
    theta = np.asarray(init, dtype=float)
    noise = rng.standard_normal((steps, stats.d))
    if stats.n:
        sets, counts = stats.arm_sets, stats.set_counts
    else:
        sets, counts = np.zeros((0, 1, stats.d)), np.zeros(0)
    out, ok = _langevin_steps(
        theta, stats.diffs, stats.weights, sets, counts, stats.adv_sum[lik.chain - 1],
        float(lik.eta), float(lik.mu), prior.kind == "uniform_ball", float(prior.scale),
        float(delta), noise,
    )
    if not ok:
        raise SamplerDivergenceError(round)
    return out


# --------------------------------------------------------------------------
# exact oracle


def log_normalize(logw: np.ndarray) -> np.ndarray:
    logw = np.asarray(logw, dtype=float)
    top = np.max(logw)
    if not np.isfinite(top):
        raise ValueError("every grid point has zero posterior mass")
    w = np.exp(logw - top)
    return w / w.sum()


def exact_posterior_grid(history: Sequence[DuelingRecord], instance: BanditInstance,
                         lik: LikelihoodConfig, prior: PriorSpec, grid) -> np.ndarray:
    """Posterior weights ``exp(-I(theta_g))`` normalized over the grid points."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    if grid.shape[0] == 0:
        raise ValueError("grid must be nonempty")
    records = list(history)
    neg = np.array([-potential(g, records, instance, lik, prior) for g in grid])
    return log_normalize(neg)
