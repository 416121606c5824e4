"""General reward classes and exact posteriors over finite model sets.

A reward class maps a parameter and a round's ``(K, d)`` feature matrix to
the vector of ``K`` rewards. With a finite parameter set the two-chain
posterior is a probability vector and can be computed exactly, so no
Langevin sampler is needed.

The decoupling coefficient, the parameter-space measure and metric, and the
Lipschitz constant of the theory only enter regret bounds; nothing here
computes them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import DuelingRecord, link_sigma
from .posterior import LikelihoodConfig, log_normalize


class RewardClass:
    """Family ``{r_theta}`` of rewards bounded by ``bound`` in absolute value."""

    bound: float = np.inf

    def evaluate(self, theta, arms: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gap(self, theta, arms: np.ndarray, a1: int, a2: int) -> float:
        r = self.evaluate(theta, arms)
        return float(r[a1] - r[a2])


@dataclass(frozen=True)
class LinearRewardClass(RewardClass):
    bound: float = np.inf

    def evaluate(self, theta, arms):
        return arms @ np.asarray(theta, dtype=float)


@dataclass(frozen=True)
class TanhRewardClass(RewardClass):
    """``bound * tanh(<theta, phi> / bound)``: a saturating, bounded reward."""

    bound: float = 1.0

    def evaluate(self, theta, arms):
        return self.bound * np.tanh(arms @ np.asarray(theta, dtype=float) / self.bound)


@dataclass(frozen=True)
class FiniteModelSet:
    models: np.ndarray
    prior: np.ndarray

    def __post_init__(self):
        models = np.atleast_2d(np.asarray(self.models, dtype=float))
        prior = np.asarray(self.prior, dtype=float)
        if prior.shape != (models.shape[0],):
            raise ValueError(f"prior has shape {prior.shape}, expected ({models.shape[0]},)")
        if np.any(prior < 0) or abs(prior.sum() - 1.0) > 1e-12:
            raise ValueError("prior must be a probability vector")
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "prior", prior)

    @classmethod
    def uniform(cls, models) -> "FiniteModelSet":
        models = np.atleast_2d(np.asarray(models, dtype=float))
        n = models.shape[0]
        return cls(models, np.full(n, 1.0 / n))

    def __len__(self):
        return self.models.shape[0]


def generalized_likelihood(theta, record: DuelingRecord, reward_class: RewardClass,
                           config: LikelihoodConfig, arms: np.ndarray) -> float:
    phi = record.features(arms)
    r = reward_class.evaluate(theta, phi)
    fit = config.eta * link_sigma(record.preference * (r[record.arm1] - r[record.arm2]))
    adv = record.arm2 if config.chain == 1 else record.arm1
    return float(fit - config.mu * (np.max(r) - r[adv]))


def finite_log_weights(history: Sequence[DuelingRecord], reward_class: RewardClass,
                       model_set: FiniteModelSet, config: LikelihoodConfig,
                       arms: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        logw = np.log(model_set.prior)
    for rec in history:
        logw -= np.array([generalized_likelihood(m, rec, reward_class, config, arms)
                          for m in model_set.models])
    return logw


def finite_posterior(history: Sequence[DuelingRecord], reward_class: RewardClass,
                     model_set: FiniteModelSet, config: LikelihoodConfig,
                     arms: np.ndarray) -> np.ndarray:
    return log_normalize(finite_log_weights(history, reward_class, model_set, config, arms))


def finite_fgts_select(rng: np.random.Generator, model_set: FiniteModelSet, weights,
                       reward_class: RewardClass, arms: np.ndarray) -> tuple[int, int]:
    """Draw one model per chain and play each chain's best arm.

    ``weights`` is either one probability vector shared by both chains or a
    ``(2, N)`` array holding each chain's posterior.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.ndim == 1:
        weights = np.stack([weights, weights])
    picks = []
    for j in range(2):
        n = rng.choice(len(model_set), p=weights[j])
        picks.append(int(np.argmax(reward_class.evaluate(model_set.models[n], arms))))
    return picks[0], picks[1]
