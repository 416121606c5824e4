"""UCB-style baselines built on the shared logistic MLE.

Every selector is available as a pure function of ``(theta_hat, sigma_inv,
arms, ...)`` so it can be checked against brute-force enumeration, and as an
:class:`Agent` that maintains the estimator across rounds.
"""

from __future__ import annotations

import numpy as np

from ..core import DuelingRecord
from ..posterior import DuelStats
from .base import Agent, argmax_lowest, pair_argmax
from .mle import covariance_update, fit_logistic


def pair_differences(arms: np.ndarray) -> np.ndarray:
    """``(K, K, d)`` tensor of ``phi(x) - phi(y)``."""
    return arms[:, None, :] - arms[None, :, :]


def pair_uncertainty(arms: np.ndarray, sigma_inv: np.ndarray) -> np.ndarray:
    """``||phi(x) - phi(y)||_{sigma_inv}`` for every ordered pair."""
    diffs = pair_differences(arms)
    quad = np.einsum("xyi,ij,xyj->xy", diffs, sigma_inv, diffs)
    return np.sqrt(np.maximum(quad, 0.0))


def maxinp_active_set(theta_hat, sigma_inv, arms, beta) -> np.ndarray:
    """Boolean mask of arms that no other arm beats by more than the confidence width."""
    r = arms @ theta_hat
    width = pair_uncertainty(arms, sigma_inv)
    optimistic_gap = (r[:, None] - r[None, :]) + beta * width
    return np.all(optimistic_gap >= 0, axis=1)


def maxinp_select(theta_hat, sigma_inv, arms, beta) -> tuple[int, int]:
    active = maxinp_active_set(theta_hat, sigma_inv, arms, beta)
    if not active.any():
        raise AssertionError("MaxInP active set is empty; the empirical best arm must always qualify")
    width = pair_uncertainty(arms, sigma_inv)
    return pair_argmax(width, np.outer(active, active))


def maxpairucb_scores(theta_hat, sigma_inv, arms, beta) -> np.ndarray:
    r = arms @ theta_hat
    return (r[:, None] + r[None, :]) + beta * pair_uncertainty(arms, sigma_inv)


def maxpairucb_select(theta_hat, sigma_inv, arms, beta) -> tuple[int, int]:
    return pair_argmax(maxpairucb_scores(theta_hat, sigma_inv, arms, beta))


def colstim_select(rng: np.random.Generator, theta_hat, sigma_inv, arms, beta, scale) -> tuple[int, int]:
    """First arm: Gumbel-perturbed utility. Second arm: optimistic challenger of the first."""
    r = arms @ theta_hat
    a1 = argmax_lowest(r + scale * rng.gumbel(size=len(r)))
    a2 = colstim_challenger(theta_hat, sigma_inv, arms, beta, a1)
    return a1, a2


def colstim_challenger(theta_hat, sigma_inv, arms, beta, first: int) -> int:
    diff = arms - arms[first]
    width = np.sqrt(np.maximum(np.einsum("bi,ij,bj->b", diff, sigma_inv, diff), 0.0))
    return argmax_lowest(arms @ theta_hat + beta * width)


class MLEAgent(Agent):
    """Keeps ``theta_hat`` and ``Sigma = lam I + sum dphi dphi^T`` current."""

    def __init__(self, d: int, beta: float = 1.0, lam: float = 0.001):
        super().__init__()
        if not lam > 0:
            raise ValueError(f"lambda must be positive, got {lam}")
        self.d = d
        self.beta = beta
        self.lam = lam
        self.stats = DuelStats(d)
        self.sigma = lam * np.eye(d)
        self.sigma_inv = np.eye(d) / lam
        self.theta_hat = np.zeros(d)

    def _update(self, record: DuelingRecord, arms):
        phi = record.features(arms)
        self.stats.add(record, arms)
        self.sigma = covariance_update(self.sigma, phi[record.arm1], phi[record.arm2])
        self.sigma_inv = np.linalg.inv(self.sigma)
        self.theta_hat = fit_logistic(self.stats.diffs, self.stats.weights, self.lam, init=self.theta_hat)


class MaxInPAgent(MLEAgent):
    name = "maxinp"

    def _select(self, arms, round):
        return maxinp_select(self.theta_hat, self.sigma_inv, arms, self.beta)


class MaxPairUCBAgent(MLEAgent):
    name = "maxpairucb"

    def _select(self, arms, round):
        return maxpairucb_select(self.theta_hat, self.sigma_inv, arms, self.beta)


class CoLSTIMAgent(MLEAgent):
    name = "colstim"

    def __init__(self, d: int, rng: np.random.Generator, scale: float = 1.0,
                 beta: float = 1.0, lam: float = 0.001):
        super().__init__(d, beta=beta, lam=lam)
        self.rng = rng
        self.scale = scale

    def _select(self, arms, round):
        return colstim_select(self.rng, self.theta_hat, self.sigma_inv, arms, self.beta, self.scale)
