"""Regularized logistic MLE on preference data and the design-matrix update."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..core import DuelingRecord, link_sigma, link_sigma_prime, logistic
from ..env import BanditInstance
from ..posterior import DuelStats

MAX_NEWTON_ITERS = 100
GRAD_TOL = 1e-8


class EstimationError(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"Newton solver did not reach gradient norm {GRAD_TOL:g} after "
            f"{iterations} iterations (residual {residual:.3e})"
        )


def logistic_objective(theta, diffs, weights, lam):
    z = diffs @ theta
    return float(weights @ link_sigma(z)) + 0.5 * lam * float(theta @ theta)


def logistic_gradient(theta, diffs, weights, lam):
    z = diffs @ theta
    return (weights * link_sigma_prime(z)) @ diffs + lam * theta


def fit_logistic(diffs: np.ndarray, weights: np.ndarray, lam: float,
                 init: Optional[np.ndarray] = None, trace: Optional[list] = None) -> np.ndarray:
    """Minimize ``sum_i w_i sigma(<theta, D_i>) + lam/2 ||theta||^2`` by damped Newton.

    ``diffs`` rows are preference-oriented feature differences. When ``trace``
    is a list, the objective value after every accepted step is appended.
    """
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    d = diffs.shape[1]
    theta = np.zeros(d) if init is None else np.array(init, dtype=float)
    eye = np.eye(d)
    f = logistic_objective(theta, diffs, weights, lam)
    if trace is not None:
        trace.append(f)
    for it in range(MAX_NEWTON_ITERS + 1):
        z = diffs @ theta
        g = (weights * link_sigma_prime(z)) @ diffs + lam * theta
        gnorm = float(np.linalg.norm(g))
        if gnorm < GRAD_TOL:
            return theta
        if it == MAX_NEWTON_ITERS:
            break
        p = logistic(z)
        curv = weights * p * (1.0 - p)
        H = (diffs * curv[:, None]).T @ diffs + lam * eye
        step = np.linalg.solve(H, g)
        t = 1.0
        slope = float(g @ step)
        slack = 1e-12 * max(1.0, abs(f))  # roundoff floor on objective comparisons
        while True:
            cand = theta - t * step
            fc = logistic_objective(cand, diffs, weights, lam)
            if fc <= f - 1e-4 * t * slope + slack:
                break
            t *= 0.5
            if t < 1e-10:
                break
        if fc > f + slack:
            break
        theta, f = cand, fc
        if trace is not None:
            trace.append(f)
    residual = float(np.linalg.norm(logistic_gradient(theta, diffs, weights, lam)))
    if residual < GRAD_TOL:
        return theta
    raise EstimationError(residual, MAX_NEWTON_ITERS)


def mle_estimate(history: Sequence[DuelingRecord], instance: BanditInstance, lam: float) -> np.ndarray:
    stats = DuelStats.from_history(history, instance)
    if stats.n == 0:
        return np.zeros(instance.d)
    return fit_logistic(stats.diffs, stats.weights, lam)


def covariance_update(sigma: np.ndarray, phi1, phi2, weight: float = 1.0) -> np.ndarray:
    """``sigma + weight * (phi1 - phi2)(phi1 - phi2)^T`` as a new matrix."""
    diff = np.asarray(phi1, dtype=float) - np.asarray(phi2, dtype=float)
    return sigma + weight * np.outer(diff, diff)
