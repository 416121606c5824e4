"""Layered arm elimination with per-layer weighted estimators.

Layer ``l`` (1-based) owns its own weighted logistic MLE, design matrix and
surviving arm set, and an uncertainty threshold ``2**-l``. Each round walks
the layers from the top:

* if some surviving pair is still more uncertain than the threshold, the
  round is spent in that layer on the pair maximizing
  ``<theta_l, phi(x) + phi(y)> + beta ||phi(x) - phi(y)||_{Sigma_l^-1}``,
  and the observation is stored in that layer with weight
  ``min(1, 2**-l / ||phi(x) - phi(y)||)``;
* otherwise arms whose estimated gap to the layer leader exceeds
  ``elim_factor * beta * 2**-l`` are removed for good and the walk moves on.

When every layer is confident the last layer's rule picks the pair and the
observation is not stored.
"""

from __future__ import annotations

import numpy as np

from ..core import DuelingRecord
from ..posterior import DuelStats
from .base import Agent, pair_argmax
from .baselines import pair_uncertainty
from .mle import fit_logistic


class _Layer:
    def __init__(self, d: int, K: int, lam: float):
        self.stats = DuelStats(d)
        self.sigma = lam * np.eye(d)
        self.sigma_inv = np.eye(d) / lam
        self.theta = np.zeros(d)
        self.alive = np.ones(K, dtype=bool)


class VACDBAgent(Agent):
    name = "vacdb"

    def __init__(self, d: int, K: int, beta: float = 1.0, lam: float = 0.001,
                 n_layers: int = 8, elim_factor: float = 2.0):
        super().__init__()
        self.d, self.K = d, K
        self.beta = beta
        self.lam = lam
        self.elim_factor = elim_factor
        self.layers = [_Layer(d, K, lam) for _ in range(n_layers)]
        self._pending = None

    def threshold(self, level: int) -> float:
        return 2.0 ** -(level + 1)

    def eliminate(self, level: int, alive: np.ndarray, arms: np.ndarray) -> np.ndarray:
        """Survivors of ``alive`` after the dominance test at ``level``; never re-admits arms."""
        layer = self.layers[level]
        r = arms @ layer.theta
        leader = np.max(np.where(alive, r, -np.inf))
        margin = self.elim_factor * self.beta * self.threshold(level)
        return alive & (r >= leader - margin)

    def _score(self, level, arms, alive):
        layer = self.layers[level]
        r = arms @ layer.theta
        width = pair_uncertainty(arms, layer.sigma_inv)
        scores = (r[:, None] + r[None, :]) + self.beta * width
        return pair_argmax(scores, np.outer(alive, alive)), width

    def _select(self, arms, round):
        alive = self.layers[0].alive.copy()
        for level, layer in enumerate(self.layers):
            alive &= layer.alive
            layer.alive = alive.copy()
            (x, y), width = self._score(level, arms, alive)
            mask = np.outer(alive, alive)
            if np.max(np.where(mask, width, 0.0)) > self.threshold(level):
                self._pending = (level, width[x, y])
                return x, y
            if level + 1 < len(self.layers):
                alive = self.eliminate(level, alive, arms)
        # every layer is confident: exploit without storing the observation
        self._pending = None
        return x, y

    def _update(self, record: DuelingRecord, arms):
        if self._pending is None:
            return
        level, width = self._pending
        self._pending = None
        layer = self.layers[level]
        phi = record.features(arms)
        diff = record.preference * (phi[record.arm1] - phi[record.arm2])
        w = 1.0 if width <= 0 else min(1.0, self.threshold(level) / width)
        layer.stats.add_diff(diff, w * w)
        layer.stats.n += 1
        layer.sigma = layer.sigma + (w * w) * np.outer(diff, diff)
        layer.sigma_inv = np.linalg.inv(layer.sigma)
        layer.theta = fit_logistic(layer.stats.diffs, layer.stats.weights, self.lam, init=layer.theta)
