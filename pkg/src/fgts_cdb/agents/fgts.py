"""Feel-Good Thompson sampling for contextual dueling bandits."""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

from ..core import DuelingRecord
from ..posterior import DuelStats, LikelihoodConfig, PriorSpec, SgldConfig, run_langevin
from .base import Agent, argmax_lowest

# (chain, rng, init, round) -> sampled parameter
Sampler = Callable[[int, np.random.Generator, np.ndarray, int], np.ndarray]


class FGTSAgent(Agent):
    """Two independent posterior chains; each picks the argmax arm of its own sample.

    ``chain_rngs`` must be two independent generators; chain 1 only ever
    consumes the first, chain 2 the second, so the arms are conditionally
    independent given the history. Setting ``sampler`` replaces the SGLD
    draw (handy for oracle-sampler tests).
    """

    name = "fgts"

    def __init__(self, d: int, chain_rngs, eta: float = 1.0, mu: float = 0.0,
                 prior: PriorSpec = PriorSpec(), sgld: SgldConfig = SgldConfig(),
                 sampler: Optional[Sampler] = None):
        super().__init__()
        self.d = d
        self.rngs = tuple(chain_rngs)
        if len(self.rngs) != 2:
            raise ValueError("FGTS needs exactly two chain generators")
        self.liks = (LikelihoodConfig(eta, mu, 1), LikelihoodConfig(eta, mu, 2))
        self.prior = prior
        self.sgld = sgld
        self.stats = DuelStats(d)
        self.samples = [np.zeros(d), np.zeros(d)]
        self.sampler = sampler or self._sgld_draw

    def _sgld_draw(self, chain: int, rng: np.random.Generator, init: np.ndarray, round: int) -> np.ndarray:
        return run_langevin(rng, init, self.stats, self.liks[chain - 1], self.prior,
                            self.sgld.step_size(round), self.sgld.inner_steps, round)

    def _select(self, arms, round):
        picks = []
        for j in (1, 2):
            init = self.samples[j - 1] if self.sgld.warm_start else np.zeros(self.d)
            theta = np.asarray(self.sampler(j, self.rngs[j - 1], init, round), dtype=float)
            self.samples[j - 1] = theta
            picks.append(argmax_lowest(arms @ theta))
        return picks[0], picks[1]

    def _update(self, record: DuelingRecord, arms):
        self.stats.add(record, arms)
