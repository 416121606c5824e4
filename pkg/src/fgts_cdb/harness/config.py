from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ALGORITHMS = ("fgts", "maxinp", "maxpairucb", "colstim", "vacdb")
HYPER_GRID = (1e-2, 1e-1, 1e0, 1e1)

# stream tags for seed derivation; streams never overlap
INSTANCE, FEEDBACK, AGENT, CHAIN1, CHAIN2, ARMS = range(6)


@dataclass(frozen=True)
class ExperimentConfig:
    algo: str = "fgts"
    T: int = 2500
    d: int = 10
    K: int = 32
    runs: int = 10
    master_seed: int = 0
    # FGTS: mu = alpha / sqrt(T) unless mu is given explicitly
    alpha: float = 0.1
    eta: float = 1.0
    mu: Optional[float] = None
    step0: float = 0.005
    decay: float = 0.99
    inner_steps: int = 100
    warm_start: bool = True
    prior_kind: str = "gaussian"
    prior_scale: float = 1.0
    # baselines
    beta: float = 1.0
    lam: float = 0.001
    scale: float = 1.0
    vacdb_layers: int = 8
    vacdb_elim_factor: float = 2.0
    # environment
    convention: str = "raw"
    resample_arms: bool = False
    preset: str = "paper-experiment"

    def __post_init__(self):
        if self.algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algo!r}; choose from {ALGORITHMS}")
        for name in ("T", "d", "K", "runs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")

    @property
    def resolved_mu(self) -> float:
        return self.mu if self.mu is not None else self.alpha / math.sqrt(self.T)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["resolved_mu"] = self.resolved_mu
        return out


def preset(name: str, **overrides) -> ExperimentConfig:
    """Named hyperparameter bundles.

    ``paper-experiment``: eta=1, mu=alpha/sqrt(T), alpha=0.1, step 0.005 decaying 0.99 per round.
    ``theory``: eta=0.25, mu=1/(10 e^B sqrt(T)) with B=1 (unit-norm true parameter).
    """
    if name == "paper-experiment":
        base = ExperimentConfig(preset=name)
        return base.replace(**overrides)
    if name == "theory":
        T = overrides.get("T", ExperimentConfig.T)
        bound = overrides.pop("bound", 1.0)
        base = ExperimentConfig(preset=name, eta=0.25, mu=1.0 / (10.0 * math.e ** bound * math.sqrt(T)))
        return base.replace(**overrides)
    raise ValueError(f"unknown preset {name!r}; choose 'paper-experiment' or 'theory'")


def stream(master_seed: int, run: int, tag: int) -> np.random.Generator:
    """Generator for one (run, purpose) pair; counter-based so runs can execute in any order."""
    return np.random.default_rng(np.random.SeedSequence(entropy=master_seed, spawn_key=(run, tag)))
