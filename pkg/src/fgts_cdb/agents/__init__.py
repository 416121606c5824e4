from .base import Agent, SequencingError
from .baselines import (
    CoLSTIMAgent,
    MaxInPAgent,
    MaxPairUCBAgent,
    colstim_challenger,
    colstim_select,
    maxinp_active_set,
    maxinp_select,
    maxpairucb_scores,
    maxpairucb_select,
    pair_uncertainty,
)
from .fgts import FGTSAgent
from .mle import EstimationError, covariance_update, fit_logistic, mle_estimate
from .vacdb import VACDBAgent

__all__ = [
    "Agent", "SequencingError", "FGTSAgent", "MaxInPAgent", "MaxPairUCBAgent",
    "CoLSTIMAgent", "VACDBAgent", "EstimationError", "covariance_update",
    "fit_logistic", "mle_estimate", "maxinp_select", "maxinp_active_set",
    "maxpairucb_select", "maxpairucb_scores", "colstim_select",
    "colstim_challenger", "pair_uncertainty",
]
