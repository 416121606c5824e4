from __future__ import annotations

import numpy as np

from ..core import DuelingRecord


class SequencingError(RuntimeError):
    pass


# values this close to the maximum (relative) count as tied; with +-1 features
# exact ties are common and would otherwise be broken by summation order
TIE_RTOL = 1e-12


def argmax_lowest(values: np.ndarray) -> int:
    """Index of the maximum; the lowest index wins ties."""
    values = np.asarray(values)
    top = np.max(values)
    return int(np.argmax(values >= top - TIE_RTOL * max(1.0, abs(top))))


def pair_argmax(scores: np.ndarray, mask=None) -> tuple[int, int]:
    """Lexicographically smallest ``(x, y)`` maximizing ``scores[x, y]`` over ``mask``."""
    if mask is not None:
        scores = np.where(mask, scores, -np.inf)
    flat = argmax_lowest(scores.ravel())
    K = scores.shape[1]
    return flat // K, flat % K


class Agent:
    """Interaction contract shared by every algorithm.

    ``select(arms, round)`` sees only the round's ``(K, d)`` feature matrix,
    never the hidden parameter. ``update(record, arms)`` must follow the
    matching select with the same round number.
    """

    name = "agent"

    def __init__(self):
        self.rounds_seen = 0

    def select(self, arms: np.ndarray, round: int) -> tuple[int, int]:
        if round != self.rounds_seen + 1:
            raise SequencingError(f"{self.name}: select for round {round} after {self.rounds_seen} updates")
        if arms.shape[0] == 1:
            return 0, 0
        return self._select(arms, round)

    def update(self, record: DuelingRecord, arms: np.ndarray) -> None:
        if record.round != self.rounds_seen + 1:
            raise SequencingError(
                f"{self.name}: record for round {record.round} does not follow round {self.rounds_seen}"
            )
        self._update(record, arms)
        self.rounds_seen = record.round

    def _select(self, arms, round):
        raise NotImplementedError

    def _update(self, record, arms):
        raise NotImplementedError
