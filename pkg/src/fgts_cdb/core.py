"""Domain types, the logistic link and reward evaluation.

Conventions used throughout the package:

* a preference ``y`` is ``+1`` when the first arm of the duel won and ``-1``
  otherwise;
* arms are identified by their row index into the round's feature matrix;
* ``link_sigma(z) = log(1 + exp(-z))`` is the negative log-probability that
  the winner of a duel with reward gap ``z`` is observed as the winner.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np


def link_sigma(z):
    """Stable ``log(1 + exp(-z))``; accepts scalars or arrays."""
    z = np.asarray(z, dtype=float)
    # positive branch: log1p(exp(-z)); negative branch: -z + log1p(exp(z))
    out = np.log1p(np.exp(-np.abs(z))) + np.maximum(-z, 0.0)
    return out if out.ndim else float(out)


def link_sigma_prime(z):
    """Derivative of :func:`link_sigma`, ``-1 / (1 + exp(z))``."""
    z = np.asarray(z, dtype=float)
    ez = np.exp(-np.abs(z))
    out = np.where(z >= 0, -ez / (1.0 + ez), -1.0 / (1.0 + ez))
    return out if out.ndim else float(out)


def logistic(z):
    """Stable ``1 / (1 + exp(-z))``."""
    z = np.asarray(z, dtype=float)
    ez = np.exp(-np.abs(z))
    out = np.where(z >= 0, 1.0 / (1.0 + ez), ez / (1.0 + ez))
    return out if out.ndim else float(out)


def _check_dims(theta: np.ndarray, phi: np.ndarray) -> None:
    if theta.shape[-1] != phi.shape[-1]:
        raise ValueError(
            f"dimension mismatch: parameter has d={theta.shape[-1]}, "
            f"feature has d={phi.shape[-1]}"
        )


def reward(theta, phi) -> float:
    """Linear reward ``<theta, phi>``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _check_dims(theta, phi)
    return float(theta @ phi)


def preference_probability(r1: float, r2: float) -> float:
    """Bradley-Terry-Luce probability that the arm with reward ``r1`` wins."""
    return logistic(r1 - r2)


def reward_gap(theta, phi1, phi2) -> float:
    """``reward(theta, phi1) - reward(theta, phi2)``."""
    theta = np.asarray(theta, dtype=float)
    phi1 = np.asarray(phi1, dtype=float)
    phi2 = np.asarray(phi2, dtype=float)
    _check_dims(theta, phi1)
    _check_dims(theta, phi2)
    return float(theta @ (phi1 - phi2))


@dataclass(frozen=True)
class DuelingRecord:
    """One interaction ``(t, a1, a2, y)``.

    ``action_set`` is only set when the arm set changes between rounds; it
    holds the ``(K, d)`` features the indices refer to. With a fixed arm set
    it stays ``None`` and the indices point into the instance's arms.
    """

    round: int
    arm1: int
    arm2: int
    preference: int
    action_set: Optional[np.ndarray] = field(default=None, compare=False, hash=False, repr=False)

    def __post_init__(self):
        if self.preference not in (1, -1):
            raise ValueError(f"preference must be +1 or -1, got {self.preference!r}")
        if self.round < 1:
            raise ValueError(f"round must be positive, got {self.round}")
        if self.arm1 < 0 or self.arm2 < 0:
            raise ValueError("arm indices must be nonnegative")
        if self.action_set is not None:
            k = self.action_set.shape[0]
            if self.arm1 >= k or self.arm2 >= k:
                raise ValueError(f"arm index out of range for an action set of size {k}")

    def features(self, default_arms: np.ndarray) -> np.ndarray:
        return default_arms if self.action_set is None else self.action_set

    def swapped(self) -> "DuelingRecord":
        """Same observation with the arms swapped and the preference flipped."""
        return DuelingRecord(self.round, self.arm2, self.arm1, -self.preference, self.action_set)


class History:
    """Append-only, round-ordered list of :class:`DuelingRecord`."""

    def __init__(self, records: Iterable[DuelingRecord] = ()):
        self._records: list[DuelingRecord] = []
        for rec in records:
            self.append(rec)

    def append(self, record: DuelingRecord) -> None:
        if self._records and record.round <= self._records[-1].round:
            raise ValueError(
                f"rounds must be strictly increasing: got {record.round} "
                f"after {self._records[-1].round}"
            )
        self._records.append(record)

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[DuelingRecord]:
        return iter(self._records)

    def __getitem__(self, i):
        return self._records[i]

    @property
    def last_round(self) -> int:
        return self._records[-1].round if self._records else 0
