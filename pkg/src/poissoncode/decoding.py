"""Maximum-likelihood decision rule for a pair of Poisson intensity vectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .channel import IntensityPair

# Scores this close to the threshold (relative to the score magnitude) count
# as ties.  Exact likelihood ties are common on lattice instances and their
# floating-point score otherwise depends on the summation order.
TIE_RTOL = 1e-11


def tie_slack(b: float, magnitude: float) -> float:
    """Absolute slack below ``b`` that still decodes to 1."""
    return TIE_RTOL * max(1.0, abs(b), magnitude)


@dataclass(frozen=True)
class DecisionRule:
    """Decode 1 iff ``sum(a * y) >= b``, otherwise 2.

    ``a[i] = log((lam[i] + d) / (mu[i] + d))`` and ``b = sum(lam - mu)``.
    """

    a: tuple[float, ...]
    b: float

    def __len__(self) -> int:
        return len(self.a)

    @property
    def set_A(self) -> tuple[int, ...]:
        """Indices with ``a_i >= 0``, i.e. ``lam_i >= mu_i``."""
        return tuple(i for i, ai in enumerate(self.a) if ai >= 0)

    @property
    def weights(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)

    def negated(self) -> "DecisionRule":
        return DecisionRule(tuple(-ai for ai in self.a), -self.b)


def decision_rule(ip: IntensityPair, d: float) -> DecisionRule:
    if not d > 0:
        raise ValueError(f"dark noise must be positive, got {d}")
    lam = np.asarray(ip.lam, dtype=float)
    mu = np.asarray(ip.mu, dtype=float)
    # log(x) - log(y) rather than log(x/y): exact antisymmetry under swapping lam and mu
    a = np.log(lam + d) - np.log(mu + d)
    a[lam == mu] = 0.0
    b = float(np.sum(lam) - np.sum(mu))
    return DecisionRule(tuple(float(v) for v in a), b)


def decode(rule: DecisionRule, y: Sequence[int]) -> int:
    y = np.asarray(y)
    if y.shape != (len(rule.a),):
        raise ValueError(f"expected {len(rule.a)} outputs, got shape {y.shape}")
    w = rule.weights
    score = float(np.dot(w, y))
    return 1 if score >= rule.b - tie_slack(rule.b, float(np.dot(np.abs(w), np.abs(y)))) else 2


def decode_many(rule: DecisionRule, ys: np.ndarray) -> np.ndarray:
    """Vectorised :func:`decode` over the rows of ``ys``."""
    ys = np.asarray(ys)
    scores = ys @ rule.weights
    slack = TIE_RTOL * np.maximum(np.maximum(1.0, abs(rule.b)), np.abs(ys) @ np.abs(rule.weights))
    return np.where(scores >= rule.b - slack, 1, 2)
