"""Poisson pmf/cdf helpers evaluated in log space, and truncation limits."""

from __future__ import annotations

from typing import Sequence

import numpy as np
from scipy import special, stats


def log_pmf(k: np.ndarray | int, mean: float) -> np.ndarray:
    """``log P(Y = k)`` for ``Y ~ Poisson(mean)``; ``-inf`` for ``k < 0``."""
    k = np.asarray(k, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = special.xlogy(k, mean) - special.gammaln(k + 1.0) - mean
    return np.where(k < 0, -np.inf, out)


def pmf(k: np.ndarray | int, mean: float) -> np.ndarray:
    return np.exp(log_pmf(k, mean))


def cdf(k: np.ndarray, mean: float) -> np.ndarray:
    """``P(Y <= k)``; zero for ``k < 0``."""
    k = np.asarray(k, dtype=float)
    out = special.pdtr(np.maximum(k, 0.0), mean)
    return np.where(k < 0, 0.0, out)


def sf(k: np.ndarray, mean: float) -> np.ndarray:
    """``P(Y > k)``; one for ``k < 0``."""
    k = np.asarray(k, dtype=float)
    out = special.pdtrc(np.maximum(k, 0.0), mean)
    return np.where(k < 0, 1.0, out)


def tail_limit(mean: float, q: float) -> int:
    """Smallest integer ``k >= 0`` with ``P(Poisson(mean) > k) <= q``."""
    if not mean > 0:
        raise ValueError(f"mean must be positive, got {mean}")
    if not 0 < q < 1:
        raise ValueError(f"tail probability must lie in (0, 1), got {q}")
    k = int(max(stats.poisson.isf(q, mean), 0))
    while k > 0 and special.pdtrc(k - 1, mean) <= q:
        k -= 1
    while special.pdtrc(k, mean) > q:
        k += 1
    return k


def truncation_limits(means: Sequence[float], epsilon: float) -> list[int]:
    """Per-coordinate limits so the joint tail under one hypothesis is at most ``epsilon / 2``.

    Each coordinate gets tail budget ``epsilon / (2 * len(means))`` and the
    union bound covers the product space.
    """
    means = list(means)
    if not means:
        return []
    if not 0 < epsilon < 1:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    q = epsilon / (2 * len(means))
    return [tail_limit(float(m), q) for m in means]
