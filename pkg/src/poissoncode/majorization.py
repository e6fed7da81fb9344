"""Majorization predicates and Robin Hood / anti-Robin Hood transfers."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

REL_TOL = 1e-12


@dataclass(frozen=True)
class AROp:
    """Move ``eps`` between entries ``i`` and ``j``.

    As an anti-Robin Hood step, ``i`` (the larger entry) gains and ``j`` loses;
    as a Robin Hood step the direction is reversed.
    """

    i: int
    j: int
    eps: float

    def __post_init__(self) -> None:
        if self.i == self.j:
            raise ValueError("AR operation needs two distinct indices")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


def _vec(v: Sequence[float]) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise ValueError("expected a 1-d sequence")
    if np.any(arr < 0):
        raise ValueError("sequences must be non-negative")
    return arr


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _vec(a), _vec(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def _tol(a: np.ndarray, b: np.ndarray) -> float:
    return REL_TOL * max(1.0, float(np.sum(a)), float(np.sum(b)))


def weak_majorizes(a: Sequence[float], b: Sequence[float]) -> bool:
    """True iff every prefix sum of sorted-descending ``a`` dominates that of ``b``."""
    a, b = _pair(a, b)
    pa = np.cumsum(np.sort(a)[::-1])
    pb = np.cumsum(np.sort(b)[::-1])
    return bool(np.all(pa >= pb - _tol(a, b)))


def majorizes(a: Sequence[float], b: Sequence[float]) -> bool:
    a, b = _pair(a, b)
    return weak_majorizes(a, b) and abs(float(np.sum(a) - np.sum(b))) <= _tol(a, b)


def robin_hood(s: Sequence[float], op: AROp) -> np.ndarray:
    """Take ``eps`` from the richer entry ``i`` and give it to ``j``."""
    s = _vec(s).copy()
    if not s[op.i] > s[op.j]:
        raise ValueError(f"robin_hood needs s[{op.i}] > s[{op.j}]")
    if not op.eps < s[op.i] - s[op.j]:
        raise ValueError(f"eps must be below s[i] - s[j] = {s[op.i] - s[op.j]}")
    s[op.i] -= op.eps
    s[op.j] += op.eps
    return s


def anti_robin_hood(s: Sequence[float], op: AROp) -> np.ndarray:
    """Move ``eps`` from entry ``j`` to the entry ``i`` that is at least as large.

    Equal entries are accepted: they are the limit of the strict case and
    are needed to leave a flat vector.
    """
    s = _vec(s).copy()
    if not s[op.i] >= s[op.j]:
        raise ValueError(f"anti_robin_hood needs s[{op.i}] >= s[{op.j}]")
    if not op.eps <= s[op.j] * (1 + REL_TOL):
        raise ValueError(f"eps must not exceed s[j] = {s[op.j]}")
    s[op.i] += op.eps
    s[op.j] = max(s[op.j] - op.eps, 0.0)
    return s


def ar_path(start: Sequence[float], target: Sequence[float], tol: float = 1e-12) -> list[AROp]:
    """Anti-Robin Hood operations turning ``start`` into ``target`` entrywise.

    ``target`` must majorize ``start``.  When it is also ordered like ``start``
    (a larger start entry never ends below a smaller one) a path always
    exists and is found; other arrangements are attempted greedily and raise
    ``ValueError`` when no path is found (some, such as a pure swap, have none).

    Positions are visited in descending order of ``start``.  Each step moves
    mass from the first surplus position after the last deficit position
    into that deficit, which keeps the order intact and settles at least one
    position, so at most ``len - 1`` operations are returned.
    """
    x, y = _pair(start, target)
    if not majorizes(y, x):
        raise ValueError("target does not majorize start")
    order = np.lexsort((-y, -x))
    xs, ys = x[order], y[order]
    scale = max(1.0, float(np.sum(x)))
    if np.any(np.diff(ys) > tol * scale):
        return _greedy_path(x, y, tol * scale)
    cur = xs.copy()
    ops: list[AROp] = []
    for _ in range(len(x)):
        gap = ys - cur
        gap[np.abs(gap) <= tol * scale] = 0.0
        deficit = np.flatnonzero(gap > 0)
        if deficit.size == 0:
            break
        j = deficit[-1]
        after = np.flatnonzero(gap[j + 1 :] < 0)
        if after.size == 0:
            raise ValueError("target does not majorize start")
        k = j + 1 + after[0]
        eps = float(min(gap[j], -gap[k]))
        ops.append(AROp(int(order[j]), int(order[k]), eps))
        cur[j] += eps
        cur[k] -= eps
        if gap[j] <= -gap[k]:
            cur[j] = ys[j]
        if -gap[k] <= gap[j]:
            cur[k] = ys[k]
    return ops


def _greedy_path(x: np.ndarray, y: np.ndarray, tol: float) -> list[AROp]:
    """Fallback for targets that reorder entries: feed the richest deficit from the poorest surplus."""
    cur = x.copy()
    ops: list[AROp] = []
    for _ in range(len(x)):
        gap = y - cur
        deficit = np.flatnonzero(gap > tol)
        surplus = np.flatnonzero(gap < -tol)
        if deficit.size == 0 or surplus.size == 0:
            break
        k = deficit[np.argmax(cur[deficit])]
        l = surplus[np.argmin(cur[surplus])]
        if cur[k] < cur[l]:
            break
        eps = float(min(gap[k], -gap[l]))
        ops.append(AROp(int(k), int(l), eps))
        cur[k] += eps
        cur[l] -= eps
    if np.all(np.abs(y - cur) <= max(tol, 1e-12)):
        return ops
    raise ValueError("no entrywise anti-Robin Hood path found for this arrangement of target")


def replay(start: Sequence[float], ops: Sequence[AROp]) -> np.ndarray:
    s = _vec(start).copy()
    for op in ops:
        s = anti_robin_hood(s, op)
    return s


def lemma6_cap(lam: Sequence[float], pi_seq: Sequence[float]) -> tuple[np.ndarray, int]:
    """Cap a weakly majorizing ``pi_seq`` to a sequence that majorizes ``lam``.

    Both inputs sorted descending with ``pi_seq`` weakly majorizing ``lam``.
    Returns ``(pi', t)`` where ``pi' = [pi_0..pi_t, r, 0, ...]`` and the
    residual ``r = sum(lam) - sum(pi_0..pi_t)`` lies in ``[0, pi_{t+1}]``;
    the smallest such ``t`` is used.  When ``sum(lam) < pi_0`` the whole
    mass sits in slot 0 and ``t = -1``.
    """
    lam, pi = _pair(lam, pi_seq)
    if np.any(np.diff(lam) > 0) or np.any(np.diff(pi) > 0):
        raise ValueError("both sequences must be sorted in descending order")
    if not weak_majorizes(pi, lam):
        raise ValueError("pi_seq does not weakly majorize lam")
    n = lam.size
    total = float(np.sum(lam))
    tol = _tol(lam, pi)
    out = np.zeros(n)
    if n == 1 or total < pi[0] - tol:
        out[0] = total
        return out, -1
    prefix = np.cumsum(pi)
    for t in range(n - 1):
        r = total - prefix[t]
        if -tol <= r <= pi[t + 1] + tol:
            out[: t + 1] = pi[: t + 1]
            out[t + 1] = min(max(r, 0.0), pi[t + 1])
            return out, t
    # sum(lam) equals sum(pi) up to rounding
    return pi.copy(), n - 2
