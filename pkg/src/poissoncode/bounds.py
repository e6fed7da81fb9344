"""Chernoff-type error bounds and the high-power optimality conditions.

Everything is evaluated in log space so that the conditions stay finite for
peak powers in the millions.

The printed optimality conditions raise the Chernoff factor to the power
``slots / L`` with ``L = log((a + d) / d)``, whereas substituting the per-slot
mean ``a`` into the on/off bound gives the power ``slots * a / L``.  The
``exponent`` argument selects between the two: ``"printed"`` reproduces the
conditions as stated, ``"chernoff"`` uses the power that makes the left side a
genuine upper bound on the error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from .channel import Channel

LOG_HALF = math.log(0.5)
EXPONENTS = ("printed", "chernoff")


@dataclass(frozen=True)
class BoundPair:
    log_lower: float
    log_upper: Optional[float]
    # False when the upper bound's regime (mean per slot >= 2d) fails; upper omitted
    upper_valid: bool

    @property
    def lower(self) -> float:
        return math.exp(self.log_lower)

    @property
    def upper(self) -> Optional[float]:
        if self.log_upper is None:
            return None
        return math.exp(min(self.log_upper, 700.0))

    @property
    def upper_clamped(self) -> Optional[float]:
        u = self.upper
        return None if u is None else min(u, 1.0)

    def to_dict(self) -> dict:
        return {
            "lower": self.lower,
            "upper": self.upper,
            "upper_clamped": self.upper_clamped,
            "log_lower": self.log_lower,
            "log_upper": self.log_upper,
            "upper_valid": self.upper_valid,
        }


def log_onoff_upper(slots: float, a: float, d: float, exponent: str = "chernoff") -> float:
    """Log of the Chernoff upper bound for ``slots`` slots of mean ``a`` against all-zero.

    ``exp(-slots (a + d)) * (e (a + d) L / a) ** M`` with ``L = log((a + d)/d)``
    and ``M = slots * a / L`` (``slots / L`` for the printed variant).
    """
    if exponent not in EXPONENTS:
        raise ValueError(f"exponent must be one of {EXPONENTS}")
    L = math.log1p(a / d)
    power = slots * a / L if exponent == "chernoff" else slots / L
    return -slots * (a + d) + power * (1.0 + math.log(a + d) + math.log(L) - math.log(a))


def lemma8_bounds(N: int, A: float, d: float) -> BoundPair:
    """Bounds on the ML error of the on/off code ``([A]*N, [0]*N)`` on a memoryless channel."""
    if N < 1 or not A > 0 or not d > 0:
        raise ValueError("need N >= 1, A > 0, d > 0")
    log_lower = LOG_HALF - N * (A + d)
    if A < 2 * d:
        return BoundPair(log_lower, None, False)
    return BoundPair(log_lower, log_onoff_upper(N, A, d), True)


def lemma9_bounds(P: float, n: int, N: int, d: float, exponent: str = "chernoff") -> BoundPair:
    """Bounds for support-disjoint intensities with ``sum(lam) = P >= sum(mu)``,
    ``lam`` supported on ``n`` of the ``N`` slots."""
    if not P > 0 or not 1 <= n <= N or not d > 0:
        raise ValueError("need P > 0, 1 <= n <= N, d > 0")
    log_lower = LOG_HALF - (P + N * d)
    if P / n < 2 * d:
        return BoundPair(log_lower, None, False)
    return BoundPair(log_lower, log_onoff_upper(n, P / n, d, exponent), True)


def gamma_n(beta: float) -> tuple[float, int]:
    """``(Gamma, n)``: fractional part and support size of the peak/total-power code."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    fl = math.floor(beta)
    frac = beta - fl
    # absorb rounding from P/A
    if frac <= 1e-12 * max(1.0, beta):
        return 1.0, int(fl)
    if 1 - frac <= 1e-12 * max(1.0, beta):
        return 1.0, int(fl) + 1
    return frac, int(fl) + 1


def th3_sides(A: float, N: int, ch: Channel, exponent: str = "printed") -> tuple[float, float]:
    """``(log LHS, log RHS)`` of the on/off optimality condition under a peak-power constraint."""
    if any(p <= 0 for p in ch.pi):
        raise ValueError("the condition requires every channel coefficient to be positive")
    if not A > 0 or N < 1:
        raise ValueError("need A > 0 and N >= 1")
    slots = N + ch.K - 1
    total = N * A * ch.total
    lhs = log_onoff_upper(slots, total / slots, ch.d, exponent)
    worst = max(-A * p + total for p in ch.pi)
    rhs = LOG_HALF - (worst + slots * ch.d)
    return lhs, rhs


def th3_condition(A: float, N: int, ch: Channel, exponent: str = "printed") -> bool:
    lhs, rhs = th3_sides(A, N, ch, exponent)
    return lhs <= rhs


def th4_sides(
    A: float, beta: float, d: float, N: Optional[int] = None, exponent: str = "printed"
) -> tuple[float, float]:
    """``(log lower, log upper)`` for the peak+total power condition on ``pi = [1]``.

    ``N`` defaults to the smallest admissible blocklength ``floor(beta) + 1``.
    """
    if not A > 0 or not d > 0:
        raise ValueError("need A > 0 and d > 0")
    gamma, n = gamma_n(beta)
    if N is None:
        N = math.floor(beta) + 1
    if N < math.floor(beta) + 1:
        raise ValueError("blocklength must be at least floor(beta) + 1")
    lower = LOG_HALF - (A * (beta - gamma) + N * d)
    upper = log_onoff_upper(n, A * beta / n, d, exponent)
    return lower, upper


def th4_condition(
    A: float, beta: float, d: float, N: Optional[int] = None, exponent: str = "printed"
) -> bool:
    lower, upper = th4_sides(A, beta, d, N, exponent)
    return upper <= lower


class AStarNotFound(RuntimeError):
    pass


def a_star(
    condition: Callable[[float], bool],
    a_lo: float,
    a_hi_cap: float,
    tol: float = 1e-6,
) -> float:
    """Numerical threshold beyond which ``condition`` holds.

    Condition monotonicity is not assumed; a point counts as accepted only if
    the condition holds at ``A``, ``2A`` and ``4A``.  This guard is heuristic.
    """
    if not a_lo > 0 or a_hi_cap < a_lo:
        raise ValueError("need 0 < a_lo <= a_hi_cap")

    def ok(A: float) -> bool:
        return condition(A) and condition(2 * A) and condition(4 * A)

    if ok(a_lo):
        return a_lo
    lo, hi = a_lo, a_lo
    while not ok(hi):
        lo = hi
        hi *= 2
        if hi > a_hi_cap:
            if ok(a_hi_cap):
                hi = a_hi_cap
                break
            raise AStarNotFound(f"condition not met below A = {a_hi_cap:g}")
    while hi - lo > tol * max(1.0, lo):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            hi = mid
        else:
            lo = mid
    return hi
