"""Exact ML error probability of a one-bit code, plus Monte Carlo and derivatives.

The exact method enumerates the output product space coordinate by
coordinate.  Every active coordinate but one is truncated at a limit chosen
so that the dropped tail mass is certified by a union bound; the remaining
coordinate is integrated in closed form through the Poisson cdf, because
given the partial score the decision is a threshold on that single output.
Coordinates with ``a_i = 0`` never influence the decision and are skipped.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, asdict
from typing import Optional, Sequence

import numpy as np

from . import poisson
from .channel import Channel, CodePair, IntensityPair, intensities
from .decoding import DecisionRule, decision_rule, decode_many, tie_slack

DEFAULT_EPSILON = 1e-10
DEFAULT_BUDGET = 10**8
# largest block of states materialised at once
_BLOCK = 1 << 20


class EnumerationBudgetExceeded(RuntimeError):
    def __init__(self, states: int, budget: int):
        super().__init__(
            f"enumeration needs {states:.3g} states, budget is {budget:.3g}; "
            "raise epsilon, shrink the instance or use mc_error"
        )
        self.states = states
        self.budget = budget


@dataclass(frozen=True)
class TruncationSpec:
    epsilon: float = DEFAULT_EPSILON
    budget: int = DEFAULT_BUDGET

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        if self.budget < 1:
            raise ValueError("budget must be positive")


@dataclass(frozen=True)
class ErrorEstimate:
    p_err: float
    p_err_given_1: float
    p_err_given_2: float
    truncation_bound: float
    method: str
    n_samples: Optional[int] = None
    seed: Optional[int] = None
    std_error: Optional[float] = None

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass
class _Masses:
    ge: float  # P(score >= b), ties included
    lt: float  # P(score < b)
    d: Optional[np.ndarray] = field(default=None)  # E[(Y_i/m_i - 1) 1[score < b]]


def _threshold_ge(partial: np.ndarray, a_c: float, b: float) -> np.ndarray:
    """Per partial score, smallest ``y >= 0`` with ``partial + a_c*y >= b`` (``a_c > 0``)."""
    with np.errstate(over="ignore", invalid="ignore"):
        y = np.ceil((b - partial) / a_c)
    y = np.clip(np.nan_to_num(y, nan=0.0, posinf=1e15, neginf=0.0), 0.0, 1e15)
    # the division can be off by one ulp against the direct comparison
    down = (y > 0) & (partial + a_c * (y - 1) >= b)
    y = np.where(down, y - 1, y)
    up = partial + a_c * y < b
    return np.where(up, y + 1, y)


def _threshold_le(partial: np.ndarray, a_c: float, b: float) -> np.ndarray:
    """Per partial score, largest ``y`` with ``partial + a_c*y >= b`` (``a_c < 0``); -1 if none."""
    with np.errstate(over="ignore", invalid="ignore"):
        y = np.floor((b - partial) / a_c)
    y = np.clip(np.nan_to_num(y, nan=-1.0, posinf=1e15, neginf=-1.0), -1.0, 1e15)
    up = (y + 1 >= 0) & (partial + a_c * (y + 1) >= b)
    y = np.where(up, y + 1, y)
    down = (y >= 0) & (partial + a_c * y < b)
    return np.where(down, y - 1, y)


def _masses(
    means: np.ndarray,
    a: np.ndarray,
    b: float,
    ts: TruncationSpec,
    want_d: bool = False,
    slack: float = 0.0,
) -> _Masses:
    """Decision probabilities of the rule ``(a, b)`` when ``Y_i ~ Poisson(means_i)``.

    Scores within ``slack`` below ``b`` count as reaching it.
    """
    n = len(a)
    d_vec = np.zeros(n) if want_d else None
    active = [i for i in range(n) if a[i] != 0.0]
    if not active:
        if 0.0 >= b - slack:
            return _Masses(1.0, 0.0, d_vec)
        return _Masses(0.0, 1.0, d_vec)

    # canonical order so permuted inputs run the identical computation
    active.sort(key=lambda i: (a[i], means[i]))
    limits = poisson.truncation_limits([means[i] for i in active], ts.epsilon)
    c_pos = max(range(len(active)), key=lambda p: (limits[p], p))
    c = active[c_pos]
    enum = [i for p, i in enumerate(active) if p != c_pos]
    enum_lim = [limits[p] for p, i in enumerate(active) if p != c_pos]

    b = b - slack
    states = math.prod(k + 1 for k in enum_lim)
    if states > ts.budget:
        raise EnumerationBudgetExceeded(states, ts.budget)

    a_c, m_c = float(a[c]), float(means[c])
    axes = [np.arange(k + 1, dtype=float) for k in enum_lim]
    logp_axes = [poisson.log_pmf(ax, means[i]) for ax, i in zip(axes, enum)]
    score_axes = [a[i] * ax for ax, i in zip(axes, enum)]

    # inner coordinates broadcast in one block, outer ones iterated
    split = len(enum)
    size = 1
    while split > 0 and size * (enum_lim[split - 1] + 1) <= _BLOCK:
        split -= 1
        size *= enum_lim[split] + 1
    inner = list(range(split, len(enum)))
    outer = list(range(split))

    def block(idx: list[int]):
        s = np.zeros(1)
        lp = np.zeros(1)
        for j in idx:
            s = (s[:, None] + score_axes[j][None, :]).ravel()
            lp = (lp[:, None] + logp_axes[j][None, :]).ravel()
        return s, lp

    s_in, lp_in = block(inner)
    in_grids = None
    if want_d and inner:
        in_grids = [g.ravel() for g in np.meshgrid(*[axes[j] for j in inner], indexing="ij")]

    ge_parts: list[float] = []
    lt_parts: list[float] = []
    d_parts: list[list[float]] = [[] for _ in range(n)]

    for combo in itertools.product(*[range(enum_lim[j] + 1) for j in outer]):
        s0 = sum(score_axes[j][k] for j, k in zip(outer, combo))
        lp0 = sum(logp_axes[j][k] for j, k in zip(outer, combo))
        partial = s0 + s_in if outer else s_in
        w = np.exp(lp0 + lp_in)
        if a_c > 0:
            y0 = _threshold_ge(partial, a_c, b)
            p_ge = poisson.sf(y0 - 1, m_c)
            p_lt = poisson.cdf(y0 - 1, m_c)
        else:
            y1 = _threshold_le(partial, a_c, b)
            p_ge = poisson.cdf(y1, m_c)
            p_lt = poisson.sf(y1, m_c)
        ge_parts.append(float(np.sum(w * p_ge)))
        wl = w * p_lt
        lt_parts.append(float(np.sum(wl)))
        if want_d:
            for j, k in zip(outer, combo):
                i = enum[j]
                d_parts[i].append((k / means[i] - 1.0) * lt_parts[-1])
            for pos, j in enumerate(inner):
                i = enum[j]
                d_parts[i].append(float(np.sum((in_grids[pos] / means[i] - 1.0) * wl)))
            # closed form for the integrated coordinate:
            # E[(Y/m - 1) 1[Y <= k]] = -pmf(k),  E[(Y/m - 1) 1[Y >= k]] = pmf(k - 1)
            if a_c > 0:
                dc = -poisson.pmf(y0 - 1, m_c)
            else:
                dc = poisson.pmf(y1, m_c)
            d_parts[c].append(float(np.sum(w * dc)))

    if want_d:
        for i in range(n):
            if d_parts[i]:
                d_vec[i] = math.fsum(d_parts[i])
    return _Masses(math.fsum(ge_parts), math.fsum(lt_parts), d_vec)


def _clip01(p: float) -> float:
    return min(max(p, 0.0), 1.0)


def _rule_slack(a: np.ndarray, b: float, lam: np.ndarray, mu: np.ndarray, ts: TruncationSpec) -> float:
    """Tie slack shared by both hypotheses, scaled to the largest score either can produce."""
    active = [i for i in range(len(a)) if a[i] != 0.0]
    if not active:
        return tie_slack(b, 0.0)
    means = [max(lam[i], mu[i]) for i in active]
    limits = poisson.truncation_limits(means, ts.epsilon)
    return tie_slack(b, sum(abs(a[i]) * k for i, k in zip(active, limits)))


def error_with_fixed_rule(
    ip: IntensityPair,
    rule: DecisionRule,
    d: float,
    ts: TruncationSpec = TruncationSpec(),
) -> tuple[float, float]:
    """``(P(error | B=1), P(error | B=2))`` when ``rule`` is applied to outputs of ``ip``."""
    if len(rule) != len(ip):
        raise ValueError("rule and intensities have different lengths")
    a = rule.weights
    lam = np.asarray(ip.lam) + d
    mu = np.asarray(ip.mu) + d
    slack = _rule_slack(a, rule.b, lam, mu, ts)
    e1 = _masses(lam, a, rule.b, ts, slack=slack).lt
    e2 = _masses(mu, a, rule.b, ts, slack=slack).ge
    return _clip01(e1), _clip01(e2)


def error_from_intensities(
    ip: IntensityPair, d: float, ts: TruncationSpec = TruncationSpec()
) -> ErrorEstimate:
    rule = decision_rule(ip, d)
    e1, e2 = error_with_fixed_rule(ip, rule, d, ts)
    return ErrorEstimate(
        p_err=0.5 * (e1 + e2),
        p_err_given_1=e1,
        p_err_given_2=e2,
        truncation_bound=ts.epsilon,
        method="exact-enumeration",
    )


def exact_error(
    cp: CodePair, ch: Channel, ts: TruncationSpec = TruncationSpec()
) -> ErrorEstimate:
    """ML error probability of ``cp`` on ``ch``, accurate to ``ts.epsilon``."""
    return error_from_intensities(intensities(cp, ch), ch.d, ts)


def tie_probability(ip: IntensityPair, d: float, ts: TruncationSpec = TruncationSpec()) -> float:
    """Largest probability, over the two hypotheses, that the ML score equals the threshold."""
    rule = decision_rule(ip, d)
    a = rule.weights
    lam = np.asarray(ip.lam) + d
    mu = np.asarray(ip.mu) + d
    slack = _rule_slack(a, rule.b, lam, mu, ts)
    out = 0.0
    for m in (lam, mu):
        ge = _masses(m, a, rule.b, ts, slack=slack).ge
        gt = 1.0 - _masses(m, -a, -rule.b, ts, slack=slack).ge  # P(score > b)
        out = max(out, ge - gt)
    return max(out, 0.0)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if trials <= 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return max(centre - half, 0.0), min(centre + half, 1.0)


def mc_error(
    cp: CodePair,
    ch: Channel,
    n_samples: int,
    seed: int,
    chunk: int = 200_000,
) -> ErrorEstimate:
    """Monte Carlo estimate using ``n_samples`` draws under each hypothesis.

    ``truncation_bound`` holds the width of the 95% Wilson interval of the
    pooled error count over the ``2 * n_samples`` trials.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    ip = intensities(cp, ch)
    rule = decision_rule(ip, ch.d)
    rng = np.random.default_rng(seed)
    lam = np.asarray(ip.lam) + ch.d
    mu = np.asarray(ip.mu) + ch.d
    err1 = err2 = 0
    left = n_samples
    while left > 0:
        m = min(chunk, left)
        y1 = rng.poisson(lam, size=(m, len(lam)))
        y2 = rng.poisson(mu, size=(m, len(mu)))
        err1 += int(np.count_nonzero(decode_many(rule, y1) != 1))
        err2 += int(np.count_nonzero(decode_many(rule, y2) != 2))
        left -= m
    p1 = err1 / n_samples
    p2 = err2 / n_samples
    lo, hi = wilson_interval(err1 + err2, 2 * n_samples)
    se = 0.5 * math.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / n_samples)
    return ErrorEstimate(
        p_err=0.5 * (p1 + p2),
        p_err_given_1=p1,
        p_err_given_2=p2,
        truncation_bound=hi - lo,
        method="monte-carlo",
        n_samples=n_samples,
        seed=seed,
        std_error=se,
    )


def d_vector_from_intensities(
    ip: IntensityPair, d: float, ts: TruncationSpec = TruncationSpec(), rule: DecisionRule | None = None
) -> np.ndarray:
    """``D_i = E[(Y_i/(lam_i+d) - 1) 1[sum a_j Y_j < b]]`` with ``Y ~ Poisson(lam + d)``.

    This is the derivative of ``P(error | B=1)`` along ``lam_i`` with the rule
    held fixed; it carries no factor 1/2 for the prior.
    """
    if rule is None:
        rule = decision_rule(ip, d)
    lam = np.asarray(ip.lam) + d
    slack = _rule_slack(rule.weights, rule.b, lam, np.asarray(ip.mu) + d, ts)
    return _masses(lam, rule.weights, rule.b, ts, want_d=True, slack=slack).d


def d_vector(cp: CodePair, ch: Channel, ts: TruncationSpec = TruncationSpec()) -> np.ndarray:
    return d_vector_from_intensities(intensities(cp, ch), ch.d, ts)


def directional_derivative(D: Sequence[float], s: Sequence[float], ch: Channel) -> float:
    """``sum_i D_i zeta_i`` with ``zeta = s * pi``."""
    D = np.asarray(D, dtype=float)
    s = np.asarray(s, dtype=float)
    if len(D) != len(s) + ch.K - 1:
        raise ValueError(f"len(D) must be len(s) + K - 1 = {len(s) + ch.K - 1}, got {len(D)}")
    return float(np.dot(D, np.convolve(s, np.asarray(ch.pi))))


def stationarity_coefficients(D: Sequence[float], ch: Channel) -> np.ndarray:
    """``c_j = sum_i D_{j+i} pi_i`` for ``j = 0 .. N-1``: the gradient in codeword coordinates."""
    D = np.asarray(D, dtype=float)
    pi = np.asarray(ch.pi)
    N = len(D) - ch.K + 1
    return np.array([float(np.dot(D[j : j + ch.K], pi)) for j in range(N)])
