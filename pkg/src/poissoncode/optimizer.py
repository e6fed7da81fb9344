"""Desk-scale code search and first-order necessary-condition checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel import Channel, CodePair, IntensityPair, PowerConstraints, check_constraints, intensities
from .error import (
    ErrorEstimate,
    TruncationSpec,
    d_vector_from_intensities,
    error_from_intensities,
    stationarity_coefficients,
)

NOTE_NECESSARY = (
    "first-order conditions are necessary for optimality, never sufficient; "
    "the x2 half is obtained by swapping the codeword roles"
)


class SearchBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchSpace:
    """Grid ``{0, delta, 2 delta, ...}`` per slot, capped at the peak power and
    filtered by the total power.  ``P = 0`` is accepted and yields the zero code."""

    N: int
    delta: float
    P: Optional[float] = None
    A: Optional[float] = None
    budget: int = 200_000

    def __post_init__(self) -> None:
        if self.N < 1:
            raise ValueError("N must be positive")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.P is None and self.A is None:
            raise ValueError("at least one of P, A must be given")
        if self.P is not None and self.P < 0:
            raise ValueError("P must be non-negative")
        if self.A is not None and not self.A > 0:
            raise ValueError("A must be positive")
        if self.P is not None and self.P > 0:
            ratio = self.P / self.delta
            if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
                raise ValueError(f"delta={self.delta} does not divide P={self.P}")

    @classmethod
    def from_constraints(cls, N: int, pc: PowerConstraints, delta: float, budget: int = 200_000):
        return cls(N=N, delta=delta, P=pc.P, A=pc.A, budget=budget)

    @property
    def constraints(self) -> Optional[PowerConstraints]:
        if self.P == 0:
            return None
        return PowerConstraints(P=self.P, A=self.A)

    def levels(self) -> np.ndarray:
        cap = min(v for v in (self.P, self.A) if v is not None)
        n = int(math.floor(cap / self.delta + 1e-9))
        lv = [round(k * self.delta, 12) for k in range(n + 1)]
        if cap - lv[-1] > 1e-9 * max(1.0, cap):
            lv.append(cap)
        return np.array(lv, dtype=float)

    def codewords(self) -> list[tuple[float, ...]]:
        lv = self.levels()
        limit = None if self.P is None else self.P * (1 + 1e-12) + 1e-12
        out = []
        for combo in itertools.product(lv, repeat=self.N):
            if limit is None or sum(combo) <= limit:
                out.append(tuple(float(v) for v in combo))
        return out


@dataclass(frozen=True)
class Candidate:
    code: CodePair
    error: ErrorEstimate

    def to_dict(self) -> dict:
        return {**self.code.to_dict(), "p_err": self.error.p_err, "trunc_bound": self.error.truncation_bound}


@dataclass(frozen=True)
class SearchResult:
    best: CodePair
    best_error: ErrorEstimate
    evaluations: int
    distinct_evaluations: int
    runner_ups: tuple[Candidate, ...] = ()

    def to_dict(self) -> dict:
        return {
            "best": self.best.to_dict(),
            "p_err": self.best_error.p_err,
            "trunc_bound": self.best_error.truncation_bound,
            "evaluations": self.evaluations,
            "distinct_evaluations": self.distinct_evaluations,
            "runner_ups": [c.to_dict() for c in self.runner_ups],
        }


def _canonical_key(ip: IntensityPair) -> tuple:
    # the error is invariant under a common permutation of lam and mu
    return tuple(sorted(zip(ip.lam, ip.mu)))


class _ErrorCache:
    def __init__(self, ch: Channel, ts: TruncationSpec):
        self.ch = ch
        self.ts = ts
        self.store: dict[tuple, ErrorEstimate] = {}
        self.calls = 0

    def __call__(self, cp: CodePair) -> ErrorEstimate:
        self.calls += 1
        ip = intensities(cp, self.ch)
        key = _canonical_key(ip)
        hit = self.store.get(key)
        if hit is None:
            hit = error_from_intensities(ip, self.ch.d, self.ts)
            self.store[key] = hit
        return hit


def grid_search(
    ch: Channel,
    space: SearchSpace,
    ts: TruncationSpec = TruncationSpec(),
    top_k: int = 5,
) -> SearchResult:
    """Exact error of every ordered pair of grid codewords; the minimiser wins.

    Ties go to the lexicographically smallest flattened ``(x1, x2)``.
    """
    words = space.codewords()
    total = len(words) ** 2
    if total > space.budget:
        raise SearchBudgetExceeded(f"{total} pairs exceed the budget of {space.budget}")
    evaluate = _ErrorCache(ch, ts)
    scored: list[tuple[float, tuple, Candidate]] = []
    best: Optional[tuple[float, tuple, Candidate]] = None
    for w1 in words:
        for w2 in words:
            cp = CodePair.of(w1, w2)
            est = evaluate(cp)
            key = (est.p_err, w1 + w2)
            item = (est.p_err, w1 + w2, Candidate(cp, est))
            if best is None or key < best[:2]:
                best = item
            scored.append(item)
    scored.sort(key=lambda t: (t[0], t[1]))
    return SearchResult(
        best=best[2].code,
        best_error=best[2].error,
        evaluations=total,
        distinct_evaluations=len(evaluate.store),
        runner_ups=tuple(t[2] for t in scored[1 : 1 + top_k]),
    )


def project(v: Sequence[float], P: Optional[float], A: Optional[float]) -> np.ndarray:
    """Euclidean projection onto ``{0 <= x <= A, sum(x) <= P}``."""
    v = np.asarray(v, dtype=float)
    hi = np.inf if A is None else A
    x = np.clip(v, 0.0, hi)
    if P is None or x.sum() <= P:
        return x
    # find tau with sum(clip(v - tau, 0, A)) = P
    lo_t, hi_t = 0.0, float(np.max(v))
    for _ in range(200):
        tau = 0.5 * (lo_t + hi_t)
        if np.clip(v - tau, 0.0, hi).sum() > P:
            lo_t = tau
        else:
            hi_t = tau
    x = np.clip(v - hi_t, 0.0, hi)
    return x


def local_refine(
    cp: CodePair,
    ch: Channel,
    pc: PowerConstraints,
    steps: Iterable[float],
    ts: TruncationSpec = TruncationSpec(),
    max_sweeps: int = 50,
) -> CodePair:
    """Coordinate descent over all ``2N`` entries with projection onto the constraints.

    A move is accepted only when it strictly lowers the exact error.
    """
    if not check_constraints(cp, pc).satisfied:
        raise ValueError("starting code violates the constraints")
    evaluate = _ErrorCache(ch, ts)
    X = cp.as_array()
    cur = evaluate(cp).p_err
    for h in steps:
        for _ in range(max_sweeps):
            improved = False
            for j in range(2):
                for i in range(X.shape[1]):
                    for sign in (1.0, -1.0):
                        v = X[j].copy()
                        v[i] += sign * h
                        row = project(v, pc.P, pc.A)
                        if np.array_equal(row, X[j]):
                            continue
                        Y = X.copy()
                        Y[j] = row
                        cand = CodePair.of(Y[0], Y[1])
                        err = evaluate(cand).p_err
                        if err < cur:
                            X, cur, improved = Y, err, True
            if not improved:
                break
    return CodePair.of(X[0], X[1])


@dataclass(frozen=True)
class NecessaryReport:
    D: tuple[float, ...]
    coeffs: tuple[float, ...]
    nu: Optional[float]
    sign_ok: bool
    stationarity_ok: bool
    coeffs_x2: tuple[float, ...]
    nu_x2: Optional[float]
    stationarity_ok_x2: bool
    degenerate: bool
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.sign_ok and self.stationarity_ok and self.stationarity_ok_x2

    def to_dict(self) -> dict:
        return {
            "D": list(self.D),
            "coeffs": list(self.coeffs),
            "nu": self.nu,
            "sign_ok": self.sign_ok,
            "stationarity_ok": self.stationarity_ok,
            "coeffs_x2": list(self.coeffs_x2),
            "nu_x2": self.nu_x2,
            "stationarity_ok_x2": self.stationarity_ok_x2,
            "degenerate": self.degenerate,
            "passed": self.passed,
            "violations": list(self.violations),
            "note": NOTE_NECESSARY,
        }


def sign_violations(D: Sequence[float], lam: Sequence[float], mu: Sequence[float], tol: float) -> list[str]:
    """Indices where ``D_i`` fails to carry the sign of ``mu_i - lam_i``."""
    out = []
    for i, (Di, li, mi) in enumerate(zip(D, lam, mu)):
        if li > mi and not Di < tol:
            out.append(f"D[{i}]={Di:.3g} should be negative (lam > mu)")
        elif li < mi and not Di > -tol:
            out.append(f"D[{i}]={Di:.3g} should be positive (lam < mu)")
        elif li == mi and abs(Di) > tol:
            out.append(f"D[{i}]={Di:.3g} should vanish (lam == mu)")
    return out


def _stationarity(
    x: np.ndarray, c: np.ndarray, pc: PowerConstraints, tol: float, label: str
) -> tuple[Optional[float], list[str]]:
    """Check ``c_j = nu`` on interior entries, ``c_j >= nu`` at zero, ``c_j <= nu`` at the peak."""
    A = pc.A
    at_zero = x <= 0
    at_peak = np.zeros_like(at_zero) if A is None else x >= A
    interior = ~at_zero & ~at_peak
    slack = pc.P is None or x.sum() < pc.P - tol
    problems: list[str] = []
    if slack:
        nu = 0.0
    elif interior.any():
        nu = float(np.mean(c[interior]))
    else:
        # any nu in [max c at peak, min(c at zero, 0)] is admissible
        upper = min([0.0] + list(c[at_zero]))
        nu = upper
    for j in np.flatnonzero(interior):
        if abs(c[j] - nu) > tol:
            problems.append(f"{label}: c[{j}]={c[j]:.4g} differs from nu={nu:.4g}")
    for j in np.flatnonzero(at_zero):
        if c[j] < nu - tol:
            problems.append(f"{label}: c[{j}]={c[j]:.4g} < nu={nu:.4g} at a zero entry")
    for j in np.flatnonzero(at_peak & ~at_zero):
        if c[j] > nu + tol:
            problems.append(f"{label}: c[{j}]={c[j]:.4g} > nu={nu:.4g} at a peak entry")
    if nu > tol:
        problems.append(f"{label}: nu={nu:.4g} is positive")
    return nu, problems


def necessary_check(
    cp: CodePair,
    ch: Channel,
    pc: PowerConstraints,
    tol: float = 1e-4,
    ts: TruncationSpec = TruncationSpec(),
) -> NecessaryReport:
    """First-order conditions an optimal code must satisfy.

    ``D`` is the fixed-rule derivative of ``P(error | B=1)`` with respect to
    the intensities and ``c_j = sum_i D_{j+i} pi_i`` its pull-back to the
    codeword entries.  The peak-power case (``c_j <= nu`` at saturated
    entries) is the natural extension of the total-power statement.
    """
    if not check_constraints(cp, pc).satisfied:
        raise ValueError("code violates the constraints")
    ip = intensities(cp, ch)
    D = d_vector_from_intensities(ip, ch.d, ts)
    c = stationarity_coefficients(D, ch)
    D2 = d_vector_from_intensities(ip.swapped(), ch.d, ts)
    c2 = stationarity_coefficients(D2, ch)
    violations = sign_violations(D, ip.lam, ip.mu, tol)
    sign_ok = not violations
    degenerate = cp.x1.x == cp.x2.x
    nu, p1 = _stationarity(np.asarray(cp.x1.x), c, pc, tol, "x1")
    nu2, p2 = _stationarity(np.asarray(cp.x2.x), c2, pc, tol, "x2 (by symmetry)")
    if degenerate:
        violations.append("degenerate: the two codewords are equal")
    return NecessaryReport(
        D=tuple(float(v) for v in D),
        coeffs=tuple(float(v) for v in c),
        nu=nu,
        sign_ok=sign_ok,
        stationarity_ok=not p1,
        coeffs_x2=tuple(float(v) for v in c2),
        nu_x2=nu2,
        stationarity_ok_x2=not p2,
        degenerate=degenerate,
        violations=tuple(violations + p1 + p2),
    )
