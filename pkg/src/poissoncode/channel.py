"""Channels, codewords and power constraints for the discrete Poisson channel.

Outputs of a channel with memory ``pi = [pi_0, ..., pi_{K-1}]`` and dark noise
``d`` are independent Poisson variables ``Y_i ~ Poisson(d + (x * pi)[i])`` for
``i = 0 .. N+K-2``.  The error probability of a code depends on the codewords
only through the two intensity sequences ``lam = x1 * pi`` and ``mu = x2 * pi``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np


class ChannelError(ValueError):
    """Invalid channel, codeword or constraint parameters."""


def _as_vector(values: Sequence[float], name: str) -> tuple[float, ...]:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ChannelError(f"{name} must be a non-empty 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise ChannelError(f"{name} must be finite")
    if np.any(arr < 0):
        raise ChannelError(f"{name} must be non-negative, got {arr.tolist()}")
    return tuple(float(v) for v in arr)


@dataclass(frozen=True)
class Channel:
    """Channel coefficients ``pi`` (length K) and dark noise ``d > 0``."""

    pi: tuple[float, ...]
    d: float

    def __post_init__(self) -> None:
        pi = _as_vector(self.pi, "pi")
        if not any(p > 0 for p in pi):
            raise ChannelError("at least one channel coefficient must be positive")
        d = float(self.d)
        if not np.isfinite(d) or d <= 0:
            raise ChannelError(f"dark noise d must be positive, got {self.d}")
        if sum(pi) > 1 + 1e-12:
            warnings.warn(f"channel coefficients sum to {sum(pi):g} > 1", stacklevel=3)
        object.__setattr__(self, "pi", pi)
        object.__setattr__(self, "d", d)

    @property
    def K(self) -> int:
        return len(self.pi)

    @property
    def total(self) -> float:
        return float(sum(self.pi))

    def to_dict(self) -> dict:
        return {"pi": list(self.pi), "d": self.d}

    @classmethod
    def from_dict(cls, obj: dict) -> "Channel":
        try:
            return cls(pi=tuple(obj["pi"]), d=obj["d"])
        except KeyError as exc:
            raise ChannelError(f"channel object is missing key {exc}") from None


@dataclass(frozen=True)
class Codeword:
    x: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _as_vector(self.x, "codeword"))

    def __len__(self) -> int:
        return len(self.x)

    @property
    def power(self) -> float:
        return float(sum(self.x))


@dataclass(frozen=True)
class CodePair:
    """The two codewords sent for ``B = 1`` and ``B = 2``."""

    x1: Codeword
    x2: Codeword

    def __post_init__(self) -> None:
        if not isinstance(self.x1, Codeword):
            object.__setattr__(self, "x1", Codeword(tuple(self.x1)))
        if not isinstance(self.x2, Codeword):
            object.__setattr__(self, "x2", Codeword(tuple(self.x2)))
        if len(self.x1) != len(self.x2):
            raise ChannelError(
                f"codewords must have equal length, got {len(self.x1)} and {len(self.x2)}"
            )

    @classmethod
    def of(cls, x1: Sequence[float], x2: Sequence[float]) -> "CodePair":
        return cls(Codeword(tuple(x1)), Codeword(tuple(x2)))

    @property
    def N(self) -> int:
        return len(self.x1)

    def swapped(self) -> "CodePair":
        return CodePair(self.x2, self.x1)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1.x, self.x2.x])

    def to_dict(self) -> dict:
        return {"x1": list(self.x1.x), "x2": list(self.x2.x)}

    @classmethod
    def from_dict(cls, obj: dict) -> "CodePair":
        try:
            return cls.of(obj["x1"], obj["x2"])
        except KeyError as exc:
            raise ChannelError(f"code pair object is missing key {exc}") from None


@dataclass(frozen=True)
class PowerConstraints:
    """Total-power budget ``P`` and/or peak-power budget ``A``."""

    P: Optional[float] = None
    A: Optional[float] = None

    def __post_init__(self) -> None:
        if self.P is None and self.A is None:
            raise ChannelError("at least one of P, A must be given")
        for name in ("P", "A"):
            v = getattr(self, name)
            if v is not None:
                v = float(v)
                if not np.isfinite(v) or v <= 0:
                    raise ChannelError(f"{name} must be positive, got {v}")
                object.__setattr__(self, name, v)

    @property
    def beta(self) -> Optional[float]:
        if self.P is None or self.A is None:
            return None
        return self.P / self.A

    def to_dict(self) -> dict:
        return {k: v for k, v in (("P", self.P), ("A", self.A)) if v is not None}

    @classmethod
    def from_dict(cls, obj: dict) -> "PowerConstraints":
        return cls(P=obj.get("P"), A=obj.get("A"))


@dataclass(frozen=True)
class IntensityPair:
    """Output intensities (without dark noise) under the two hypotheses."""

    lam: tuple[float, ...]
    mu: tuple[float, ...]

    def __post_init__(self) -> None:
        lam = _as_vector(self.lam, "lambda")
        mu = _as_vector(self.mu, "mu")
        if len(lam) != len(mu):
            raise ChannelError("lambda and mu must have equal length")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    def __len__(self) -> int:
        return len(self.lam)

    def swapped(self) -> "IntensityPair":
        return IntensityPair(self.mu, self.lam)

    def permuted(self, perm: Sequence[int]) -> "IntensityPair":
        perm = list(perm)
        return IntensityPair(
            tuple(self.lam[p] for p in perm), tuple(self.mu[p] for p in perm)
        )


@dataclass(frozen=True)
class ConstraintReport:
    satisfied: bool
    total_ok: Optional[bool]
    peak_ok: Optional[bool]
    # P - sum(x_j); negative means excess
    total_slack: Optional[tuple[float, float]] = None
    # A - max(x_j)
    peak_slack: Optional[tuple[float, float]] = None
    violations: tuple[str, ...] = field(default_factory=tuple)


def convolve(x: Codeword | Sequence[float], ch: Channel) -> np.ndarray:
    """Full linear convolution ``x * pi``, length ``N + K - 1``."""
    xs = x.x if isinstance(x, Codeword) else _as_vector(x, "codeword")
    return np.convolve(np.asarray(xs, dtype=float), np.asarray(ch.pi, dtype=float))


def intensities(cp: CodePair, ch: Channel) -> IntensityPair:
    return IntensityPair(tuple(convolve(cp.x1, ch)), tuple(convolve(cp.x2, ch)))


def check_constraints(cp: CodePair, pc: PowerConstraints) -> ConstraintReport:
    violations: list[str] = []
    total_ok = peak_ok = None
    total_slack = peak_slack = None
    words = (cp.x1, cp.x2)
    if pc.P is not None:
        total_slack = tuple(pc.P - w.power for w in words)
        total_ok = all(s >= 0 for s in total_slack)
        for j, s in enumerate(total_slack, start=1):
            if s < 0:
                violations.append(f"codeword {j} exceeds total power by {-s:g}")
    if pc.A is not None:
        peak_slack = tuple(pc.A - max(w.x) for w in words)
        peak_ok = all(s >= 0 for s in peak_slack)
        for j, s in enumerate(peak_slack, start=1):
            if s < 0:
                violations.append(f"codeword {j} exceeds peak power by {-s:g}")
    return ConstraintReport(
        satisfied=not violations,
        total_ok=total_ok,
        peak_ok=peak_ok,
        total_slack=total_slack,
        peak_slack=peak_slack,
        violations=tuple(violations),
    )


def load_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
