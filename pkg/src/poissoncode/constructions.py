"""Builders for the named code families and the N=4 benchmark codes."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .channel import CodePair, PowerConstraints


def th1_code(N: int, K: int, P: float) -> CodePair:
    """``x1 = P e_0``, ``x2 = P e_K``: optimal under total power when ``N >= K + 1``."""
    if N < K + 1:
        raise ValueError(f"blocklength N={N} must be at least K+1={K + 1}")
    if not P > 0:
        raise ValueError("P must be positive")
    x1 = [0.0] * N
    x2 = [0.0] * N
    x1[0] = P
    x2[K] = P
    return CodePair.of(x1, x2)


def cor1_code(N: int, P: float, perm: Optional[Sequence[int]] = None) -> CodePair:
    """Memoryless version of :func:`th1_code`, optionally with columns permuted."""
    if N < 2:
        raise ValueError("blocklength must be at least 2")
    cp = th1_code(N, 1, P)
    if perm is None:
        return cp
    perm = list(perm)
    if sorted(perm) != list(range(N)):
        raise ValueError(f"not a permutation of 0..{N - 1}: {perm}")
    return CodePair.of([cp.x1.x[p] for p in perm], [cp.x2.x[p] for p in perm])


def th2_family(P: float, x: float) -> CodePair:
    """``([P, 0], [0, x])`` for ``N = K = 2``."""
    if not 0 <= x <= P:
        raise ValueError(f"x must lie in [0, P={P}], got {x}")
    return CodePair.of([P, 0.0], [0.0, x])


def th3_code(N: int, A: float) -> CodePair:
    """On/off keying at peak power."""
    if N < 1 or not A > 0:
        raise ValueError("need N >= 1 and A > 0")
    return CodePair.of([A] * N, [0.0] * N)


@dataclass(frozen=True)
class Th4Code:
    code: CodePair
    # the second block did not fit into N slots and lost mass
    truncated: bool


def th4_code(N: int, A: float, beta: float) -> Th4Code:
    """Peak power ``A`` and total power ``A*beta`` on ``pi = [1]``.

    Each codeword is a block of ``floor(beta)`` full slots followed by one slot
    of ``A * frac(beta)`` (for integer ``beta`` just ``beta`` full slots); the
    second codeword's block starts right after the first one's.
    """
    if not A > 0 or not beta > 0:
        raise ValueError("need A > 0 and beta > 0")
    fl = math.floor(beta)
    if N < fl + 1:
        raise ValueError(f"blocklength N={N} must be at least floor(beta)+1={fl + 1}")
    frac = beta - fl
    if frac <= 1e-12 * max(1.0, beta):
        block = [A] * fl
    else:
        block = [A] * fl + [A * frac]
    width = len(block)
    kappa = block + [0.0] * (N + width)
    eta = [0.0] * width + block + [0.0] * N
    return Th4Code(CodePair.of(kappa[:N], eta[:N]), truncated=N < 2 * width)


BENCH_LABELS = ("c1", "c2", "c3")


def benchmark_codes(mode: str, value: float) -> dict[str, CodePair]:
    """The three N=4 comparison codes under total power (``"P"``) or peak power (``"A"``)."""
    if not value > 0:
        raise ValueError("value must be positive")
    v = float(value)
    if mode.upper() == "P":
        q, h = v / 4, v / 2
        return {
            "c1": CodePair.of([q, q, q, q], [0, 0, 0, 0]),
            "c2": CodePair.of([h, h, 0, 0], [0, 0, h, h]),
            "c3": CodePair.of([v, 0, 0, 0], [0, 0, v, 0]),
        }
    if mode.upper() == "A":
        return {
            "c1": CodePair.of([v, v, v, v], [0, 0, 0, 0]),
            "c2": CodePair.of([v, v, 0, 0], [0, 0, v, v]),
            "c3": CodePair.of([v, v, v, 0], [0, 0, 0, v]),
        }
    raise ValueError(f"mode must be 'P' or 'A', got {mode!r}")


def example6_code(variant: int, P: float = 10.0) -> CodePair:
    """The two N=K=2 codes compared in the worked example: 1 -> ([P,0],[0,0]), 2 -> ([P,0],[0,P])."""
    if variant == 1:
        return CodePair.of([P, 0.0], [0.0, 0.0])
    if variant == 2:
        return CodePair.of([P, 0.0], [0.0, P])
    raise ValueError("variant must be 1 or 2")


@dataclass(frozen=True)
class CodeFamilyId:
    """Parsed ``--code`` value such as ``th1``, ``th2:x=5``, ``bench-p:c3``, ``ex6:2``."""

    tag: str
    params: dict = field(default_factory=dict)

    _TAGS = ("th1", "cor1", "th2", "th3", "th4", "bench-p", "bench-a", "ex6")

    @classmethod
    def parse(cls, text: str) -> "CodeFamilyId":
        text = text.strip().lower()
        tag, _, rest = text.partition(":")
        if tag not in cls._TAGS:
            raise ValueError(f"unknown code family {tag!r}; expected one of {cls._TAGS}")
        params: dict = {}
        if rest:
            for item in re.split(r"[,;]", rest):
                if not item:
                    continue
                if "=" in item:
                    k, v = item.split("=", 1)
                    params[k.strip()] = v.strip()
                else:
                    params["variant"] = item.strip()
        if tag in ("bench-p", "bench-a") and params.get("variant") not in BENCH_LABELS:
            raise ValueError(f"{tag} needs one of {BENCH_LABELS}, e.g. {tag}:c3")
        return cls(tag, params)

    def __str__(self) -> str:
        if not self.params:
            return self.tag
        parts = [v if k == "variant" else f"{k}={v}" for k, v in self.params.items()]
        return f"{self.tag}:{','.join(parts)}"

    def build(
        self,
        N: Optional[int] = None,
        K: Optional[int] = None,
        pc: Optional[PowerConstraints] = None,
        x: Optional[float] = None,
    ) -> CodePair:
        """Construct the code; ``N``, ``K``, the budgets and the ``th2`` parameter
        ``x`` (when not part of the id) come from the run context."""
        P = pc.P if pc is not None else None
        A = pc.A if pc is not None else None

        def need(name, value):
            if value is None:
                raise ValueError(f"code {self} needs {name}")
            return value

        tag = self.tag
        if tag == "th1":
            K_ = need("K", K)
            return th1_code(N if N is not None else K_ + 1, K_, need("P", P))
        if tag == "cor1":
            perm = self.params.get("perm")
            perm = [int(p) for p in perm.split("-")] if perm else None
            return cor1_code(N if N is not None else 2, need("P", P), perm)
        if tag == "th2":
            if x is None:
                x = float(need("x", self.params.get("x")))
            return th2_family(need("P", P), x)
        if tag == "th3":
            return th3_code(need("N", N), need("A", A))
        if tag == "th4":
            A_ = need("A", A)
            beta = need("P", P) / A_
            return th4_code(N if N is not None else math.floor(beta) + 1, A_, beta).code
        if tag == "bench-p":
            return benchmark_codes("P", need("P", P))[self.params["variant"]]
        if tag == "bench-a":
            return benchmark_codes("A", need("A", A))[self.params["variant"]]
        if tag == "ex6":
            return example6_code(int(self.params.get("variant", 1)), need("P", P))
        raise AssertionError(tag)
