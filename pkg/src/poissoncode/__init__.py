"""Exact error analysis and code design for binary signalling over a discrete Poisson channel with memory."""

from .channel import (
    Channel,
    ChannelError,
    CodePair,
    Codeword,
    IntensityPair,
    PowerConstraints,
    check_constraints,
    convolve,
    intensities,
)
from .decoding import DecisionRule, decision_rule, decode
from .error import (
    ErrorEstimate,
    EnumerationBudgetExceeded,
    TruncationSpec,
    d_vector,
    exact_error,
    mc_error,
)
from .optimizer import SearchSpace, grid_search, local_refine, necessary_check

__all__ = [
    "Channel",
    "ChannelError",
    "CodePair",
    "Codeword",
    "IntensityPair",
    "PowerConstraints",
    "check_constraints",
    "convolve",
    "intensities",
    "DecisionRule",
    "decision_rule",
    "decode",
    "ErrorEstimate",
    "EnumerationBudgetExceeded",
    "TruncationSpec",
    "d_vector",
    "exact_error",
    "mc_error",
    "SearchSpace",
    "grid_search",
    "local_refine",
    "necessary_check",
]
