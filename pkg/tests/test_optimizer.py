import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from poissoncode.channel import Channel, CodePair, PowerConstraints, check_constraints
from poissoncode.constructions import th1_code
from poissoncode.error import TruncationSpec, exact_error
from poissoncode.optimizer import (
    NOTE_NECESSARY,
    SearchBudgetExceeded,
    SearchSpace,
    grid_search,
    local_refine,
    necessary_check,
    project,
    sign_violations,
)

EPS = TruncationSpec().epsilon
EX6 = Channel((0.6, 0.4), 0.5)


def test_search_space_levels():
    sp = SearchSpace(N=2, delta=1.0, P=3.0, A=2.5)
    np.testing.assert_allclose(sp.levels(), [0, 1, 2, 2.5])
    assert all(sum(w) <= 3.0 for w in sp.codewords())
    with pytest.raises(ValueError):
        SearchSpace(N=2, delta=0.7, P=2.0)
    with pytest.raises(ValueError):
        SearchSpace(N=2, delta=1.0)
    zero = SearchSpace(N=3, delta=1.0, P=0.0)
    assert zero.codewords() == [(0.0, 0.0, 0.0)]
    assert zero.constraints is None


def test_budget():
    with pytest.raises(SearchBudgetExceeded):
        grid_search(EX6, SearchSpace(N=3, delta=1.0, P=10.0, budget=100))


@pytest.fixture(scope="module")
def small_search():
    space = SearchSpace(N=2, delta=1.0, P=4.0)
    return space, grid_search(EX6, space)


def test_grid_search_exhaustive(small_search):
    space, res = small_search
    words = space.codewords()
    rng = np.random.default_rng(5)
    for _ in range(100):
        w1 = words[rng.integers(len(words))]
        w2 = words[rng.integers(len(words))]
        assert res.best_error.p_err <= exact_error(CodePair.of(w1, w2), EX6).p_err + 2 * EPS
    assert res.evaluations == len(words) ** 2
    assert res.distinct_evaluations < res.evaluations


def test_grid_search_deterministic_and_serialisable(small_search):
    space, res = small_search
    again = grid_search(EX6, space)
    assert again.best == res.best
    d = json.loads(json.dumps(res.to_dict()))
    assert d["p_err"] == res.best_error.p_err
    assert len(d["runner_ups"]) == 5
    # ties resolved toward the lexicographically smallest flattened pair
    for c in res.runner_ups:
        if c.error.p_err == res.best_error.p_err:
            assert res.best.x1.x + res.best.x2.x < c.code.x1.x + c.code.x2.x


def test_grid_never_beats_total_power_construction():
    ch = Channel((0.8,), 0.5)
    P = 8.0
    res = grid_search(ch, SearchSpace(N=2, delta=P / 8, P=P))
    assert res.best_error.p_err >= exact_error(th1_code(2, 1, P), ch).p_err - 2 * EPS


@settings(max_examples=60)
@given(
    st.lists(st.floats(-5, 15), min_size=1, max_size=6),
    st.floats(0.5, 20),
    st.one_of(st.none(), st.floats(0.5, 10)),
)
def test_project_feasible_and_idempotent(v, P, A):
    x = project(v, P, A)
    assert np.all(x >= 0)
    assert x.sum() <= P + 1e-9
    if A is not None:
        assert np.all(x <= A + 1e-12)
    np.testing.assert_allclose(project(x, P, A), x, atol=1e-9)


def test_project_is_nearest_on_simplex():
    x = project([3.0, 1.0, -1.0], 2.0, None)
    np.testing.assert_allclose(x, [2.0, 0.0, 0.0], atol=1e-9)


def test_local_refine_monotone_and_feasible():
    pc = PowerConstraints(P=10.0)
    start = CodePair.of([5.0, 5.0], [2.0, 3.0])
    out = local_refine(start, EX6, pc, [2.0, 1.0, 0.5])
    assert check_constraints(out, pc).satisfied
    assert exact_error(out, EX6).p_err <= exact_error(start, EX6).p_err + 2 * EPS
    with pytest.raises(ValueError):
        local_refine(CodePair.of([11, 0], [0, 0]), EX6, pc, [1.0])


def test_necessary_check_on_optimum():
    rep = necessary_check(CodePair.of([10, 0], [0, 0]), EX6, PowerConstraints(P=10))
    assert rep.passed, rep.violations
    d = rep.to_dict()
    assert d["note"] == NOTE_NECESSARY
    assert "necessary" in d["note"] and "sufficient" in d["note"]


def test_necessary_check_flags_poor_code():
    rep = necessary_check(CodePair.of([5, 5], [0, 0]), EX6, PowerConstraints(P=10))
    assert not rep.passed


def test_necessary_check_degenerate():
    rep = necessary_check(CodePair.of([1, 1], [1, 1]), EX6, PowerConstraints(P=10))
    assert rep.degenerate


def test_sign_violations():
    assert sign_violations([-1.0, 1.0, 0.0], [2, 0, 1], [0, 2, 1], 1e-8) == []
    assert len(sign_violations([1.0], [2], [0], 1e-8)) == 1
