import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_error, random_intensities
from poissoncode.channel import Channel, CodePair, IntensityPair
from poissoncode.decoding import DecisionRule, decision_rule
from poissoncode.error import (
    EnumerationBudgetExceeded,
    TruncationSpec,
    d_vector,
    d_vector_from_intensities,
    directional_derivative,
    error_from_intensities,
    error_with_fixed_rule,
    exact_error,
    mc_error,
    stationarity_coefficients,
    tie_probability,
    wilson_interval,
)

EPS = TruncationSpec().epsilon
small = st.floats(min_value=0.0, max_value=4.0)


def test_matches_brute_force(rng):
    for _ in range(15):
        n = int(rng.integers(1, 4))
        lam, mu = random_intensities(rng, n, scale=3.0)
        d = float(rng.uniform(0.1, 1.0))
        got = error_from_intensities(IntensityPair(tuple(lam), tuple(mu)), d)
        want, w1, w2 = brute_force_error(lam, mu, d)
        assert got.p_err == pytest.approx(want, abs=2 * EPS)
        assert got.p_err_given_1 == pytest.approx(w1, abs=2 * EPS)
        assert got.p_err_given_2 == pytest.approx(w2, abs=2 * EPS)


def test_example_values():
    ch = Channel((0.6, 0.4), 0.5)
    e1 = exact_error(CodePair.of([10, 0], [0, 0]), ch)
    e2 = exact_error(CodePair.of([10, 0], [0, 10]), ch)
    # frozen from the brute-force oracle
    assert e1.p_err == pytest.approx(0.0092401172, abs=1e-9)
    assert e2.p_err == pytest.approx(0.0095026, abs=1e-7)
    assert e1.truncation_bound == EPS


def test_identical_codewords_give_half():
    ch = Channel((0.5, 0.5), 0.3)
    est = exact_error(CodePair.of([1, 2], [1, 2]), ch)
    assert est.p_err == 0.5


def test_zero_intensity_everywhere_decodes_one():
    est = error_from_intensities(IntensityPair((0.0,), (0.0,)), 1.0)
    assert est.p_err_given_1 == 0.0 and est.p_err_given_2 == 1.0


def test_budget_exceeded():
    ip = IntensityPair((50.0,) * 6, (0.0,) * 6)
    with pytest.raises(EnumerationBudgetExceeded):
        error_from_intensities(ip, 0.01, TruncationSpec(1e-10, budget=1000))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(small, small), min_size=1, max_size=3), st.floats(0.05, 2.0), st.randoms())
def test_swap_and_permutation_invariance(pairs, d, rnd):
    lam = tuple(p[0] for p in pairs)
    mu = tuple(p[1] for p in pairs)
    ip = IntensityPair(lam, mu)
    base = error_from_intensities(ip, d).p_err
    perm = list(range(len(lam)))
    rnd.shuffle(perm)
    assert error_from_intensities(ip.permuted(perm), d).p_err == pytest.approx(base, abs=2 * EPS)
    tie = tie_probability(ip, d)
    assert abs(error_from_intensities(ip.swapped(), d).p_err - base) <= 2 * EPS + tie


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.tuples(small, small, st.floats(-2, 2)), min_size=1, max_size=3),
    st.floats(-3, 3),
    st.floats(0.05, 2.0),
)
def test_ml_rule_dominates_any_linear_rule(rows, b, d):
    ip = IntensityPair(tuple(r[0] for r in rows), tuple(r[1] for r in rows))
    other = DecisionRule(tuple(r[2] for r in rows), b)
    e1, e2 = error_with_fixed_rule(ip, other, d)
    assert error_from_intensities(ip, d).p_err <= 0.5 * (e1 + e2) + 2 * EPS


def central_difference(ip, d, i, h, ts):
    rule = decision_rule(ip, d)
    lam = np.array(ip.lam)
    up, dn = lam.copy(), lam.copy()
    up[i] += h
    dn[i] -= h
    f_up = error_with_fixed_rule(IntensityPair(tuple(up), ip.mu), rule, d, ts)[0]
    f_dn = error_with_fixed_rule(IntensityPair(tuple(dn), ip.mu), rule, d, ts)[0]
    return (f_up - f_dn) / (2 * h)


def test_d_vector_finite_differences(rng):
    ts = TruncationSpec(1e-13)
    for _ in range(5):
        n = int(rng.integers(2, 4))
        lam, mu = random_intensities(rng, n, scale=3.0, floor=0.3)
        ip = IntensityPair(tuple(lam), tuple(mu))
        d = float(rng.uniform(0.2, 1.0))
        D = d_vector_from_intensities(ip, d, ts)
        fd = np.array([central_difference(ip, d, i, 1e-4, ts) for i in range(n)])
        np.testing.assert_allclose(D, fd, rtol=1e-3, atol=1e-7)


def test_d_vector_zero_where_rule_ignores_slot():
    ip = IntensityPair((2.0, 1.0), (0.5, 1.0))
    D = d_vector_from_intensities(ip, 0.5)
    assert D[1] == 0.0


def test_directional_derivative_matches_coefficients():
    ch = Channel((0.6, 0.4), 0.5)
    cp = CodePair.of([4.0, 1.0, 0.0], [0.0, 2.0, 3.0])
    D = d_vector(cp, ch)
    c = stationarity_coefficients(D, ch)
    for j in range(3):
        e = np.zeros(3)
        e[j] = 1.0
        assert directional_derivative(D, e, ch) == pytest.approx(c[j], abs=1e-14)
    with pytest.raises(ValueError):
        directional_derivative(D, np.ones(2), ch)


def test_mc_agrees_and_is_reproducible():
    ch = Channel((0.6, 0.4), 0.5)
    cp = CodePair.of([10, 0], [0, 0])
    a = mc_error(cp, ch, 50_000, seed=7)
    b = mc_error(cp, ch, 50_000, seed=7)
    assert a == b
    assert abs(a.p_err - exact_error(cp, ch).p_err) <= 4 * a.std_error
    assert a.method == "monte-carlo"
    with pytest.raises(ValueError):
        mc_error(cp, ch, 0, seed=1)


def test_tie_probability_detects_lattice_ties():
    # log(2) * y never equals 1 on the integers
    assert tie_probability(IntensityPair((1.0,), (0.0,)), 1.0) == 0.0
    assert tie_probability(IntensityPair((1.0,), (1.0,)), 1.0) == 1.0


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-15) and 0 < hi < 0.05
    assert wilson_interval(0, 0) == (0.0, 1.0)
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and math.isclose(lo + hi, 1.0)


def test_lattice_ties_are_order_independent():
    # sum(a) = 0 and b = 0, so every constant output vector is an exact tie
    a = IntensityPair((1.5, 2.5, 0.0), (0.0, 1.5, 2.5))
    b = IntensityPair((2.5, 1.5, 0.0), (0.0, 2.5, 1.5))
    ea, eb = error_from_intensities(a, 0.5), error_from_intensities(b, 0.5)
    assert tie_probability(a, 0.5) > 0.01
    assert ea.p_err == pytest.approx(eb.p_err, abs=2 * EPS)
    want, w1, w2 = brute_force_error(b.lam, b.mu, 0.5)
    assert eb.p_err == pytest.approx(want, abs=2 * EPS)
    assert eb.p_err_given_1 == pytest.approx(w1, abs=2 * EPS)
