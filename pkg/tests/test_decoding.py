import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from poissoncode.channel import IntensityPair
from poissoncode.decoding import DecisionRule, decision_rule, decode, decode_many

vec = st.lists(st.floats(min_value=0, max_value=20), min_size=1, max_size=5)
ds = st.floats(min_value=0.01, max_value=5)


def test_rule_formula():
    ip = IntensityPair((6.0, 4.0, 0.0), (0.0, 6.0, 4.0))
    rule = decision_rule(ip, 0.5)
    np.testing.assert_allclose(rule.a, np.log([6.5 / 0.5, 4.5 / 6.5, 0.5 / 4.5]))
    assert rule.b == 0.0
    assert rule.set_A == (0,)


def test_tie_goes_to_one():
    rule = DecisionRule((1.0, 0.5), 3.0)
    assert decode(rule, [2, 2]) == 1
    assert decode(rule, [2, 1]) == 2


def test_length_mismatch():
    rule = decision_rule(IntensityPair((1.0, 2.0), (0.0, 0.0)), 1.0)
    with pytest.raises(ValueError):
        decode(rule, [1])


@given(vec, vec, ds)
def test_swap_negates_rule(lam, mu, d):
    n = min(len(lam), len(mu))
    ip = IntensityPair(tuple(lam[:n]), tuple(mu[:n]))
    r = decision_rule(ip, d)
    s = decision_rule(ip.swapped(), d)
    assert s.a == r.negated().a
    assert s.b == pytest.approx(-r.b, abs=1e-9)


@given(vec, vec, ds, st.randoms())
def test_permutation_permutes_weights(lam, mu, d, rnd):
    n = min(len(lam), len(mu))
    ip = IntensityPair(tuple(lam[:n]), tuple(mu[:n]))
    perm = list(range(n))
    rnd.shuffle(perm)
    r = decision_rule(ip, d)
    p = decision_rule(ip.permuted(perm), d)
    assert p.a == tuple(r.a[i] for i in perm)


def test_decode_many_matches_decode():
    rng = np.random.default_rng(3)
    ip = IntensityPair((3.0, 0.5, 1.0), (0.2, 2.0, 1.0))
    rule = decision_rule(ip, 0.3)
    ys = rng.poisson(2.0, size=(200, 3))
    assert list(decode_many(rule, ys)) == [decode(rule, y) for y in ys]
