import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from poissoncode.majorization import (
    AROp,
    anti_robin_hood,
    ar_path,
    lemma6_cap,
    majorizes,
    replay,
    robin_hood,
    weak_majorizes,
)

vec = st.lists(st.floats(min_value=0, max_value=10), min_size=2, max_size=6)


def test_basic_majorization():
    assert majorizes([3, 0, 0], [1, 1, 1])
    assert not majorizes([1, 1, 1], [3, 0, 0])
    assert weak_majorizes([3, 1], [2, 1])
    assert not majorizes([3, 1], [2, 1])
    with pytest.raises(ValueError):
        weak_majorizes([1, 2], [1])


def test_robin_hood_and_inverse():
    s = np.array([5.0, 1.0, 2.0])
    r = robin_hood(s, AROp(0, 1, 1.5))
    np.testing.assert_allclose(r, [3.5, 2.5, 2.0])
    back = anti_robin_hood(r, AROp(0, 1, 1.5))
    np.testing.assert_allclose(back, s)
    with pytest.raises(ValueError):
        robin_hood(s, AROp(1, 0, 0.5))
    with pytest.raises(ValueError):
        anti_robin_hood(s, AROp(0, 1, 2.0))


def test_ar_accepts_equal_entries():
    np.testing.assert_allclose(anti_robin_hood([1.0, 1.0], AROp(0, 1, 1.0)), [2.0, 0.0])


def test_aroperation_validation():
    with pytest.raises(ValueError):
        AROp(1, 1, 0.1)
    with pytest.raises(ValueError):
        AROp(0, 1, 0.0)


@given(vec, st.integers(0, 5), st.integers(0, 5), st.floats(0.01, 1.0))
def test_ar_result_majorizes(s, i, j, frac):
    n = len(s)
    i, j = i % n, j % n
    assume(i != j and s[i] >= s[j] and s[j] > 1e-6)
    out = anti_robin_hood(s, AROp(i, j, frac * s[j]))
    assert majorizes(out, s)


grain = st.lists(st.integers(0, 40), min_size=2, max_size=6)


@settings(max_examples=100)
@given(grain, st.floats(0.0, 1.0), st.randoms())
def test_ar_path_replays_to_target(raw, t, rnd):
    # a convex mix of a sorted start and its fully concentrated version is
    # sorted the same way and majorizes the start; both then share a shuffle
    x = np.sort(np.array(raw, dtype=float) / 4)[::-1]
    z = np.zeros_like(x)
    z[0] = x.sum()
    y = (1 - t) * x + t * z
    perm = list(range(len(x)))
    rnd.shuffle(perm)
    x, y = x[perm], y[perm]
    ops = ar_path(x, y)
    assert len(ops) <= len(x) - 1
    np.testing.assert_allclose(replay(x, ops), y, atol=1e-9)


def test_ar_path_rejects_non_majorizing_and_swap():
    with pytest.raises(ValueError):
        ar_path([3, 0], [1, 2])
    with pytest.raises(ValueError):
        ar_path([2, 1], [1, 2])


def test_ar_path_example():
    ops = ar_path([1, 1, 1], [3, 0, 0])
    np.testing.assert_allclose(replay([1, 1, 1], ops), [3, 0, 0])


def test_lemma6_cap():
    out, t = lemma6_cap([2.0, 1.0, 1.0], [3.0, 2.0, 0.0])
    np.testing.assert_allclose(out, [3.0, 1.0, 0.0])
    assert t == 0
    assert majorizes(out, [2.0, 1.0, 1.0])
    out, t = lemma6_cap([1.0, 0.5], [2.0, 1.0])
    assert t == -1
    np.testing.assert_allclose(out, [1.5, 0.0])
    with pytest.raises(ValueError):
        lemma6_cap([1.0, 2.0], [3.0, 0.0])


@given(vec, vec)
def test_lemma6_cap_property(lam, pi):
    n = min(len(lam), len(pi))
    lam = np.sort(np.array(lam[:n]))[::-1]
    pi = np.sort(np.array(pi[:n]))[::-1]
    assume(weak_majorizes(pi, lam))
    out, t = lemma6_cap(lam, pi)
    assert majorizes(out, lam)
    assert weak_majorizes(pi, out)
