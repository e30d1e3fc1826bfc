import math
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import given, settings, strategies as st

from surfmatch.analytics import (
    census_no_odd_y_chain,
    count_two_event_paths,
    split_count_ratio,
    pl_basic,
    pl_ideal,
)


def test_split_ratio_examples():
    assert split_count_ratio(2) == 2
    assert 1 < split_count_ratio(100) < 1.05
    with pytest.raises(ValueError):
        split_count_ratio(1)


def test_split_ratio_tends_to_one():
    vals = [split_count_ratio(n) for n in range(2, 201, 2)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < Fraction(102, 100)
    assert [split_count_ratio(n) for n in range(3, 201, 2)][-1] < split_count_ratio(3)


@given(st.integers(2, 400))
def test_split_ratio_matches_closed_form(n):
    k = (n + 1) // 2
    assert split_count_ratio(n) == Fraction(k + 1, n - k)


def test_pl_examples():
    assert pl_basic(4, 1e-3) == pytest.approx(5.3e-6, rel=0.01)
    assert round(pl_basic(6, 1e-3) * 1e8, 1) in (1.7, 1.8)
    assert pl_basic(6, 1e-3) == pytest.approx(20 * 3 * (2e-3 / 3) ** 3)
    assert pl_ideal(4, 1e-3) == pytest.approx(1.33e-6, rel=0.01)
    assert pl_basic(4, 0.0) == 0.0 and pl_ideal(4, 0.0) == 0.0
    for d in (3, 5, 0):
        with pytest.raises(ValueError):
            pl_basic(d, 1e-3)
        with pytest.raises(ValueError):
            pl_ideal(d, 1e-3)


@given(st.sampled_from([2, 4, 6, 8, 10]), st.floats(1e-6, 1e-2))
def test_ideal_gain_is_power_of_two(d, p):
    assert pl_basic(d, p) / pl_ideal(d, p) == pytest.approx(2 ** (d // 2), rel=1e-12)


# --- census oracles ------------------------------------------------------

def census_dp(n, k):
    """Site-by-site count: state is (errors left, length parity of the open Y run)."""

    @lru_cache(maxsize=None)
    def go(i, left, run_odd):
        if left > n - i:
            return 0
        if i == n:
            return int(left == 0 and not run_odd)
        total = 0
        # empty site or X: closes the run, which must be even
        if not run_odd:
            total += go(i + 1, left, False)
            if left:
                total += go(i + 1, left - 1, False)
        if left:
            total += go(i + 1, left - 1, not run_odd)
        return total

    return go(0, k, False)


def test_census_small_example():
    assert census_no_odd_y_chain(2, 1) == (4, 2, 0.5)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 14).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_census_matches_dp(case):
    n, k = case
    res = census_no_odd_y_chain(n, k)
    assert res.total == math.comb(n, k) * 2 ** k
    assert res.no_odd_chain == census_dp(n, k)


def test_census_full_string_fibonacci():
    # with every site occupied, Y runs tile the string into X's and YY pairs
    fib = [1, 1]
    for _ in range(20):
        fib.append(fib[-1] + fib[-2])
    for n in range(1, 16):
        assert census_no_odd_y_chain(n, n).no_odd_chain == fib[n]


def test_census_fraction_decreases():
    fr = [census_no_odd_y_chain(n, n // 2).fraction for n in (12, 16, 20)]
    assert fr[0] > fr[1] > fr[2]


def test_census_n20_total_and_dp():
    res = census_no_odd_y_chain(20, 10)
    assert res.total == 184_756 * 1024 == 189_190_144
    assert res.no_odd_chain == census_dp(20, 10)


def test_census_rejects():
    with pytest.raises(ValueError):
        census_no_odd_y_chain(25, 10)
    with pytest.raises(ValueError):
        census_no_odd_y_chain(5, 6)


def test_two_event_counts():
    c = count_two_event_paths()
    assert c.pair_length == 7 and c.pair_paths == 35
    assert (c.boundary_length, c.boundary_min, c.boundary_next) == (6, 1, 12)
    assert c.crossover == Fraction(1, 23)
    p = float(c.crossover)
    # at the crossover the two options carry equal leading-order probability
    assert c.pair_paths * p ** 7 == pytest.approx(p ** 6 + 12 * p ** 7)


def test_two_event_pair_count_is_binomial():
    c = count_two_event_paths()
    assert c.pair_paths == math.comb(7, 3)
