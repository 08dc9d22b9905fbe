import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topkmon.core import compute_top_k
from topkmon.oracle import (
    brute_force_top_k,
    competitive_envelope,
    compute_delta,
    min_feasible_partition,
    opt_lower_bound,
    static_filter_feasible,
)
from topkmon.streams import Trace

# nodes A, B, C over four steps
EXAMPLE = Trace(np.array([[10, 5, 1], [10, 5, 1], [4, 8, 1], [4, 8, 1]]), k=1)


def test_brute_force_examples():
    assert brute_force_top_k(Trace(np.array([[3, 9, 5]]), 1), 1) == [2]
    assert brute_force_top_k(Trace(np.array([[9, 7, 5, 3]]), 2), 1) == [1, 2]
    with pytest.raises(IndexError):
        brute_force_top_k(EXAMPLE, 5)


def test_brute_force_matches_core_on_random_snapshots():
    rng = np.random.default_rng(0)
    for _ in range(2000):
        n = int(rng.integers(2, 20))
        k = int(rng.integers(1, n))
        row = rng.integers(0, 10, size=n)
        trace = Trace(row[None, :], k)
        values = {i + 1: int(v) for i, v in enumerate(row)}
        assert brute_force_top_k(trace, 1) == compute_top_k(values, k)


def test_delta_examples():
    assert compute_delta(EXAMPLE) == 5
    assert compute_delta(Trace(np.tile([20, 13, 2], (6, 1)), 1)) == 7
    assert compute_delta(Trace(np.array([[4, 9, 1]]), 2)) == 3


def test_feasibility_examples():
    assert static_filter_feasible(EXAMPLE, 1, 2)
    assert not static_filter_feasible(EXAMPLE, 1, 3)
    dip = Trace(np.array([[10, 5, 1], [6, 5, 1], [10, 7, 1]]), 1)
    assert not static_filter_feasible(dip, 1, 3)
    assert static_filter_feasible(Trace(np.tile([5, 3, 9], (10, 1)), 2), 1, 10)
    with pytest.raises(ValueError):
        static_filter_feasible(EXAMPLE, 3, 2)


def test_opt_examples():
    part = opt_lower_bound(EXAMPLE)
    assert part.intervals == ((1, 2), (3, 4)) and part.lower_bound == 2
    assert min_feasible_partition(EXAMPLE) == 2
    assert opt_lower_bound(Trace(np.tile([1, 2, 3], (7, 1)), 1)).lower_bound == 1
    flips = Trace(np.array([[5, 1] if t % 2 else [1, 5] for t in range(9)]), 1)
    assert opt_lower_bound(flips).lower_bound == 9


def _feasible_by_definition(rows, k, t1, t2):
    n = len(rows[0])
    tops = [frozenset(sorted(range(n), key=lambda i: (-r[i], i))[:k]) for r in rows[t1 - 1 : t2]]
    if len(set(tops)) != 1:
        return False
    top = tops[0]
    lo = min(r[i] for r in rows[t1 - 1 : t2] for i in top)
    hi = max(r[i] for r in rows[t1 - 1 : t2] for i in range(n) if i not in top)
    return lo >= hi


traces = st.integers(2, 4).flatmap(
    lambda n: st.tuples(
        st.integers(1, n - 1),
        st.lists(st.lists(st.integers(0, 6), min_size=n, max_size=n), min_size=1, max_size=6),
    )
)


@settings(max_examples=300)
@given(traces)
def test_greedy_partition_is_feasible_maximal_and_minimal(case):
    k, rows = case
    trace = Trace(np.array(rows), k)
    part = opt_lower_bound(trace)
    T = len(rows)
    assert part.intervals[0][0] == 1 and part.intervals[-1][1] == T
    for (a, b), (c, _) in zip(part.intervals, part.intervals[1:]):
        assert c == b + 1
    for a, b in part.intervals:
        assert _feasible_by_definition(rows, k, a, b)
        if b < T:
            assert not _feasible_by_definition(rows, k, a, b + 1)
    assert part.lower_bound == min_feasible_partition(trace)


@settings(max_examples=200)
@given(traces)
def test_single_steps_always_feasible(case):
    k, rows = case
    trace = Trace(np.array(rows), k)
    assert all(static_filter_feasible(trace, t, t) for t in range(1, len(rows) + 1))


@settings(max_examples=200)
@given(traces, st.data())
def test_lower_bound_monotone_under_concatenation(case, data):
    k, rows = case
    n = len(rows[0])
    more = data.draw(st.lists(st.lists(st.integers(0, 6), min_size=n, max_size=n), min_size=1, max_size=6))
    a, b = Trace(np.array(rows), k), Trace(np.array(more), k)
    ab = Trace(np.array(rows + more), k)
    assert opt_lower_bound(ab).lower_bound >= max(opt_lower_bound(a).lower_bound, opt_lower_bound(b).lower_bound)


def test_envelope_examples():
    assert competitive_envelope(1, 1, 2, 1) == 12
    base = competitive_envelope(64, 3, 16, 5)
    assert competitive_envelope(128, 3, 16, 5) - base == pytest.approx((5 + 1) * (2 * math.log2(16) + 1))
    with pytest.raises(ValueError):
        competitive_envelope(0, 1, 2, 1)


@pytest.mark.parametrize("arg", range(4))
def test_envelope_monotone(arg):
    base = [8, 2, 16, 3]
    bumped = list(base)
    bumped[arg] *= 2
    assert competitive_envelope(*bumped) > competitive_envelope(*base)
