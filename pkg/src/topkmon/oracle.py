"""Offline ground truth for a whole trace.

The brute-force top-k here is written independently of
:func:`topkmon.core.compute_top_k` so the two can check each other.

``opt_lower_bound`` splits ``[1, T]`` greedily into maximal windows that a
single static filter set could cover. Any filter-based offline algorithm must
assign filters at least once per window, so the window count is a certified
lower bound on its message count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .streams import Trace


def _order(row: np.ndarray) -> np.ndarray:
    # lexsort: last key is primary; value descending, then id ascending
    ids = np.arange(1, len(row) + 1)
    return np.lexsort((ids, -row.astype(np.int64))) + 1


def brute_force_top_k(trace: Trace, t: int, k: int | None = None) -> list[int]:
    k = trace.require_k(k)
    if not 1 <= t <= trace.T:
        raise IndexError(f"time {t} outside 1..{trace.T}")
    return [int(i) for i in _order(trace.row(t))[:k]]


def step_gaps(trace: Trace, k: int | None = None) -> np.ndarray:
    """Per-step gap between the k-th and (k+1)-st largest value."""
    k = trace.require_k(k)
    ordered = -np.sort(-trace.values, axis=1)
    return ordered[:, k - 1] - ordered[:, k]


def compute_delta(trace: Trace, k: int | None = None) -> int:
    return int(step_gaps(trace, k).max())


class _Windows:
    """Per-step top-k membership masks plus window feasibility queries."""

    def __init__(self, trace: Trace, k: int):
        self.T = trace.T
        self.values = trace.values
        T, n = trace.values.shape
        ids = np.broadcast_to(np.arange(n), (T, n))
        order = np.lexsort((ids, -self.values), axis=1)
        self.mask = np.zeros((T, n), dtype=bool)
        np.put_along_axis(self.mask, order[:, :k], True, axis=1)
        # same_as_prev[t] is True when row t has the same top-k set as row t-1
        self.same_as_prev = np.r_[False, (self.mask[1:] == self.mask[:-1]).all(axis=1)]

    def feasible(self, t1: int, t2: int) -> bool:
        if not 1 <= t1 <= t2 <= self.T:
            raise ValueError(f"bad window [{t1}, {t2}] for T={self.T}")
        if not self.same_as_prev[t1:t2].all():
            return False
        block = self.values[t1 - 1 : t2]
        inside = self.mask[t1 - 1]
        return bool(block[:, inside].min() >= block[:, ~inside].max())


def static_filter_feasible(trace: Trace, t1: int, t2: int, k: int | None = None) -> bool:
    """Whether one filter set can stay valid for every step of ``[t1, t2]``."""
    return _Windows(trace, trace.require_k(k)).feasible(t1, t2)


@dataclass(frozen=True)
class OptPartition:
    intervals: tuple[tuple[int, int], ...]

    @property
    def lower_bound(self) -> int:
        return len(self.intervals)


def opt_lower_bound(trace: Trace, k: int | None = None) -> OptPartition:
    w = _Windows(trace, trace.require_k(k))
    intervals = []
    start = 1
    while start <= trace.T:
        inside = w.mask[start - 1]
        lowest, highest = w.values[start - 1, inside].min(), w.values[start - 1, ~inside].max()
        end = start
        # feasibility is hereditary, so extend while the next step still fits
        while end < trace.T and w.same_as_prev[end]:
            row = w.values[end]
            lo, hi = min(lowest, row[inside].min()), max(highest, row[~inside].max())
            if lo < hi:
                break
            lowest, highest, end = lo, hi, end + 1
        intervals.append((start, end))
        start = end + 1
    return OptPartition(tuple(intervals))


def min_feasible_partition(trace: Trace, k: int | None = None) -> int:
    """Exhaustive minimum over every partition of ``[1, T]`` into windows."""
    windows = _Windows(trace, trace.require_k(k))
    T = trace.T
    ok = {
        (a, b): windows.feasible(a, b) for a in range(1, T + 1) for b in range(a, T + 1)
    }
    best = T
    # bit j set means a cut between step j+1 and j+2
    for cuts in range(1 << (T - 1)):
        bounds = [0] + [j + 1 for j in range(T - 1) if cuts >> j & 1] + [T]
        if all(ok[(bounds[i] + 1, bounds[i + 1])] for i in range(len(bounds) - 1)):
            best = min(best, len(bounds) - 1)
    return best


def competitive_envelope(delta: int, k: int, n: int, opt_lb: int) -> float:
    """Reference ceiling ``(opt+1) * (log2(delta)+1+k) * (2*log2(n)+1)``."""
    if delta < 1:
        raise ValueError("delta must be at least 1")
    return (opt_lb + 1) * (math.log2(delta) + 1 + k) * (2 * math.log2(n) + 1)
