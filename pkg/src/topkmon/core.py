"""Value ordering, top-k selection, filter validity and window extremes.

Everything here is a pure function over plain Python values. Node ids are
integers ``1..n``; observed values are non-negative integers. Filter endpoints
may additionally be ``NEG_INF`` / ``POS_INF``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

NEG_INF = -math.inf
POS_INF = math.inf


def rank_key(node: int, value: int) -> tuple[int, int]:
    """Sort key under which ascending order means descending rank."""
    return (-value, node)


def rank_compare(a: tuple[int, int], b: tuple[int, int]) -> int:
    """Compare two ``(value, node)`` pairs.

    Returns 1 if ``a`` ranks higher, -1 if ``b`` ranks higher and 0 if they
    are the same pair. Higher values rank higher; equal values are broken in
    favour of the smaller node id.
    """
    (va, ia), (vb, ib) = a, b
    if va != vb:
        return 1 if va > vb else -1
    if ia != ib:
        return 1 if ia < ib else -1
    return 0


def compute_top_k(values: Mapping[int, int], k: int) -> list[int]:
    """The ``k`` highest ranked nodes, best first."""
    if not 1 <= k <= len(values):
        raise ValueError(f"k={k} out of range for n={len(values)}")
    ranked = sorted(values, key=lambda i: rank_key(i, values[i]))
    return ranked[:k]


def is_top_k_set(answer, values: Mapping[int, int]) -> bool:
    """True if ``answer`` holds k of the k largest values (ties allowed).

    This is the multiset reading of top-k: every member's value is at least
    every non-member's value. For pairwise distinct values it coincides with
    ``set(compute_top_k(values, k))``.
    """
    inside = set(answer)
    if not inside <= values.keys():
        return False
    outside = [v for i, v in values.items() if i not in inside]
    if not inside or not outside:
        return True
    return min(values[i] for i in inside) >= max(outside)


@dataclass(frozen=True)
class FilterInterval:
    """Closed interval ``[lower, upper]`` over the extended naturals."""

    lower: float | int = NEG_INF
    upper: float | int = POS_INF

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(f"empty filter [{self.lower}, {self.upper}]")

    def __contains__(self, value) -> bool:
        return self.lower <= value <= self.upper

    def violated_by(self, value) -> bool:
        return value < self.lower or value > self.upper

    def __str__(self):
        return f"[{_fmt(self.lower)}, {_fmt(self.upper)}]"


def _fmt(x) -> str:
    if x == POS_INF:
        return "inf"
    if x == NEG_INF:
        return "-inf"
    return str(int(x))


@dataclass(frozen=True)
class FilterViolation:
    """One failed filter condition.

    ``kind`` is ``"membership"`` (value outside own filter; ``other`` is None)
    or ``"overlap"`` (insider ``node`` has a lower bound below the upper bound
    of outsider ``other``).
    """

    kind: str
    node: int
    other: int | None = None


def validate_filter_set(
    filters: Mapping[int, FilterInterval],
    values: Mapping[int, int],
    k: int,
    top=None,
) -> list[FilterViolation]:
    """Check the two filter-set conditions; an empty list means valid.

    ``top`` is the set the filters are meant to protect. It defaults to
    ``compute_top_k(values, k)``; callers that track a tied top-k set under
    the multiset reading pass their own.
    """
    if filters.keys() != values.keys():
        raise ValueError("filters and values must cover the same nodes")
    inside = set(compute_top_k(values, k) if top is None else top)
    problems = [
        FilterViolation("membership", i)
        for i in sorted(values)
        if values[i] not in filters[i]
    ]
    insiders = sorted(inside)
    outsiders = sorted(i for i in values if i not in inside)
    if insiders and outsiders:
        lowest = min(filters[i].lower for i in insiders)
        highest = max(filters[j].upper for j in outsiders)
        if lowest < highest:
            # slow path only when something is wrong
            problems.extend(
                FilterViolation("overlap", i, j)
                for i in insiders
                for j in outsiders
                if filters[i].lower < filters[j].upper
            )
    return problems


def midpoint(lo: int, hi: int) -> int:
    if lo > hi:
        raise ValueError(f"midpoint of empty range [{lo}, {hi}]")
    return (lo + hi) // 2


@dataclass(frozen=True)
class WindowExtremes:
    """Running extremes since the last reset at time ``t0``.

    ``t_plus`` is the smallest insider value the coordinator has learned,
    ``t_minus`` the largest outsider value.
    """

    t_plus: float | int = POS_INF
    t_minus: float | int = NEG_INF
    t0: int = 0

    @property
    def crossed(self) -> bool:
        return self.t_plus < self.t_minus


def extremes_update(
    w: WindowExtremes, new_min: int | None = None, new_max: int | None = None
) -> WindowExtremes:
    t_plus = w.t_plus if new_min is None else min(w.t_plus, new_min)
    t_minus = w.t_minus if new_max is None else max(w.t_minus, new_max)
    return replace(w, t_plus=t_plus, t_minus=t_minus)


def as_mapping(values: Sequence[int]) -> dict[int, int]:
    """Turn a 0-indexed value row into a ``{node_id: value}`` mapping."""
    return {i + 1: int(v) for i, v in enumerate(values)}
