"""Coordinator side of filter-based top-k position monitoring.

Insiders hold the filter ``[M, inf]`` and outsiders ``[-inf, M]`` for a common
boundary ``M``. A time step without filter violations costs nothing. When
nodes violate, the violating insiders run a minimum protocol (bound ``k``)
and the violating outsiders a maximum protocol (bound ``n - k``); the
coordinator then probes the other side, tightens the window extremes, and
either moves ``M`` to the new midpoint or, once the extremes cross, rebuilds
the top-k set from scratch with ``k + 1`` maximum protocols.

The functions below take a :class:`CoordinatorState` and return a new one;
message costs go to the :class:`~topkmon.transport.Fabric` passed in.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping

from .core import (
    NEG_INF,
    POS_INF,
    FilterInterval,
    WindowExtremes,
    extremes_update,
    midpoint,
)
from .protocols import Mode, RandomSource, run_extremum
from .transport import Fabric, MessageKind, MessageTally


@dataclass(frozen=True)
class CoordinatorState:
    n: int
    k: int
    top_k: tuple[int, ...]
    boundary: int
    extremes: WindowExtremes
    t: int = 0
    # protocol invocations so far; part of every randomness key
    invocations: int = 0
    silent_rounds: bool = False

    @property
    def insiders(self) -> frozenset[int]:
        return frozenset(self.top_k)

    def outsiders(self) -> list[int]:
        inside = self.insiders
        return [i for i in range(1, self.n + 1) if i not in inside]

    def filter_of(self, node: int) -> FilterInterval:
        if node in self.insiders:
            return FilterInterval(self.boundary, POS_INF)
        return FilterInterval(NEG_INF, self.boundary)

    @property
    def filters(self) -> dict[int, FilterInterval]:
        return {i: self.filter_of(i) for i in range(1, self.n + 1)}


@dataclass(frozen=True)
class NodeView:
    id: int
    value: int
    filter: FilterInterval
    was_top_k: bool

    @property
    def violated(self) -> bool:
        return self.filter.violated_by(self.value)


@dataclass
class StepReport:
    t: int
    violations: tuple[int, ...] = ()
    handler_invoked: bool = False
    reset_invoked: bool = False
    tally_delta: MessageTally = field(default_factory=MessageTally)
    answer: tuple[int, ...] = ()
    boundary: int | None = None

    def summary(self) -> dict:
        return {
            "t": self.t,
            "violations": list(self.violations),
            "handler": self.handler_invoked,
            "reset": self.reset_invoked,
            "messages": self.tally_delta.total,
            "answer": list(self.answer),
            "boundary": self.boundary,
        }


def _check_k(n: int, k: int) -> None:
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 1 <= k < n:
        raise ValueError(f"k={k} must lie in [1, n-1] for n={n}")


def _protocol(state, participants, N, mode, rng, fabric, *, announce):
    """Run one extremum protocol and bump the invocation counter."""
    if announce:
        fabric.record_broadcast(
            MessageKind.InitiationBroadcast,
            f"{mode.value} N={N} participants={len(participants)}",
        )
    outcome = run_extremum(
        participants,
        N,
        rng,
        fabric,
        mode=mode,
        key=(state.invocations, state.t),
        silent_rounds=state.silent_rounds,
    )
    return replace(state, invocations=state.invocations + 1), outcome


def initialize(
    values: Mapping[int, int],
    k: int,
    rng: RandomSource,
    fabric: Fabric,
    *,
    t: int = 1,
    silent_rounds: bool = False,
) -> CoordinatorState:
    """Build the first filter set for the snapshot ``values`` observed at ``t``."""
    n = len(values)
    _check_k(n, k)
    if sorted(values) != list(range(1, n + 1)):
        raise ValueError("values must be keyed by node ids 1..n")
    fabric.t = t
    state = CoordinatorState(
        n=n,
        k=k,
        top_k=(),
        boundary=0,
        extremes=WindowExtremes(t0=t),
        t=t,
        silent_rounds=silent_rounds,
    )
    return filter_reset(state, values, rng, fabric)


def filter_reset(
    state: CoordinatorState,
    values: Mapping[int, int],
    rng: RandomSource,
    fabric: Fabric,
) -> CoordinatorState:
    """Rediscover the top ``k + 1`` nodes one maximum protocol at a time."""
    found: list[tuple[int, int]] = []
    remaining = dict(values)
    for _ in range(state.k + 1):
        state, outcome = _protocol(
            state, remaining, state.n, Mode.MAX, rng, fabric, announce=True
        )
        found.append((outcome.winner, outcome.winner_value))
        del remaining[outcome.winner]
    kth, next_ = found[state.k - 1][1], found[state.k][1]
    m = midpoint(next_, kth)
    top = tuple(node for node, _ in found[: state.k])
    fabric.record_broadcast(
        MessageKind.FilterBroadcast,
        f"reset M={m} top={','.join(map(str, top))}",
    )
    return replace(
        state,
        top_k=top,
        boundary=m,
        extremes=WindowExtremes(t_plus=kth, t_minus=next_, t0=state.t),
    )


def node_views(state: CoordinatorState, values: Mapping[int, int]) -> list[NodeView]:
    inside = state.insiders
    return [
        NodeView(i, values[i], state.filter_of(i), i in inside)
        for i in range(1, state.n + 1)
    ]


def detect_violations(state: CoordinatorState, values: Mapping[int, int]) -> list[int]:
    m = state.boundary
    inside = state.insiders
    return [
        i
        for i in range(1, state.n + 1)
        if (values[i] < m if i in inside else values[i] > m)
    ]


def filter_violation_handler(
    state: CoordinatorState,
    values: Mapping[int, int],
    min_opt: int | None,
    max_opt: int | None,
    rng: RandomSource,
    fabric: Fabric,
) -> tuple[CoordinatorState, bool]:
    """Tighten the window extremes and move the boundary or reset.

    ``min_opt`` / ``max_opt`` are what the violating insiders / outsiders
    reported. If no outsider reported, the maximum over all outsiders is
    probed; otherwise the minimum over all insiders is probed and replaces
    ``min_opt``. Returns the new state and whether a reset happened.
    """
    if min_opt is None and max_opt is None:
        raise ValueError("handler needs at least one reported value")
    if max_opt is None:
        outsiders = {j: values[j] for j in state.outsiders()}
        state, outcome = _protocol(
            state, outsiders, state.n - state.k, Mode.MAX, rng, fabric, announce=True
        )
        max_opt = outcome.winner_value
    else:
        insiders = {i: values[i] for i in state.top_k}
        state, outcome = _protocol(
            state, insiders, state.k, Mode.MIN, rng, fabric, announce=True
        )
        min_opt = outcome.winner_value

    extremes = extremes_update(state.extremes, min_opt, max_opt)
    state = replace(state, extremes=extremes)
    if extremes.crossed:
        return filter_reset(state, values, rng, fabric), True

    m = midpoint(int(extremes.t_minus), int(extremes.t_plus))
    fabric.record_broadcast(MessageKind.FilterBroadcast, f"M={m}")
    return replace(state, boundary=m), False


def step(
    state: CoordinatorState,
    values: Mapping[int, int],
    rng: RandomSource,
    fabric: Fabric,
) -> tuple[CoordinatorState, StepReport]:
    """Advance one time step with the new snapshot ``values``."""
    t = state.t + 1
    fabric.t = t
    state = replace(state, t=t)
    before = fabric.tally_snapshot()
    violators = detect_violations(state, values)
    report = StepReport(t=t, violations=tuple(violators))

    if violators:
        inside = state.insiders
        low = {i: values[i] for i in violators if i in inside}
        high = {j: values[j] for j in violators if j not in inside}
        min_opt = max_opt = None
        # violators start these themselves, so no initiation broadcast
        if low:
            state, outcome = _protocol(
                state, low, state.k, Mode.MIN, rng, fabric, announce=False
            )
            min_opt = outcome.winner_value
        if high:
            state, outcome = _protocol(
                state, high, state.n - state.k, Mode.MAX, rng, fabric, announce=False
            )
            max_opt = outcome.winner_value
        state, report.reset_invoked = filter_violation_handler(
            state, values, min_opt, max_opt, rng, fabric
        )
        report.handler_invoked = True

    report.tally_delta = fabric.tally_snapshot() - before
    report.answer = state.top_k
    report.boundary = state.boundary
    return state, report
