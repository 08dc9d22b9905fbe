"""Randomized extremum finding with doubling send probabilities.

In round ``r = 0 .. ceil(log2 N)`` every still-active participant that is
not already beaten by the last broadcast extremum sends ``(id, value)`` with
probability ``min(2**r / N, 1)`` and then goes quiet; the coordinator ends
each round with one broadcast of the best value seen so far. The last round
has probability 1, so the result is always exact and only the message count
is random.

Randomness comes from :class:`RandomSource`, a counter-based generator: the
uniform draw for ``(stream, t, round, node)`` is a hash of the master seed
and that key, so results do not depend on the order nodes are visited in.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .transport import Fabric, MessageKind

_MASK = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_TO_UNIT = 1.0 / (1 << 53)


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer, elementwise on uint64 arrays (wraps mod 2**64)
    z = z + _GOLDEN
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def _mix_int(h: int, part: int) -> int:
    # same finalizer on Python ints, for the scalar key prefix
    z = ((h ^ (part & _MASK)) + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class RandomSource:
    """Seeded source of Bernoulli trials that are pure functions of a key."""

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK

    def _prefix(self, key: tuple[int, ...]) -> int:
        h = _mix_int(0, self.seed)
        for part in key:
            h = _mix_int(h, part)
        return h

    def uniforms(self, key: tuple[int, ...], nodes) -> np.ndarray:
        """Uniform draws in ``[0, 1)``, one per node, for a shared key prefix."""
        h = np.uint64(self._prefix(key))
        nodes = np.asarray(nodes, dtype=np.uint64)
        z = _mix(h ^ (nodes * _M1))
        return (z >> _S11).astype(np.float64) * _TO_UNIT

    def bernoulli(self, p: float, key: tuple[int, ...]) -> bool:
        """One coin flip for ``key``; the last key component plays the node role."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"probability {p} outside [0, 1]")
        *prefix, last = key
        return bool(self.uniforms(tuple(prefix), [last])[0] < p)


def bernoulli(p: float, rng: RandomSource, key: tuple[int, ...]) -> bool:
    return rng.bernoulli(p, key)


class Mode(enum.Enum):
    MAX = "max"
    MIN = "min"


def num_rounds(N: int) -> int:
    """``ceil(log2 N) + 1``."""
    if N < 1:
        raise ValueError("N must be at least 1")
    return (N - 1).bit_length() + 1


@dataclass(frozen=True)
class ProtocolOutcome:
    winner: int | None
    winner_value: int | None
    rounds: int
    uploads: int
    round_broadcasts: int
    senders: tuple[int, ...] = ()

    @property
    def empty(self) -> bool:
        return self.winner is None

    def per_node_sent(self, participants: Iterable[int]) -> dict[int, bool]:
        sent = set(self.senders)
        return {i: i in sent for i in participants}

    def sent(self, node: int) -> bool:
        return node in self.senders


EMPTY_OUTCOME = ProtocolOutcome(None, None, 0, 0, 0)


def run_extremum(
    participants: Mapping[int, int],
    N: int,
    rng: RandomSource,
    fabric: Fabric | None = None,
    *,
    mode: Mode = Mode.MAX,
    key: tuple[int, ...] = (0, 0),
    silent_rounds: bool = False,
) -> ProtocolOutcome:
    """Find the highest (``MAX``) or lowest (``MIN``) ranked participant.

    ``participants`` maps node id to value. ``N`` is the announced upper bound
    on the participant count and fixes the probability schedule. ``key`` is
    the randomness prefix, normally ``(stream, t)``, so that separate
    invocations at the same time step draw independent coins.

    Ranking follows :func:`topkmon.core.rank_compare`, so ``MIN`` returns the
    lowest value and, among equal values, the largest id.
    """
    if not participants:
        return EMPTY_OUTCOME
    if len(participants) > N:
        raise ValueError(f"{len(participants)} participants exceed bound N={N}")

    ids = np.fromiter(sorted(participants), dtype=np.int64, count=len(participants))
    vals = np.fromiter((participants[i] for i in ids), dtype=np.int64, count=len(ids))
    active = np.ones(len(ids), dtype=bool)
    sign = 1 if mode is Mode.MAX else -1
    best_id = best_val = None
    senders: list[int] = []
    broadcasts = 0
    rounds = num_rounds(N)

    for r in range(rounds):
        if best_id is not None:
            if sign > 0:
                beaten = (vals < best_val) | ((vals == best_val) & (ids > best_id))
            else:
                beaten = (vals > best_val) | ((vals == best_val) & (ids < best_id))
            active &= ~beaten
        p = min(2**r / N, 1.0)
        changed = False
        idx = np.flatnonzero(active)
        if len(idx):
            coins = rng.uniforms((*key, r), ids[idx]) < p
            sent_idx = idx[coins]
            for j in sent_idx:
                node, value = int(ids[j]), int(vals[j])
                senders.append(node)
                if fabric is not None:
                    fabric.record_upload(node, f"{mode.value} r={r} v={value}")
                if best_id is None or _beats(sign, value, node, best_val, best_id):
                    best_id, best_val = node, value
                    changed = True
            active[sent_idx] = False
        if silent_rounds and not changed:
            continue
        broadcasts += 1
        if fabric is not None:
            fabric.record_broadcast(
                MessageKind.ProtocolRoundBroadcast,
                f"{mode.value} r={r} best={'none' if best_id is None else best_val}",
            )

    return ProtocolOutcome(
        winner=best_id,
        winner_value=best_val,
        rounds=rounds,
        uploads=len(senders),
        round_broadcasts=broadcasts,
        senders=tuple(senders),
    )


def _beats(sign, value, node, best_val, best_id) -> bool:
    if value != best_val:
        return (value > best_val) if sign > 0 else (value < best_val)
    return (node < best_id) if sign > 0 else (node > best_id)


def send_probability_bound(i: int, N: int) -> float:
    """Upper bound on the chance that the rank-``i`` participant sends.

    ``1/N + sum_{r=1}^{L} p_r * (1 - p_{r-1})**i`` with ``p_r = min(2**r/N, 1)``
    and ``L = ceil(log2 N)``, clamped to ``[0, 1]``.
    """
    if i < 1 or N < 1:
        raise ValueError("need i >= 1 and N >= 1")
    p = [min(2**r / N, 1.0) for r in range(num_rounds(N))]
    total = p[0] + sum(p[r] * (1.0 - p[r - 1]) ** i for r in range(1, len(p)))
    return min(max(total, 0.0), 1.0)


def upload_bound(N: int) -> float:
    """Expected-upload ceiling ``2*log2(N) + 1``."""
    return 2 * math.log2(N) + 1


def rank_order(participants: Mapping[int, int], mode: Mode = Mode.MAX) -> list[int]:
    """Participants ordered from rank 1 (the extremum) downwards."""
    order = sorted(participants, key=lambda i: (-participants[i], i))
    return order if mode is Mode.MAX else order[::-1]


def distinct_values(ids: Iterable[int], seed: int) -> dict[int, int]:
    """A seeded random assignment of the values ``1..len(ids)`` to ``ids``."""
    ids = list(ids)
    perm = np.random.default_rng(seed).permutation(len(ids)) + 1
    return {i: int(v) for i, v in zip(ids, perm)}
