"""Traces: synthetic stream families and the long CSV format.

A trace is a ``T x n`` matrix of non-negative integers; row ``t - 1`` holds the
snapshot observed at time ``t`` and column ``i - 1`` belongs to node ``i``.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

DEFAULT_HIGH = 2**20


class TraceFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Trace:
    values: np.ndarray
    k: int | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError("trace must be a non-empty T x n matrix")
        if not np.issubdtype(v.dtype, np.integer):
            raise ValueError("trace values must be integers")
        if (v < 0).any():
            raise ValueError("trace values must be non-negative")
        object.__setattr__(self, "values", v.astype(np.int64))

    @property
    def T(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    def row(self, t: int) -> np.ndarray:
        return self.values[t - 1]

    def snapshot(self, t: int) -> dict[int, int]:
        return {i + 1: int(v) for i, v in enumerate(self.values[t - 1])}

    def snapshots(self):
        for t in range(1, self.T + 1):
            yield t, self.snapshot(t)

    def require_k(self, k: int | None = None) -> int:
        k = self.k if k is None else k
        if k is None:
            raise ValueError("k is not set on this trace")
        if not 1 <= k < self.n:
            raise ValueError(f"k={k} must lie in [1, n-1] for n={self.n}")
        return k

    def with_k(self, k: int) -> "Trace":
        return Trace(self.values, k)

    def slice(self, t1: int, t2: int) -> "Trace":
        return Trace(self.values[t1 - 1 : t2], self.k)

    def distinct(self) -> bool:
        s = np.sort(self.values, axis=1)
        return bool((np.diff(s, axis=1) != 0).all())

    def __eq__(self, other):
        if not isinstance(other, Trace):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.values, other.values)


class Family(enum.Enum):
    RANDOM_WALK = "random-walk"
    UNIFORM = "uniform"
    ADVERSARIAL_CROSSING = "adversarial-crossing"
    CONSTANT = "constant"


@dataclass(frozen=True)
class GeneratorSpec:
    family: Family
    n: int
    k: int
    T: int
    seed: int = 0
    low: int = 0
    high: int = DEFAULT_HIGH
    distinct: bool = True
    # random walk: largest per-step move
    step: int = 8192
    # adversarial crossing: steps per phase and gap between the bands
    period: int = 4
    amplitude: int = 1024

    def echo(self) -> dict:
        return {
            "family": self.family.value,
            "n": self.n,
            "k": self.k,
            "T": self.T,
            "seed": self.seed,
            "low": self.low,
            "high": self.high,
            "distinct": self.distinct,
            "step": self.step,
            "period": self.period,
            "amplitude": self.amplitude,
        }


def make_distinct(values: np.ndarray) -> np.ndarray:
    """Nudge tied values upward, row by row, until every row is distinct.

    Relative order (by value, then node id) is preserved and each value moves
    by less than ``n``.
    """
    values = np.asarray(values, dtype=np.int64)
    T, n = values.shape
    ids = np.broadcast_to(np.arange(n), (T, n))
    # ascending value, ties by descending id, so the smaller id ends up higher
    order = np.lexsort((-ids, values), axis=1)
    ranked = np.take_along_axis(values, order, axis=1)
    offsets = np.arange(n)
    ranked = np.maximum.accumulate(ranked - offsets, axis=1) + offsets
    out = np.empty_like(values)
    np.put_along_axis(out, order, ranked, axis=1)
    return out


def generate(spec: GeneratorSpec) -> Trace:
    n, k, T = spec.n, spec.k, spec.T
    if n < 2 or not 1 <= k < n or T < 1:
        raise ValueError(f"invalid dimensions n={n} k={k} T={T}")
    if spec.low < 0 or spec.high <= spec.low:
        raise ValueError("need 0 <= low < high")
    if spec.distinct and spec.high - spec.low + 1 < n:
        raise ValueError("value range too small for distinct values")
    rng = np.random.default_rng(spec.seed)
    lo, hi = spec.low, spec.high

    if spec.family is Family.CONSTANT:
        if spec.distinct:
            row = rng.choice(hi - lo + 1, size=n, replace=False) + lo
        else:
            row = rng.integers(lo, hi + 1, size=n)
        values = np.tile(row, (T, 1))
    elif spec.family is Family.UNIFORM:
        values = rng.integers(lo, hi + 1, size=(T, n))
    elif spec.family is Family.RANDOM_WALK:
        start = rng.integers(lo, hi + 1, size=n)
        moves = rng.integers(-spec.step, spec.step + 1, size=(T, n))
        moves[0] = 0
        values = np.empty((T, n), dtype=np.int64)
        cur = start.astype(np.int64)
        for t in range(T):
            cur = _reflect(cur + moves[t], lo, hi)
            values[t] = cur
    elif spec.family is Family.ADVERSARIAL_CROSSING:
        values = _crossing(spec, rng)
    else:  # pragma: no cover
        raise ValueError(spec.family)

    if spec.distinct:
        values = make_distinct(values)
    return Trace(values, k)


def _reflect(x: np.ndarray, lo: int, hi: int) -> np.ndarray:
    x = np.where(x < lo, 2 * lo - x, x)
    x = np.where(x > hi, 2 * hi - x, x)
    return np.clip(x, lo, hi)


def _crossing(spec: GeneratorSpec, rng) -> np.ndarray:
    """``k + 1`` contenders take turns dropping out of the top-k band.

    In phase ``p`` (``period`` steps long) contender ``p mod (k + 1)`` sits
    just above the static nodes while the others sit ``amplitude`` higher, so
    the top-k set changes at every phase boundary.
    """
    n, k, T = spec.n, spec.k, spec.T
    lo, hi = spec.low, spec.high
    contenders = rng.permutation(n)[: k + 1]
    others = np.setdiff1d(np.arange(n), contenders)
    base = lo + (hi - lo) // 2
    band = base + spec.amplitude
    if band + k > hi or base - lo < len(others):
        raise ValueError("value range too small for this amplitude")
    values = np.empty((T, n), dtype=np.int64)
    if len(others):
        static = rng.choice(base - lo, size=len(others), replace=False) + lo
        values[:, others] = static
    for t in range(T):
        out = (t // spec.period) % (k + 1)
        for j, node in enumerate(contenders):
            values[t, node] = (base if j == out else band) + j
    return values


def save_csv(trace: Trace, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "node", "value"])
        for t in range(1, trace.T + 1):
            for i, v in enumerate(trace.row(t), start=1):
                w.writerow([t, i, int(v)])


def load_csv(path, k: int | None = None) -> Trace:
    rows: dict[int, dict[int, int]] = {}
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "node", "value"]:
            raise TraceFormatError("expected header t,node,value")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 3:
                raise TraceFormatError(f"line {lineno}: expected 3 fields, got {len(rec)}")
            try:
                t, node, value = (int(x) for x in rec)
            except ValueError:
                raise TraceFormatError(f"line {lineno}: non-integer field") from None
            if t < 1 or node < 1 or value < 0:
                raise TraceFormatError(f"line {lineno}: values out of range")
            snap = rows.setdefault(t, {})
            if node in snap:
                raise TraceFormatError(f"line {lineno}: duplicate (t={t}, node={node})")
            snap[node] = value
    if not rows:
        raise TraceFormatError("no observations")
    times = sorted(rows)
    if times != list(range(1, len(times) + 1)):
        missing = sorted(set(range(1, times[-1] + 1)) - set(times))
        raise TraceFormatError(f"time steps not contiguous from 1; missing {missing[:5]}")
    n = max(max(s) for s in rows.values())
    values = np.zeros((len(times), n), dtype=np.int64)
    for t in times:
        snap = rows[t]
        if len(snap) != n:
            gone = sorted(set(range(1, n + 1)) - snap.keys())
            raise TraceFormatError(f"t={t}: missing node(s) {gone[:5]}")
        for node, value in snap.items():
            values[t - 1, node - 1] = value
    return Trace(values, k)
