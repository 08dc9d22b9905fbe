"""End-to-end experiments: monitored runs checked against the oracle, and
repeated extremum-protocol trials.

Both entry points return plain records whose ``as_dict`` output is what the
command line writes as JSON. Nothing here reads the clock or the environment,
so a record is a pure function of its inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import monitor, oracle
from .core import is_top_k_set, validate_filter_set
from .protocols import (
    Mode,
    RandomSource,
    run_extremum,
    send_probability_bound,
    upload_bound,
)
from .streams import Trace
from .transport import Fabric, MessageTally

ENVELOPE_SLACK = 8


def handler_bound(delta: int) -> float:
    """Allowed handler calls between two resets: ``2*log2(delta) + 2``."""
    return 2 * math.log2(max(delta, 1)) + 2


@dataclass
class RunResult:
    config: dict
    tally: MessageTally
    init_messages: int
    opt: oracle.OptPartition
    delta: int
    steps: list[monitor.StepReport]
    handler_segments: list[int]
    correctness_checked: bool
    filters_valid: bool
    failure: dict | None = None
    event_log: str = ""
    resets: int = 0
    handlers: int = 0

    @property
    def ok(self) -> bool:
        return self.failure is None and self.correctness_checked and self.filters_valid and self.handlers_within_bound

    @property
    def empirical_ratio(self) -> Fraction:
        return Fraction(self.tally.total, max(self.opt.lower_bound, 1))

    @property
    def envelope(self) -> float:
        n, k = self.config["n"], self.config["k"]
        return oracle.competitive_envelope(max(self.delta, 1), k, n, self.opt.lower_bound)

    @property
    def max_handlers_per_segment(self) -> int:
        return max(self.handler_segments, default=0)

    @property
    def handlers_within_bound(self) -> bool:
        return self.max_handlers_per_segment <= handler_bound(self.delta)

    @property
    def within_envelope(self) -> bool:
        return self.tally.total <= ENVELOPE_SLACK * self.envelope

    def as_dict(self, per_step: bool = False) -> dict:
        ratio = self.empirical_ratio
        out = {
            "config": self.config,
            "tally": self.tally.as_dict(),
            "init_messages": self.init_messages,
            "opt_lower_bound": self.opt.lower_bound,
            "opt_intervals": [list(iv) for iv in self.opt.intervals],
            "delta": self.delta,
            "empirical_ratio": float(ratio),
            "empirical_ratio_exact": f"{ratio.numerator}/{ratio.denominator}",
            "envelope": self.envelope,
            "envelope_slack": ENVELOPE_SLACK,
            "envelope_ratio": self.tally.total / self.envelope,
            "within_envelope": self.within_envelope,
            "resets": self.resets,
            "handler_invocations": self.handlers,
            "max_handlers_between_resets": self.max_handlers_per_segment,
            "handler_bound": handler_bound(self.delta),
            "handlers_within_bound": self.handlers_within_bound,
            "filters_valid": self.filters_valid,
            "correctness_checked": self.correctness_checked,
            "failure": self.failure,
        }
        if per_step:
            out["per_step"] = [s.summary() for s in self.steps]
        return out

    def to_json(self, per_step: bool = False) -> str:
        return json.dumps(self.as_dict(per_step), indent=2, sort_keys=True) + "\n"


def _answer_ok(answer, values, expected) -> bool:
    if len(set(values.values())) == len(values):
        return set(answer) == set(expected)
    # tied values: any set holding k of the k largest values is acceptable
    return len(set(answer)) == len(expected) and is_top_k_set(answer, values)


def simulate(
    trace: Trace,
    k: int | None = None,
    seed: int = 0,
    *,
    silent_rounds: bool = False,
    keep_log: bool = True,
    config: dict | None = None,
) -> RunResult:
    """Monitor ``trace`` from its first row and check every step.

    The first snapshot initializes the filters; each later one is a monitored
    step. After every step the coordinator's answer is compared with the
    brute-force top-k and the filter set is validated. A wrong answer stops
    the run and records a reproduction bundle in ``failure``.
    """
    k = trace.require_k(k)
    rng = RandomSource(seed)
    fabric = Fabric(keep_log=keep_log)
    cfg = {"n": trace.n, "k": k, "T": trace.T, "seed": seed, "silent_rounds": silent_rounds}
    cfg.update(config or {})

    first = trace.snapshot(1)
    state = monitor.initialize(first, k, rng, fabric, t=1, silent_rounds=silent_rounds)
    init_messages = fabric.tally_snapshot().total
    init_report = monitor.StepReport(
        t=1, handler_invoked=False, reset_invoked=True,
        tally_delta=fabric.tally_snapshot(), answer=state.top_k, boundary=state.boundary,
    )
    steps = [init_report]
    filters_valid = not validate_filter_set(state.filters, first, k, top=state.top_k)
    failure = None
    segments = [0]
    resets = handlers = 0

    if not _answer_ok(state.top_k, first, oracle.brute_force_top_k(trace, 1, k)):
        failure = _repro(trace, k, seed, 1, state.top_k)

    for t in range(2, trace.T + 1):
        if failure is not None:
            break
        values = trace.snapshot(t)
        state, report = monitor.step(state, values, rng, fabric)
        steps.append(report)
        if report.handler_invoked:
            handlers += 1
            segments[-1] += 1
        if report.reset_invoked:
            resets += 1
            segments.append(0)
        if validate_filter_set(state.filters, values, k, top=state.top_k):
            filters_valid = False
        if not _answer_ok(report.answer, values, oracle.brute_force_top_k(trace, t, k)):
            failure = _repro(trace, k, seed, t, report.answer)

    return RunResult(
        config=cfg,
        tally=fabric.tally_snapshot(),
        init_messages=init_messages,
        opt=oracle.opt_lower_bound(trace, k),
        delta=oracle.compute_delta(trace, k),
        steps=steps,
        handler_segments=segments,
        correctness_checked=failure is None,
        filters_valid=filters_valid,
        failure=failure,
        event_log=fabric.event_log_text(),
        resets=resets,
        handlers=handlers,
    )


def _repro(trace, k, seed, t, answer) -> dict:
    return {
        "t": t,
        "k": k,
        "seed": seed,
        "answer": sorted(answer),
        "expected": sorted(oracle.brute_force_top_k(trace, t, k)),
        "trace_rows": trace.values[:t].tolist(),
    }


@dataclass
class BenchStats:
    N: int
    trials: int
    mode: str
    seed: int
    participants: int
    uploads: np.ndarray = field(repr=False)
    broadcasts: np.ndarray = field(repr=False)
    rank_sends: np.ndarray = field(repr=False)
    all_correct: bool = True

    @property
    def mean_uploads(self) -> float:
        return float(self.uploads.mean())

    @property
    def std_uploads(self) -> float:
        return float(self.uploads.std(ddof=1)) if self.trials > 1 else 0.0

    @property
    def stderr_uploads(self) -> float:
        return self.std_uploads / math.sqrt(self.trials)

    @property
    def bound(self) -> float:
        return upload_bound(self.N)

    def tail_fraction(self, factor: float = 8.0) -> float:
        return float((self.uploads > factor * math.log2(self.N)).mean()) if self.N > 1 else 0.0

    def rank_frequency(self, i: int) -> float:
        return float(self.rank_sends[i - 1] / self.trials)

    def rank_sigma(self, i: int) -> float:
        p = self.rank_frequency(i)
        return math.sqrt(p * (1 - p) / self.trials)

    def as_dict(self) -> dict:
        ranks = []
        for i in range(1, self.participants + 1):
            ranks.append(
                {
                    "rank": i,
                    "frequency": self.rank_frequency(i),
                    "sigma": self.rank_sigma(i),
                    "bound": send_probability_bound(i, self.N),
                }
            )
        return {
            "N": self.N,
            "trials": self.trials,
            "mode": self.mode,
            "seed": self.seed,
            "participants": self.participants,
            "mean_uploads": self.mean_uploads,
            "std_uploads": self.std_uploads,
            "stderr_uploads": self.stderr_uploads,
            "max_uploads": int(self.uploads.max()),
            "mean_broadcasts": float(self.broadcasts.mean()),
            "max_broadcasts": int(self.broadcasts.max()),
            "upload_bound": self.bound,
            "mean_within_bound": self.mean_uploads <= self.bound + 3 * self.stderr_uploads,
            "tail_fraction_over_8log2N": self.tail_fraction(),
            "all_correct": self.all_correct,
            "per_rank": ranks,
        }


def protocol_bench(
    N: int,
    trials: int,
    mode: Mode | str = Mode.MAX,
    seed: int = 0,
    *,
    participants: int | None = None,
    silent_rounds: bool = False,
) -> BenchStats:
    """Repeat the extremum protocol on freshly shuffled distinct values.

    Every trial assigns the values ``1..m`` (``m = participants or N``) to
    nodes ``1..m`` in a random order, runs the protocol with bound ``N`` and
    checks the result against a linear scan.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    mode = Mode(mode)
    m = N if participants is None else participants
    shuffle = np.random.default_rng(seed)
    coins = RandomSource(seed)
    ids = list(range(1, m + 1))
    uploads = np.zeros(trials, dtype=np.int64)
    broadcasts = np.zeros(trials, dtype=np.int64)
    rank_sends = np.zeros(m, dtype=np.int64)
    all_correct = True
    for trial in range(trials):
        perm = shuffle.permutation(m) + 1
        values = dict(zip(ids, perm.tolist()))
        out = run_extremum(values, N, coins, None, mode=mode, key=(trial, 0), silent_rounds=silent_rounds)
        scan = max(values.values()) if mode is Mode.MAX else min(values.values())
        all_correct &= out.winner_value == scan
        uploads[trial] = out.uploads
        broadcasts[trial] = out.round_broadcasts
        # rank of value v is m + 1 - v for MAX, v for MIN
        for node in out.senders:
            v = values[node]
            rank_sends[(m - v) if mode is Mode.MAX else (v - 1)] += 1
    return BenchStats(N, trials, mode.value, seed, m, uploads, broadcasts, rank_sends, bool(all_correct))
