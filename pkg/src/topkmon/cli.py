"""Command line: ``topkmon {simulate,protocol-bench,oracle,gen}``.

Only explicit flags are consulted. Reports are JSON with sorted keys and no
timestamps, so identical flags give byte-identical output.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import harness, oracle
from .streams import Family, GeneratorSpec, generate, load_csv, save_csv


def _add_trace_args(p, with_trace=True):
    if with_trace:
        p.add_argument("--trace", type=Path, help="CSV trace (t,node,value); overrides --family")
    p.add_argument("--family", choices=[f.value for f in Family], default=Family.RANDOM_WALK.value)
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--t", type=int, default=1000, help="number of time steps")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--low", type=int, default=0)
    p.add_argument("--high", type=int, default=2**20)
    p.add_argument("--step", type=int, default=8192, help="random-walk step size")
    p.add_argument("--period", type=int, default=4, help="adversarial-crossing phase length")
    p.add_argument("--amplitude", type=int, default=1024, help="adversarial-crossing band gap")
    p.add_argument("--allow-ties", action="store_true", help="do not force distinct values")


def _spec(args) -> GeneratorSpec:
    return GeneratorSpec(
        family=Family(args.family),
        n=args.n,
        k=args.k,
        T=args.t,
        seed=args.seed,
        low=args.low,
        high=args.high,
        distinct=not args.allow_ties,
        step=args.step,
        period=args.period,
        amplitude=args.amplitude,
    )


def _trace(args):
    if getattr(args, "trace", None):
        return load_csv(args.trace, args.k), {"trace": str(args.trace)}
    spec = _spec(args)
    return generate(spec), {"generator": spec.echo()}


def _emit(text: str, path: Path | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text, encoding="utf-8")


def cmd_simulate(args) -> int:
    trace, source = _trace(args)
    result = harness.simulate(
        trace, args.k, args.seed, silent_rounds=args.silent_rounds, config=source
    )
    _emit(result.to_json(per_step=args.per_step), args.report)
    if args.per_step and args.report is not None:
        sidecar = args.report.with_suffix(".steps.csv")
        with open(sidecar, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "violations", "handler", "reset", "messages", "boundary", "answer"])
            for s in result.steps:
                w.writerow([
                    s.t, len(s.violations), int(s.handler_invoked), int(s.reset_invoked),
                    s.tally_delta.total, s.boundary, " ".join(map(str, s.answer)),
                ])
    if args.event_log is not None:
        args.event_log.write_text(result.event_log, encoding="utf-8")
    if result.failure is not None:
        bundle = json.dumps(result.failure, sort_keys=True) + "\n"
        if args.report is not None:
            args.report.with_suffix(".repro.json").write_text(bundle, encoding="utf-8")
        sys.stderr.write(f"oracle mismatch at t={result.failure['t']}\n")
    return 0 if result.ok else 1


def cmd_protocol_bench(args) -> int:
    stats = harness.protocol_bench(
        args.n, args.trials, args.mode, args.seed,
        participants=args.participants, silent_rounds=args.silent_rounds,
    )
    _emit(json.dumps(stats.as_dict(), indent=2, sort_keys=True) + "\n", args.report)
    return 0 if stats.all_correct else 1


def cmd_oracle(args) -> int:
    trace, source = _trace(args)
    k = trace.require_k(args.k)
    part = oracle.opt_lower_bound(trace, k)
    record = {
        "source": source,
        "n": trace.n,
        "k": k,
        "T": trace.T,
        "delta": oracle.compute_delta(trace, k),
        "opt_lower_bound": part.lower_bound,
        "intervals": [list(iv) for iv in part.intervals],
    }
    _emit(json.dumps(record, indent=2, sort_keys=True) + "\n", args.report)
    return 0


def cmd_gen(args) -> int:
    save_csv(generate(_spec(args)), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="topkmon", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="monitor a trace and check it against the oracle")
    _add_trace_args(p)
    p.add_argument("--report", type=Path)
    p.add_argument("--per-step", action="store_true", help="include per-step records")
    p.add_argument("--event-log", type=Path)
    p.add_argument("--silent-rounds", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("protocol-bench", help="repeat the extremum protocol")
    p.add_argument("--n", type=int, default=1024, help="participant bound N")
    p.add_argument("--participants", type=int, help="participant count (default N)")
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--mode", choices=["max", "min"], default="max")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", type=Path)
    p.add_argument("--silent-rounds", action="store_true")
    p.set_defaults(func=cmd_protocol_bench)

    p = sub.add_parser("oracle", help="offline lower bound and delta for a trace")
    _add_trace_args(p)
    p.add_argument("--report", type=Path)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("gen", help="write a synthetic trace as CSV")
    _add_trace_args(p, with_trace=False)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
