import dataclasses
import json

import numpy as np

from topkmon import monitor
from topkmon.cli import main
from topkmon.streams import Trace, save_csv


def test_simulate_is_byte_identical(tmp_path):
    outputs = []
    for run in ("a", "b"):
        report, log = tmp_path / f"{run}.json", tmp_path / f"{run}.log"
        argv = ["simulate", "--family", "uniform", "--n", "8", "--k", "2", "--t", "120",
                "--seed", "17", "--report", str(report), "--event-log", str(log), "--per-step"]
        assert main(argv) == 0
        outputs.append((report.read_bytes(), log.read_bytes(), report.with_suffix(".steps.csv").read_bytes()))
    assert outputs[0] == outputs[1]
    doc = json.loads(outputs[0][0])
    assert doc["correctness_checked"] and doc["filters_valid"]
    assert doc["tally"]["total"] == len(outputs[0][1].splitlines())
    assert doc["empirical_ratio"] <= doc["envelope"]
    assert len(doc["per_step"]) == 120


def test_simulate_constant_costs_only_initialization(tmp_path):
    report = tmp_path / "c.json"
    assert main(["simulate", "--family", "constant", "--n", "16", "--k", "4", "--t", "300", "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["tally"]["total"] == doc["init_messages"] > 0
    assert doc["opt_lower_bound"] == 1


def test_simulate_from_csv(tmp_path):
    csv_path = tmp_path / "ex.csv"
    save_csv(Trace(np.array([[10, 5, 1], [10, 5, 1], [4, 8, 1], [4, 8, 1]])), csv_path)
    report = tmp_path / "r.json"
    assert main(["simulate", "--trace", str(csv_path), "--k", "1", "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["config"]["trace"] == str(csv_path)
    assert doc["opt_lower_bound"] == 2 and doc["delta"] == 5


def test_oracle_on_example(tmp_path, capsys):
    csv_path = tmp_path / "ex.csv"
    save_csv(Trace(np.array([[10, 5, 1], [10, 5, 1], [4, 8, 1], [4, 8, 1]])), csv_path)
    assert main(["oracle", "--trace", str(csv_path), "--k", "1"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["opt_lower_bound"] == 2 and doc["intervals"] == [[1, 2], [3, 4]] and doc["delta"] == 5


def test_oracle_constant(capsys):
    assert main(["oracle", "--family", "constant", "--n", "5", "--k", "2", "--t", "40"]) == 0
    assert json.loads(capsys.readouterr().out)["opt_lower_bound"] == 1


def test_gen_then_oracle(tmp_path, capsys):
    out = tmp_path / "g.csv"
    assert main(["gen", "--family", "adversarial-crossing", "--n", "6", "--k", "2", "--t", "30", "--period", "1", "--out", str(out)]) == 0
    assert main(["oracle", "--trace", str(out), "--k", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["opt_lower_bound"] == 30


def test_protocol_bench_single_node(capsys):
    assert main(["protocol-bench", "--n", "1", "--trials", "50"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["mean_uploads"] == 1.0 and doc["all_correct"]


def test_protocol_bench_report(tmp_path):
    report = tmp_path / "b.json"
    assert main(["protocol-bench", "--n", "64", "--trials", "300", "--mode", "min", "--seed", "2", "--report", str(report)]) == 0
    doc = json.loads(report.read_text())
    assert doc["mode"] == "min" and len(doc["per_rank"]) == 64
    assert doc["upload_bound"] == 13.0


def test_mismatch_fails_with_repro_bundle(tmp_path, monkeypatch):
    real_step = monitor.step

    def broken(state, values, rng, fabric):
        state, report = real_step(state, values, rng, fabric)
        if report.t == 5:
            report = dataclasses.replace(report, answer=(99,))
        return state, report

    monkeypatch.setattr(monitor, "step", broken)
    report = tmp_path / "bad.json"
    code = main(["simulate", "--family", "uniform", "--n", "6", "--k", "2", "--t", "20", "--seed", "4", "--report", str(report)])
    assert code == 1
    bundle = json.loads(report.with_suffix(".repro.json").read_text())
    assert bundle["t"] == 5 and bundle["seed"] == 4 and len(bundle["trace_rows"]) == 5
    assert json.loads(report.read_text())["correctness_checked"] is False


def test_bad_arguments_exit_nonzero(capsys):
    assert main(["simulate", "--family", "uniform", "--n", "4", "--k", "4", "--t", "5"]) == 2
    assert "error" in capsys.readouterr().err
