"""End-to-end command-line behavior through ssvm.cli.main."""

import json
import math
import os

import numpy as np
import pytest

from ssvm.cli import main


def run_cli(args):
    return main(list(args))


def write_symmetric_csv(path):
    path.write_text("y,x1\n1,1.0\n-1,-1.0\n")


def simulate_small(tmp_path, seed=3, n=40, p=12):
    out = tmp_path / "sim"
    out.mkdir(parents=True)
    code = run_cli([
        "simulate", "--n", str(n), "--p", str(p), "--active", "2,7",
        "--signal", "1.4", "--seed", str(seed), "--out", str(out),
    ])
    assert code == 0
    return out


# ---------------------------------------------------------------- simulate

def test_simulate_writes_three_files(tmp_path):
    out = simulate_small(tmp_path)
    assert (out / "train.csv").exists()
    assert (out / "test.csv").exists()
    truth = json.loads((out / "truth.json").read_text())
    coef = dict((int(k), v) for k, v in truth["beta_star"])
    assert coef == {2: 1.4, 7: 1.4}


def test_simulate_deterministic(tmp_path):
    a = simulate_small(tmp_path / "a")
    b = simulate_small(tmp_path / "b")
    assert (a / "train.csv").read_bytes() == (b / "train.csv").read_bytes()
    assert (a / "test.csv").read_bytes() == (b / "test.csv").read_bytes()


def test_simulate_rejects_active_out_of_range(tmp_path, capsys):
    code = run_cli(["simulate", "--n", "10", "--p", "5", "--active", "99999",
                    "--out", str(tmp_path)])
    assert code == 1


def test_simulate_header_matches_loader(tmp_path):
    out = simulate_small(tmp_path)
    header = (out / "train.csv").read_text().splitlines()[0]
    assert header.split(",")[:2] == ["y", "x1"]


# ---------------------------------------------------------------- fit

def test_fit_analytic_instance(tmp_path, capsys):
    data = tmp_path / "toy.csv"
    write_symmetric_csv(data)
    model = tmp_path / "model.json"
    code = run_cli(["fit", "--data", str(data), "--lambda", "0.5",
                    "--tol", "1e-9", "--max-iter", "100000",
                    "--out", str(model)])
    assert code == 0
    doc = json.loads(model.read_text())
    assert doc["objective"] == pytest.approx(0.5, abs=1e-4)
    printed = capsys.readouterr().out
    assert "objective=" in printed and "support=" in printed


def test_fit_variants_agree(tmp_path):
    out = simulate_small(tmp_path)
    results = {}
    for variant in ("cd", "prox"):
        model = tmp_path / ("m_%s.json" % variant)
        code = run_cli(["fit", "--data", str(out / "train.csv"),
                        "--lambda", "0.05", "--variant", variant,
                        "--tol", "1e-8", "--max-iter", "200000",
                        "--out", str(model)])
        assert code == 0
        results[variant] = json.loads(model.read_text())["objective"]
    assert results["cd"] == pytest.approx(results["prox"], rel=1e-5)


def test_fit_blocks_agree(tmp_path):
    out = simulate_small(tmp_path)
    coefs = {}
    for blocks in ("1", "4"):
        model = tmp_path / ("m_%s.json" % blocks)
        code = run_cli(["fit", "--data", str(out / "train.csv"),
                        "--lambda", "0.05", "--blocks", blocks,
                        "--tol", "1e-8", "--max-iter", "200000",
                        "--out", str(model)])
        assert code == 0
        doc = json.loads(model.read_text())
        beta = np.zeros(12)
        for j, v in doc["coef"]:
            beta[j] = v
        coefs[blocks] = beta
    assert np.max(np.abs(coefs["1"] - coefs["4"])) < 1e-4


def test_fit_scad_penalty_runs(tmp_path):
    out = simulate_small(tmp_path)
    model = tmp_path / "scad.json"
    code = run_cli(["fit", "--data", str(out / "train.csv"),
                    "--lambda", "0.05", "--penalty", "scad",
                    "--out", str(model)])
    assert code == 0
    assert json.loads(model.read_text())["converged"]


def test_fit_missing_file_is_data_error(tmp_path):
    code = run_cli(["fit", "--data", str(tmp_path / "nope.csv"),
                    "--lambda", "0.1"])
    assert code == 2


def test_fit_bad_flag_is_usage_error(tmp_path):
    data = tmp_path / "toy.csv"
    write_symmetric_csv(data)
    code = run_cli(["fit", "--data", str(data), "--lambda", "0.1",
                    "--variant", "nope"])
    assert code == 1


def test_fit_malformed_csv_is_data_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("y,x1\n1,abc\n")
    code = run_cli(["fit", "--data", str(bad), "--lambda", "0.1"])
    assert code == 2


# ---------------------------------------------------------------- path

def test_path_svmic_jsonl(tmp_path):
    out = simulate_small(tmp_path)
    dest = tmp_path / "path.jsonl"
    code = run_cli(["path", "--data", str(out / "train.csv"),
                    "--n-lambda", "6", "--min-ratio", "0.05",
                    "--select", "svmic", "--out", str(dest)])
    assert code == 0
    lines = dest.read_text().strip().split("\n")
    assert len(lines) == 7
    summary = json.loads(lines[-1])
    assert summary["rule"] == "svmic"
    lambdas = [json.loads(l)["lambda"] for l in lines[:-1]]
    assert lambdas == sorted(lambdas, reverse=True)


def test_path_summary_selects_a_grid_lambda(tmp_path):
    out = simulate_small(tmp_path)
    dest = tmp_path / "path.jsonl"
    code = run_cli(["path", "--data", str(out / "train.csv"),
                    "--n-lambda", "2", "--min-ratio", "0.999999",
                    "--select", "svmic", "--out", str(dest)])
    assert code == 0
    lines = dest.read_text().strip().split("\n")
    summary = json.loads(lines[-1])
    grid = [json.loads(l)["lambda"] for l in lines[:-1]]
    assert summary["selected_lambda"] in grid


def test_path_cv_on_separable_toy(tmp_path):
    rng = np.random.default_rng(0)
    x = np.concatenate([rng.uniform(1.0, 2.0, 15), rng.uniform(-2.0, -1.0, 15)])
    y = np.sign(x)
    data = tmp_path / "sep.csv"
    rows = ["y,x1"] + ["%d,%r" % (int(yi), float(xi)) for yi, xi in zip(y, x)]
    data.write_text("\n".join(rows) + "\n")
    dest = tmp_path / "path.jsonl"
    code = run_cli(["path", "--data", str(data), "--select", "cv",
                    "--folds", "5", "--n-lambda", "4", "--min-ratio", "0.05",
                    "--out", str(dest)])
    assert code == 0
    summary = json.loads(dest.read_text().strip().split("\n")[-1])
    assert summary["rule"] == "cv"
    assert summary["score"] == pytest.approx(0.0, abs=1e-12)


# ---------------------------------------------------------------- benchmark

def test_benchmark_csv_and_table(tmp_path, capsys):
    dest = tmp_path / "results.csv"
    code = run_cli(["benchmark", "--n", "30", "--p", "12", "--active", "2,7",
                    "--signal", "1.4", "--reps", "2", "--methods", "l1-cd",
                    "--n-lambda", "5", "--min-ratio", "0.05",
                    "--phi", "0.2", "--tol", "1e-5", "--max-iter", "2000",
                    "--out", str(dest)])
    assert code == 0
    text = dest.read_text()
    assert text.startswith("method,metric,mean,stderr\n")
    assert "l1-cd,test_error," in text
    assert "test_error" in capsys.readouterr().out


def test_benchmark_deterministic_across_runs_and_threads(tmp_path):
    args = ["benchmark", "--n", "30", "--p", "12", "--active", "2,7",
            "--signal", "1.4", "--reps", "2", "--methods", "l1-cd",
            "--n-lambda", "5", "--min-ratio", "0.05",
            "--phi", "0.2", "--tol", "1e-5", "--max-iter", "2000"]
    outs = []
    for i, threads in enumerate(("1", "1", "4")):
        dest = tmp_path / ("r%d.csv" % i)
        code = run_cli(args + ["--threads", threads, "--out", str(dest)])
        assert code == 0
        outs.append(dest.read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_benchmark_with_oracle_appends_lp(tmp_path):
    dest = tmp_path / "results.csv"
    code = run_cli(["benchmark", "--n", "20", "--p", "8", "--active", "1,4",
                    "--signal", "1.5", "--reps", "1", "--methods", "l1-cd",
                    "--with-oracle", "--n-lambda", "4", "--min-ratio", "0.1",
                    "--phi", "0.2", "--tol", "1e-5", "--max-iter", "2000",
                    "--out", str(dest)])
    assert code == 0
    assert "l1-lp,test_error," in dest.read_text()


# ---------------------------------------------------------------- convergence

def test_convergence_csv_consistency(tmp_path):
    out = simulate_small(tmp_path)
    conv = tmp_path / "conv.csv"
    model = tmp_path / "model.json"
    code = run_cli(["convergence", "--data", str(out / "train.csv"),
                    "--lambda", "0.05", "--interval", "5",
                    "--tol", "1e-7", "--max-iter", "50000",
                    "--out", str(conv)])
    assert code == 0
    code = run_cli(["fit", "--data", str(out / "train.csv"),
                    "--lambda", "0.05", "--tol", "1e-7",
                    "--max-iter", "50000", "--out", str(model)])
    assert code == 0
    lines = conv.read_text().strip().split("\n")
    assert lines[0] == "iteration,primal,dual,objective,dist"
    rows = [l.split(",") for l in lines[1:]]
    # stop rule: final primal at or below tol
    assert float(rows[-1][1]) <= 1e-7
    # final objective equals the model fit's objective
    model_obj = json.loads(model.read_text())["objective"]
    assert float(rows[-1][3]) == pytest.approx(model_obj, rel=1e-9)
    # dist recorded only at snapshot iterations, non-empty, positive
    dists = [(int(r[0]), float(r[4])) for r in rows if r[4] != ""]
    assert dists
    assert all(it % 5 == 0 for it, _ in dists)


def test_convergence_dist_tail_nonincreasing(tmp_path):
    out = simulate_small(tmp_path, n=50, p=24)
    conv = tmp_path / "conv.csv"
    code = run_cli(["convergence", "--data", str(out / "train.csv"),
                    "--lambda", "0.08", "--interval", "10",
                    "--tol", "1e-9", "--max-iter", "100000",
                    "--out", str(conv)])
    assert code == 0
    lines = conv.read_text().strip().split("\n")[1:]
    dists = [float(l.split(",")[4]) for l in lines if l.split(",")[4] != ""]
    tail = dists[-20:]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(tail, tail[1:]))


# ---------------------------------------------------------------- plumbing

def test_unknown_command_is_usage_error():
    assert run_cli(["frobnicate"]) == 1


def test_no_command_is_usage_error():
    assert run_cli([]) == 1


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("SSVM_THREADS", "2")
    out = simulate_small(tmp_path)
    model = tmp_path / "m.json"
    code = run_cli(["fit", "--data", str(out / "train.csv"),
                    "--lambda", "0.1", "--blocks", "2", "--out", str(model)])
    assert code == 0
