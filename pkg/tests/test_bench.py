"""Synthetic data generation, metrics, and the replication harness."""

import numpy as np
import pytest

from ssvm.bench import (
    BenchmarkResult,
    Metrics,
    SimSpec,
    evaluate,
    generate,
    run_benchmark,
)
from ssvm.data import SolverConfig
from ssvm.engine import FitResult


def fit_from(beta_plus, beta0=0.0, eps=1e-6):
    beta_plus = np.asarray(beta_plus, dtype=float)
    return FitResult(beta0=beta0, beta_plus=beta_plus, lam=0.1, iterations=1,
                     converged=True, objective=0.0,
                     residual_history=np.zeros((0, 2)),
                     support=np.flatnonzero(np.abs(beta_plus) > eps))


# ---------------------------------------------------------------- spec

def test_simspec_validation():
    with pytest.raises(ValueError):
        SimSpec(n=10, p=5, active_set=(7,))
    with pytest.raises(ValueError):
        SimSpec(n=10, p=5, rho=1.0)


def test_beta_star_layout():
    spec = SimSpec(n=10, p=8, active_set=(1, 5), signal=2.0)
    b = spec.beta_star()
    assert b[1] == 2.0 and b[5] == 2.0
    assert np.count_nonzero(b) == 2


# ---------------------------------------------------------------- generator

def test_generate_shapes_and_determinism():
    spec = SimSpec(n=40, p=30, active_set=(3,), seed=5, n_test=25)
    tr1, te1, b1 = generate(spec)
    tr2, te2, b2 = generate(spec)
    assert tr1.X.shape == (40, 30) and te1.X.shape == (25, 30)
    assert np.array_equal(tr1.X, tr2.X)
    assert np.array_equal(te1.y, te2.y)
    assert np.array_equal(b1, b2)


def test_generate_independent_columns_at_rho_zero():
    spec = SimSpec(n=500, p=20, rho=0.0, active_set=(0,), seed=1)
    train, _, _ = generate(spec)
    corr = np.corrcoef(train.X, rowvar=False)
    off = corr[~np.eye(20, dtype=bool)]
    assert np.max(np.abs(off)) < 0.15


def test_generate_lag_one_correlation():
    spec = SimSpec(n=500, p=40, rho=0.4, active_set=(0,), seed=2)
    train, _, _ = generate(spec)
    lags = [
        np.corrcoef(train.X[:, j], train.X[:, j + 1])[0, 1] for j in range(39)
    ]
    assert abs(np.mean(lags) - 0.4) < 0.05


def test_generate_lag_k_decay():
    spec = SimSpec(n=2000, p=30, rho=0.4, active_set=(0,), seed=3)
    train, _, _ = generate(spec)
    for k in (1, 2, 3):
        lags = [
            np.corrcoef(train.X[:, j], train.X[:, j + k])[0, 1]
            for j in range(30 - k)
        ]
        assert abs(np.mean(lags) - 0.4 ** k) < 0.03


def test_generate_null_signal_balanced_labels():
    spec = SimSpec(n=2000, p=5, active_set=(0,), signal=0.0, seed=4)
    train, _, _ = generate(spec)
    assert abs(np.mean(train.y)) < 0.08


def test_generate_unit_marginal_variance():
    spec = SimSpec(n=2000, p=25, rho=0.4, active_set=(0,), seed=6)
    train, _, _ = generate(spec)
    stds = train.X.std(axis=0)
    assert np.all(np.abs(stds - 1.0) < 0.12)


# ---------------------------------------------------------------- metrics

def test_evaluate_perfect_recovery():
    spec = SimSpec(n=60, p=12, active_set=(2, 7), signal=1.5, seed=8)
    _, test, bstar = generate(spec)
    m = evaluate(fit_from(bstar), test, bstar, spec.active_set)
    assert m.signal == 2 and m.noise == 0
    assert m.aac == pytest.approx(1.0, abs=1e-12)


def test_evaluate_scaling_invariance():
    spec = SimSpec(n=60, p=12, active_set=(2, 7), signal=1.5, seed=9)
    _, test, bstar = generate(spec)
    m1 = evaluate(fit_from(bstar), test, bstar, spec.active_set)
    m2 = evaluate(fit_from(2.0 * bstar), test, bstar, spec.active_set)
    assert m2.aac == pytest.approx(1.0, abs=1e-12)
    assert m1.test_error == m2.test_error


def test_evaluate_set_arithmetic():
    spec = SimSpec(n=30, p=100, active_set=(50, 60, 70, 80), seed=10)
    _, test, bstar = generate(spec)
    beta = np.zeros(100)
    beta[50] = 1.0
    beta[77] = 1.0
    m = evaluate(fit_from(beta), test, bstar, spec.active_set)
    assert m.signal == 1 and m.noise == 1


def test_evaluate_zero_fit_gets_zero_aac():
    spec = SimSpec(n=30, p=10, active_set=(1,), seed=11)
    _, test, bstar = generate(spec)
    m = evaluate(fit_from(np.zeros(10)), test, bstar, spec.active_set)
    assert m.aac == 0.0


def test_metrics_array_order():
    m = Metrics(test_error=0.1, signal=3, noise=2, aac=0.9)
    assert m.as_array().tolist() == [0.1, 3.0, 2.0, 0.9]


# ---------------------------------------------------------------- harness

BENCH_SPEC = SimSpec(n=40, p=30, rho=0.4, active_set=(3, 11), signal=1.4,
                     seed=21)
BENCH_CFG = SolverConfig(phi=0.2, tol=1e-5, max_iter=4000, inner_sweeps=2)


def small_benchmark(methods=("l1-cd",), reps=2, threads=1):
    return run_benchmark(BENCH_SPEC, reps=reps, methods=methods,
                         cfg=BENCH_CFG, n_lambda=8, min_ratio=0.05,
                         threads=threads)


def test_run_benchmark_shapes_and_csv():
    res = small_benchmark()
    assert res.values["l1-cd"].shape == (2, 4)
    csv = res.to_csv()
    lines = csv.strip().split("\n")
    assert lines[0] == "method,metric,mean,stderr"
    assert len(lines) == 1 + 4 + 1  # four metrics plus the failure count
    assert res.failures == {"l1-cd": 0}


def test_run_benchmark_csv_identical_across_runs():
    a = small_benchmark().to_csv()
    b = small_benchmark().to_csv()
    assert a == b


def test_run_benchmark_csv_identical_across_threads():
    a = small_benchmark(threads=1).to_csv()
    b = small_benchmark(threads=4).to_csv()
    assert a == b


def test_run_benchmark_pairs_methods_on_same_draws():
    res = small_benchmark(methods=("l1-cd", "l1-prox"), reps=2)
    errs = res.values
    # same replication data: per-rep test errors should rarely differ much
    gap = np.abs(errs["l1-cd"][:, 0] - errs["l1-prox"][:, 0])
    assert np.max(gap) < 0.2


def test_run_benchmark_with_oracle_small():
    spec = SimSpec(n=20, p=8, active_set=(1, 4), signal=1.5, seed=33)
    res = run_benchmark(spec, reps=1, methods=("l1-cd", "l1-lp"),
                        cfg=BENCH_CFG, n_lambda=5, min_ratio=0.05)
    assert np.all(np.isfinite(res.values["l1-lp"]))


def test_run_benchmark_records_failures_as_nan(monkeypatch):
    import ssvm.bench as bench_mod
    from ssvm.lp import SimplexFailure

    def exploding_oracle(*args, **kwargs):
        raise SimplexFailure("pivot budget exhausted")

    monkeypatch.setattr(bench_mod, "oracle_fit", exploding_oracle)
    spec = SimSpec(n=20, p=8, active_set=(1,), signal=1.0, seed=34)
    res = run_benchmark(spec, reps=2, methods=("l1-cd", "l1-lp"),
                        cfg=BENCH_CFG, n_lambda=3, min_ratio=0.1)
    assert res.failures["l1-lp"] == 2
    assert res.failures["l1-cd"] == 0
    assert np.all(np.isnan(res.values["l1-lp"]))
    assert np.all(np.isfinite(res.values["l1-cd"]))
    assert "l1-lp,failures,2,0" in res.to_csv()


def test_benchmark_table_mentions_all_metrics():
    res = small_benchmark()
    table = res.table()
    for name in ("test_error", "signal", "noise", "aac"):
        assert name in table
