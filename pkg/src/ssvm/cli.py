"""Command-line interface.

Subcommands: ``simulate`` writes a synthetic dataset, ``fit`` solves one
penalty level, ``path`` fits a grid and selects a model, ``benchmark``
replays the replicated synthetic protocol, and ``convergence`` dumps
per-iteration diagnostics.  Exit codes: 0 success, 1 usage error, 2 data
error, 3 solver failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from .adaptive import TwoStepConfig, two_step_fit
from .bench import SimSpec, generate, run_benchmark
from .data import (
    DataError,
    PenaltyWeights,
    SolverConfig,
    build_signed_design,
    load_dataset,
    make_partition,
)
from .engine import (
    TrajectoryRecorder,
    block_etas,
    dist_monitor,
    fit_weighted_l1_svm,
)
from .parallel import default_threads
from .selection import cross_validate, fit_path, lambda_grid


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors by default; this tool reserves
    # 2 for data errors, so remap.
    def error(self, message):
        self.exit(1, "%s: error: %s\n" % (self.prog, message))


def _add_solver_flags(parser):
    parser.add_argument("--phi", type=float, default=1.0, help="augmented Lagrangian parameter")
    parser.add_argument("--theta", type=float, default=1.618, help="dual step length")
    parser.add_argument("--tol", type=float, default=1e-6, help="residual tolerance")
    parser.add_argument("--max-iter", type=int, default=20000)
    parser.add_argument("--variant", choices=("cd", "prox"), default="cd",
                        help="block update: coordinate descent or proximal step")
    parser.add_argument("--sweeps", type=int, default=10, help="coordinate sweeps per iteration")
    parser.add_argument("--inner-tol", type=float, default=1e-8)
    parser.add_argument("--blocks", type=int, default=1, help="feature blocks G")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: SSVM_THREADS or CPU count)")


def _add_data_flags(parser):
    parser.add_argument("--data", required=True, help="input file")
    parser.add_argument("--format", choices=("csv", "sparse"), default="csv")
    parser.add_argument("--n-features", type=int, default=None,
                        help="feature count for the sparse format")


def _add_penalty_flags(parser):
    parser.add_argument("--penalty", choices=("l1", "scad"), default="l1",
                        help="plain l1 or the two-step adaptive fit")
    parser.add_argument("--upsilon", type=float, default=1.0,
                        help="stage-one penalty scale for the two-step fit")
    parser.add_argument("--scad-a", type=float, default=3.7)


def _parse_active(text):
    if not text.strip():
        return ()
    return tuple(int(tok) for tok in text.split(","))


def _solver_config(args):
    return SolverConfig(
        phi=args.phi,
        theta=args.theta,
        tol=args.tol,
        max_iter=args.max_iter,
        inner_sweeps=args.sweeps,
        inner_tol=args.inner_tol,
        variant=args.variant,
    )


def _threads(args):
    return args.threads if args.threads is not None else default_threads()


def _load_design(args):
    dataset = load_dataset(args.data, args.format, args.n_features)
    design = build_signed_design(dataset, make_partition(dataset.p, args.blocks))
    return dataset, design


def _write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _dataset_csv(dataset):
    header = "y," + ",".join("x%d" % (j + 1) for j in range(dataset.p))
    lines = [header]
    for i in range(dataset.n):
        row = [repr(float(dataset.y[i]))]
        row.extend(repr(float(v)) for v in dataset.X[i])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_simulate(args):
    spec = SimSpec(
        n=args.n,
        p=args.p,
        rho=args.rho,
        active_set=_parse_active(args.active),
        signal=args.signal,
        seed=args.seed,
        n_test=args.n_test,
    )
    train, test, beta_star = generate(spec)
    os.makedirs(args.out, exist_ok=True)
    _write_text(os.path.join(args.out, "train.csv"), _dataset_csv(train))
    _write_text(os.path.join(args.out, "test.csv"), _dataset_csv(test))
    truth = {
        "n": spec.n,
        "p": spec.p,
        "rho": spec.rho,
        "signal": spec.signal,
        "seed": spec.seed,
        "active": list(spec.active_set),
        "beta_star": [[int(j), float(beta_star[j])] for j in spec.active_set],
    }
    _write_text(os.path.join(args.out, "truth.json"), json.dumps(truth) + "\n")
    print("wrote train.csv, test.csv, truth.json to %s" % args.out)
    return 0


def cmd_fit(args):
    dataset, design = _load_design(args)
    cfg = _solver_config(args)
    threads = _threads(args)
    if args.penalty == "l1":
        fit = fit_weighted_l1_svm(
            design, PenaltyWeights.ones(dataset.p), args.lam, cfg, threads=threads
        )
    else:
        ts = TwoStepConfig(upsilon=args.upsilon, scad_a=args.scad_a, stage1=cfg, stage2=cfg)
        fit = two_step_fit(design, args.lam, ts, threads=threads)
    print(
        "objective=%r iterations=%d support=%d converged=%s"
        % (fit.objective, fit.iterations, len(fit.support), fit.converged)
    )
    _write_text(args.out, fit.to_json() + "\n")
    return 0


def cmd_path(args):
    dataset, design = _load_design(args)
    cfg = _solver_config(args)
    threads = _threads(args)
    grid = lambda_grid(design, args.n_lambda, args.min_ratio)
    method = "l1" if args.penalty == "l1" else "two_step"
    two_step = None
    if method == "two_step":
        two_step = TwoStepConfig(upsilon=args.upsilon, scad_a=args.scad_a,
                                 stage1=cfg, stage2=cfg)
    scores = None
    if args.select == "cv":
        scores = cross_validate(
            design, grid, args.folds, cfg, seed=args.cv_seed, method=method,
            two_step=two_step, threads=threads,
        )
    path = fit_path(design, grid, cfg, method, two_step=two_step, scores=scores,
                    threads=threads)
    _write_text(args.out, path.to_jsonl(rule=args.select))
    print(
        "selected lambda=%r score=%r support=%d"
        % (path.selected_lambda, float(path.scores[path.selected]),
           len(path.selected_fit.support))
    )
    return 0


def cmd_benchmark(args):
    spec = SimSpec(
        n=args.n,
        p=args.p,
        rho=args.rho,
        active_set=_parse_active(args.active),
        signal=args.signal,
        seed=args.seed,
    )
    methods = tuple(tok.strip() for tok in args.methods.split(",") if tok.strip())
    if args.with_oracle and "l1-lp" not in methods:
        methods = methods + ("l1-lp",)
    cfg = _solver_config(args)
    result = run_benchmark(
        spec,
        args.reps,
        methods=methods,
        cfg=cfg,
        blocks=args.blocks,
        n_lambda=args.n_lambda,
        min_ratio=args.min_ratio,
        threads=_threads(args),
    )
    _write_text(args.out, result.to_csv())
    print(result.table())
    return 0


def cmd_convergence(args):
    dataset, design = _load_design(args)
    cfg = _solver_config(args)
    recorder = TrajectoryRecorder(interval=args.interval, track_objective=True)
    fit, state = fit_weighted_l1_svm(
        design,
        PenaltyWeights.ones(dataset.p),
        args.lam,
        cfg,
        threads=_threads(args),
        recorder=recorder,
        return_state=True,
    )
    etas = block_etas(design, cfg) if cfg.variant == "prox" else None
    dist = dist_monitor(recorder, state, design, cfg, etas=etas)
    dist_at = {
        snap.iteration: dist[i] for i, snap in enumerate(recorder.snapshots)
    }
    lines = ["iteration,primal,dual,objective,dist"]
    for k in range(fit.iterations):
        it = k + 1
        d = repr(float(dist_at[it])) if it in dist_at else ""
        lines.append(
            "%d,%r,%r,%r,%s"
            % (it, float(fit.residual_history[k, 0]), float(fit.residual_history[k, 1]),
               float(recorder.objectives[k]), d)
        )
    _write_text(args.out, "\n".join(lines) + "\n")
    print(
        "iterations=%d converged=%s objective=%r"
        % (fit.iterations, fit.converged, fit.objective)
    )
    return 0


def build_parser():
    parser = _Parser(prog="ssvm", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="write a synthetic train/test pair")
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--p", type=int, required=True)
    sim.add_argument("--rho", type=float, default=0.4)
    sim.add_argument("--active", default="50,1000,1500,2000",
                     help="comma-separated active indices (0-based)")
    sim.add_argument("--signal", type=float, default=1.1)
    sim.add_argument("--seed", type=int, default=0)
    sim.add_argument("--n-test", type=int, default=None)
    sim.add_argument("--out", default=".", help="output directory")
    sim.set_defaults(func=cmd_simulate)

    fit = sub.add_parser("fit", help="solve one penalty level")
    _add_data_flags(fit)
    _add_solver_flags(fit)
    _add_penalty_flags(fit)
    fit.add_argument("--lambda", dest="lam", type=float, required=True)
    fit.add_argument("--out", default="model.json")
    fit.set_defaults(func=cmd_fit)

    path = sub.add_parser("path", help="fit a penalty grid and select a model")
    _add_data_flags(path)
    _add_solver_flags(path)
    _add_penalty_flags(path)
    path.add_argument("--n-lambda", type=int, default=100)
    path.add_argument("--min-ratio", type=float, default=0.01)
    path.add_argument("--select", choices=("svmic", "cv"), default="svmic")
    path.add_argument("--folds", type=int, default=5)
    path.add_argument("--cv-seed", type=int, default=0)
    path.add_argument("--out", default="path.jsonl")
    path.set_defaults(func=cmd_path)

    bench = sub.add_parser("benchmark", help="replicated synthetic comparison")
    _add_solver_flags(bench)
    bench.add_argument("--n", type=int, required=True)
    bench.add_argument("--p", type=int, required=True)
    bench.add_argument("--rho", type=float, default=0.4)
    bench.add_argument("--active", default="50,1000,1500,2000")
    bench.add_argument("--signal", type=float, default=1.1)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--reps", type=int, default=20)
    bench.add_argument("--methods", default="l1-cd,two-step-cd")
    bench.add_argument("--with-oracle", action="store_true",
                       help="add the exact LP baseline (small instances only)")
    bench.add_argument("--n-lambda", type=int, default=30)
    bench.add_argument("--min-ratio", type=float, default=0.01)
    bench.add_argument("--out", default="results.csv")
    bench.set_defaults(func=cmd_benchmark)

    conv = sub.add_parser("convergence", help="per-iteration diagnostics for one fit")
    _add_data_flags(conv)
    _add_solver_flags(conv)
    conv.add_argument("--lambda", dest="lam", type=float, required=True)
    conv.add_argument("--interval", type=int, default=10,
                      help="iterations between distance snapshots")
    conv.add_argument("--out", default="convergence.csv")
    conv.set_defaults(func=cmd_convergence)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code else 0
    try:
        return args.func(args)
    except DataError as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 2
    except OSError as exc:
        print("data error: %s" % exc, file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print("solver failure: %s" % exc, file=sys.stderr)
        return 3
    except ValueError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
