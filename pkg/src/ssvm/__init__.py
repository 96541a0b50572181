"""Parallelizable 3-block ADMM solvers for l1 and adaptively weighted l1 SVMs."""

from .adaptive import TwoStepConfig, adaptive_weights, scad_derivative, two_step_fit
from .bench import BenchmarkResult, Metrics, SimSpec, evaluate, generate, run_benchmark
from .data import (
    BlockPartition,
    DataError,
    Dataset,
    PenaltyWeights,
    SignedDesign,
    SolverConfig,
    build_signed_design,
    load_dataset,
    make_partition,
    objective,
)
from .engine import (
    AdmmState,
    FitResult,
    SolverDivergence,
    TrajectoryRecorder,
    admm_step,
    dist_monitor,
    fit_weighted_l1_svm,
)
from .lp import SimplexFailure, StandardLP, build_lp, oracle_fit, simplex_solve
from .selection import (
    PathResult,
    cross_validate,
    fit_path,
    lambda_grid,
    svmic_h,
)
from .subsolvers import (
    BlockContext,
    estimate_eta,
    soft_threshold,
    update_beta_cd,
    update_beta_prox,
)

__version__ = "0.1.0"

__all__ = [
    "AdmmState",
    "BenchmarkResult",
    "BlockContext",
    "BlockPartition",
    "DataError",
    "Dataset",
    "FitResult",
    "Metrics",
    "PathResult",
    "PenaltyWeights",
    "SignedDesign",
    "SimSpec",
    "SimplexFailure",
    "SolverConfig",
    "SolverDivergence",
    "StandardLP",
    "TrajectoryRecorder",
    "TwoStepConfig",
    "adaptive_weights",
    "admm_step",
    "build_lp",
    "build_signed_design",
    "cross_validate",
    "dist_monitor",
    "estimate_eta",
    "evaluate",
    "fit_path",
    "fit_weighted_l1_svm",
    "generate",
    "lambda_grid",
    "load_dataset",
    "make_partition",
    "objective",
    "oracle_fit",
    "run_benchmark",
    "scad_derivative",
    "simplex_solve",
    "soft_threshold",
    "svmic_h",
    "two_step_fit",
    "update_beta_cd",
    "update_beta_prox",
]
