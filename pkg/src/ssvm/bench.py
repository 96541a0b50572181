"""Synthetic benchmark: AR(1) Gaussian designs with probit labels.

The generator draws rows with covariance ``0.4^|i-j|`` (any rho works)
through the cheap recursion ``x_j = rho x_{j-1} + sqrt(1-rho^2) eps_j``
and labels each row +1 with probability ``Phi(x' beta_star)``.  The
harness replays the same protocol for every method: generate, fit a
path, select by the information criterion, and score on a fresh test
draw.
"""

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .adaptive import TwoStepConfig
from .data import PenaltyWeights, SolverConfig, Dataset, build_signed_design, make_partition
from .engine import SolverDivergence
from .lp import SimplexFailure, oracle_fit
from .parallel import thread_map
from .selection import fit_path, lambda_grid, svmic_h

_METRIC_NAMES = ("test_error", "signal", "noise", "aac")
_KNOWN_METHODS = ("l1-cd", "l1-prox", "two-step-cd", "two-step-prox", "l1-lp")


@dataclass
class SimSpec:
    """Design of one synthetic scenario.

    ``active_set`` holds 0-based indices of the nonzero coefficients, each
    equal to ``signal``.  The test sample has ``n_test`` rows (defaults to
    n) and is drawn from the same stream right after the training sample.
    """

    n: int
    p: int
    rho: float = 0.4
    active_set: tuple = (50, 1000, 1500, 2000)
    signal: float = 1.1
    seed: int = 0
    n_test: int = None

    def __post_init__(self):
        if self.n < 1 or self.p < 1:
            raise ValueError("need n >= 1 and p >= 1")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        active = tuple(int(j) for j in self.active_set)
        if len(set(active)) != len(active):
            raise ValueError("active_set has repeated indices")
        if any(j < 0 or j >= self.p for j in active):
            raise ValueError("active_set indices must lie in [0, p)")
        self.active_set = active
        if self.n_test is not None and self.n_test < 1:
            raise ValueError("n_test must be positive")

    def beta_star(self):
        beta = np.zeros(self.p)
        beta[list(self.active_set)] = self.signal
        return beta


@dataclass
class Metrics:
    """Test error, true/false support counts, and direction correlation."""

    test_error: float
    signal: int
    noise: int
    aac: float

    def as_array(self):
        return np.array([self.test_error, self.signal, self.noise, self.aac])


def _draw_sample(rng, spec, n, beta_star):
    X = np.empty((n, spec.p), order="F")
    X[:, 0] = rng.standard_normal(n)
    scale = math.sqrt(1.0 - spec.rho * spec.rho)
    for j in range(1, spec.p):
        X[:, j] = spec.rho * X[:, j - 1] + scale * rng.standard_normal(n)
    idx = list(spec.active_set)
    score = X[:, idx] @ beta_star[idx] if idx else np.zeros(n)
    y = np.where(rng.random(n) < ndtr(score), 1.0, -1.0)
    return Dataset(X, y)


def generate(spec):
    """Draw (train, test, beta_star) from one counter-based stream.

    The stream is keyed by ``spec.seed`` alone, so equal specs reproduce
    byte-identical samples on any machine and thread count.
    """
    rng = np.random.Generator(np.random.Philox(spec.seed))
    beta_star = spec.beta_star()
    train = _draw_sample(rng, spec, spec.n, beta_star)
    test = _draw_sample(rng, spec, spec.n_test or spec.n, beta_star)
    return train, test, beta_star


def evaluate(fit, test, beta_star, active_set):
    """Score a fit on a test sample against the generating truth.

    ``signal`` counts recovered true coefficients, ``noise`` the spurious
    ones; ``aac`` is the absolute correlation between the true and fitted
    decision directions over the test rows, zero if either is constant.
    """
    pred = fit.predict(test.X)
    test_error = float(np.mean(pred != test.y))
    support = set(int(j) for j in fit.support)
    active = set(int(j) for j in active_set)
    signal = len(support & active)
    noise = len(support - active)
    s_true = test.X @ beta_star
    s_fit = test.X @ fit.beta_plus
    a = s_true - s_true.mean()
    b = s_fit - s_fit.mean()
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        aac = 0.0
    else:
        aac = min(1.0, abs(float(a @ b) / (na * nb)))
    return Metrics(test_error, signal, noise, aac)


def _fit_method(name, train, design, grid, cfg, two_step):
    if name in ("l1-cd", "l1-prox"):
        variant = name.split("-")[1]
        path = fit_path(design, grid, dataclasses.replace(cfg, variant=variant), "l1")
        return path.selected_fit
    if name in ("two-step-cd", "two-step-prox"):
        variant = name.split("-", 2)[2]
        engine_cfg = dataclasses.replace(cfg, variant=variant)
        ts = two_step if two_step is not None else TwoStepConfig()
        ts = dataclasses.replace(ts, stage1=engine_cfg, stage2=engine_cfg)
        path = fit_path(design, grid, engine_cfg, "two_step", two_step=ts)
        return path.selected_fit
    if name == "l1-lp":
        ones = PenaltyWeights.ones(train.p)
        fits = [oracle_fit(train, ones, float(lam)) for lam in grid]
        scores = np.array([svmic_h(fit, train) for fit in fits])
        return fits[int(np.argmin(scores))]
    raise ValueError("unknown method %r" % name)


@dataclass
class BenchmarkResult:
    """Per-replication metric values for each method.

    ``values[method]`` is a (reps, 4) array in metric order test_error,
    signal, noise, aac; failed replications hold NaN and are counted in
    ``failures`` rather than dropped silently.
    """

    spec: SimSpec
    reps: int
    methods: tuple
    values: dict
    failures: dict

    def metric(self, method, name):
        return self.values[method][:, _METRIC_NAMES.index(name)]

    def mean(self, method, name):
        col = self.metric(method, name)
        ok = col[~np.isnan(col)]
        return float(ok.mean()) if ok.size else float("nan")

    def stderr(self, method, name):
        col = self.metric(method, name)
        ok = col[~np.isnan(col)]
        if ok.size < 2:
            return 0.0
        return float(ok.std(ddof=1) / math.sqrt(ok.size))

    def to_csv(self):
        lines = ["method,metric,mean,stderr"]
        for method in self.methods:
            for name in _METRIC_NAMES:
                lines.append(
                    "%s,%s,%r,%r"
                    % (method, name, self.mean(method, name), self.stderr(method, name))
                )
            lines.append("%s,failures,%d,0" % (method, self.failures[method]))
        return "\n".join(lines) + "\n"

    def table(self):
        header = "%-14s %12s %8s %8s %8s %9s" % (
            "method", "test_error", "signal", "noise", "aac", "failures",
        )
        rows = [header, "-" * len(header)]
        for method in self.methods:
            rows.append(
                "%-14s %5.3f (%4.3f) %8.2f %8.2f %8.3f %9d"
                % (
                    method,
                    self.mean(method, "test_error"),
                    self.stderr(method, "test_error"),
                    self.mean(method, "signal"),
                    self.mean(method, "noise"),
                    self.mean(method, "aac"),
                    self.failures[method],
                )
            )
        return "\n".join(rows)


def run_benchmark(spec, reps, methods=("l1-cd", "two-step-cd"), cfg=None,
                  two_step=None, blocks=1, n_lambda=30, min_ratio=0.01, threads=1):
    """Replicate the generate/fit/select/evaluate protocol.

    Replication r reruns ``spec`` with seed ``spec.seed + r``; every method
    sees the same draw, so cross-method comparisons are paired.  Solver
    failures in one method record NaN metrics for that replication.
    Replications run concurrently; results are aggregated in replication
    order and are independent of ``threads``.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    methods = tuple(methods)
    for m in methods:
        if m not in _KNOWN_METHODS:
            raise ValueError("unknown method %r (known: %s)" % (m, ", ".join(_KNOWN_METHODS)))
    cfg = cfg if cfg is not None else SolverConfig()

    def one_rep(r):
        sp = dataclasses.replace(spec, seed=spec.seed + r)
        train, test, beta_star = generate(sp)
        design = build_signed_design(train, make_partition(sp.p, blocks))
        grid = lambda_grid(design, n_lambda, min_ratio)
        out = {}
        for m in methods:
            try:
                fit = _fit_method(m, train, design, grid, cfg, two_step)
            except (SolverDivergence, SimplexFailure):
                out[m] = None
                continue
            out[m] = evaluate(fit, test, beta_star, sp.active_set)
        return out

    rep_results = thread_map(one_rep, range(reps), threads=threads)
    values = {m: np.full((reps, len(_METRIC_NAMES)), np.nan) for m in methods}
    failures = {m: 0 for m in methods}
    for r, out in enumerate(rep_results):
        for m in methods:
            if out[m] is None:
                failures[m] += 1
            else:
                values[m][r] = out[m].as_array()
    return BenchmarkResult(spec=spec, reps=reps, methods=methods, values=values,
                           failures=failures)
