"""Penalty grids, warm-started solution paths, and model selection.

Two selection rules are provided: a hinge information criterion that
needs only the training fit, and stratified K-fold cross-validation on
misclassification error.
"""

import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .adaptive import TwoStepConfig, two_step_fit
from .data import Dataset, PenaltyWeights, SolverConfig, build_signed_design
from .engine import fit_weighted_l1_svm
from .parallel import thread_map


def lambda_grid(design, n_lambda=100, min_ratio=0.01):
    """Log-spaced penalty grid from lambda_max down to min_ratio * lambda_max.

    lambda_max is the smallest penalty at which the all-zero coefficient
    vector is stationary: the largest absolute column mean of the signed
    design, ``max_j |(1/n) sum_i y_i x_ij|``.
    """
    if n_lambda < 2:
        raise ValueError("n_lambda must be at least 2")
    if not 0.0 < min_ratio < 1.0:
        raise ValueError("min_ratio must lie in (0, 1)")
    lam_max = float(np.max(np.abs(design.A.mean(axis=0))))
    if lam_max <= 0.0:
        raise ValueError("all-zero design: the penalty grid is undefined")
    return np.geomspace(lam_max, min_ratio * lam_max, n_lambda)


def svmic_h(fit, dataset):
    """Hinge information criterion: total hinge loss plus a support charge.

    ``sum_i (1 - y_i beta0 - y_i x_i' beta_plus)_+ + log(log n) * |support| * log n``.
    The loss term is a plain sum, not a mean.  Needs n >= 3 so the charge
    is positive.
    """
    n = dataset.n
    if n <= 2:
        raise ValueError("the criterion needs n >= 3")
    margins = 1.0 - dataset.y * (dataset.X @ fit.beta_plus) - dataset.y * fit.beta0
    hinge = float(np.maximum(margins, 0.0).sum())
    return hinge + math.log(math.log(n)) * len(fit.support) * math.log(n)


def _svmic_from_design(fit, design):
    # same value as svmic_h: the signed design absorbs the label products
    n = design.n
    if n <= 2:
        raise ValueError("the criterion needs n >= 3")
    margins = 1.0 - design.A @ fit.beta_plus - design.y * fit.beta0
    hinge = float(np.maximum(margins, 0.0).sum())
    return hinge + math.log(math.log(n)) * len(fit.support) * math.log(n)


@dataclass
class PathResult:
    """Fits along a descending penalty grid with their selection scores.

    ``selected`` is the index of the smallest score; ties resolve to the
    first (largest-penalty) candidate.
    """

    lambdas: np.ndarray
    fits: list
    scores: np.ndarray
    selected: int

    @property
    def selected_fit(self):
        return self.fits[self.selected]

    @property
    def selected_lambda(self):
        return float(self.lambdas[self.selected])

    def to_jsonl(self, rule="svmic"):
        """One JSON record per fit plus a trailing selection summary."""
        lines = [fit.to_json() for fit in self.fits]
        lines.append(
            json.dumps(
                {
                    "selected_lambda": self.selected_lambda,
                    "rule": rule,
                    "score": float(self.scores[self.selected]),
                }
            )
        )
        return "\n".join(lines) + "\n"


def fit_path(design, grid, cfg=None, method="l1", weights=None, two_step=None,
             scores=None, threads=1):
    """Fit every penalty level in ``grid``, warm-starting down the path.

    Parameters
    ----------
    grid : array
        Strictly decreasing penalty levels.
    method : {"l1", "two_step"}
        Plain weighted-l1 fits, or the two-step adaptive procedure (whose
        stage-one chain is warm-started along the path as well).
    weights : PenaltyWeights, optional
        Fixed weights for the l1 method; defaults to all ones.
    two_step : TwoStepConfig, optional
        Stage settings for the two-step method; defaults to ``cfg`` for
        both stages.
    scores : array, optional
        Selection scores to attach.  Defaults to the hinge information
        criterion of each fit.

    Returns a PathResult; ``selected`` minimizes the scores.
    """
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or grid.shape[0] < 1:
        raise ValueError("grid must be a non-empty vector")
    if np.any(np.diff(grid) >= 0.0):
        raise ValueError("grid must be strictly decreasing")
    if np.any(grid <= 0.0):
        raise ValueError("grid entries must be positive")
    cfg = cfg if cfg is not None else SolverConfig()
    fits = []
    if method == "l1":
        w = weights if weights is not None else PenaltyWeights.ones(design.p)
        state = None
        for lam in grid:
            fit, state = fit_weighted_l1_svm(
                design, w, float(lam), cfg, init=state, threads=threads, return_state=True
            )
            fits.append(fit)
    elif method == "two_step":
        ts = two_step if two_step is not None else TwoStepConfig(stage1=cfg, stage2=cfg)
        s1_state = None
        for lam in grid:
            fit, s1_state, _ = two_step_fit(
                design, float(lam), ts, init=s1_state, threads=threads, return_states=True
            )
            fits.append(fit)
    else:
        raise ValueError("method must be 'l1' or 'two_step'")
    if scores is None:
        scores = np.array([_svmic_from_design(fit, design) for fit in fits])
    else:
        scores = np.asarray(scores, dtype=np.float64)
        if scores.shape != grid.shape:
            raise ValueError("scores must match the grid length")
    if not np.isfinite(scores).all():
        raise ValueError("selection scores must be finite")
    return PathResult(
        lambdas=grid.copy(), fits=fits, scores=scores, selected=int(np.argmin(scores))
    )


def stratified_folds(y, k, seed):
    """Deterministic fold labels in 0..k-1, stratified by class."""
    rng = np.random.Generator(np.random.Philox(seed))
    fold = np.empty(y.shape[0], dtype=np.int64)
    for cls in (1.0, -1.0):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(idx.shape[0])]
        fold[idx] = np.arange(idx.shape[0]) % k
    return fold


def cross_validate(design, grid, k=5, cfg=None, seed=0, method="l1", two_step=None,
                   threads=1):
    """Per-lambda mean misclassification over stratified folds.

    Each fold fits a full warm-started path on its training part and
    scores the held-out part; folds run concurrently.  A fold whose
    held-out part contains a single class is kept, with a warning.
    """
    n = design.n
    if k < 2 or k > n:
        raise ValueError("need 2 <= k <= n folds")
    grid = np.asarray(grid, dtype=np.float64)
    X = design.unsign()
    y = design.y
    fold = stratified_folds(y, k, seed)
    for f in range(k):
        held = y[fold == f]
        if held.shape[0] == 0 or np.all(held == held[0]):
            warnings.warn("fold %d holds out a single class" % f, stacklevel=2)

    def run_fold(f):
        train = fold != f
        sub = Dataset(X[train], y[train])
        sub_design = build_signed_design(sub, design.partition)
        path = fit_path(sub_design, grid, cfg, method, two_step=two_step)
        X_out, y_out = X[~train], y[~train]
        return np.array(
            [float(np.mean(fit.predict(X_out) != y_out)) for fit in path.fits]
        )

    per_fold = thread_map(run_fold, range(k), threads=threads)
    return np.mean(np.stack(per_fold), axis=0)
