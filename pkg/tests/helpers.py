"""Shared instance builders for the test suite."""

import numpy as np

from ssvm.data import (
    Dataset,
    PenaltyWeights,
    SolverConfig,
    build_signed_design,
    make_partition,
)


def symmetric_instance():
    """The n=2, p=1 instance {(x=+1, y=+1), (x=-1, y=-1)}.

    For lambda <= 1 the optimum is beta = 1, beta0 = 0 with objective
    0 + lambda (the margins are exactly 1, so the hinge term vanishes).
    """
    X = np.array([[1.0], [-1.0]])
    y = np.array([1.0, -1.0])
    return Dataset(X, y)


def random_instance(seed, n=20, p=8, separable=False):
    """Small dense instance with labels from a noisy linear rule."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    w = rng.standard_normal(p)
    score = X @ w
    if separable:
        y = np.where(score >= 0, 1.0, -1.0)
    else:
        y = np.where(score + rng.standard_normal(n) >= 0, 1.0, -1.0)
    if np.all(y == y[0]):
        y[0] = -y[0]
    return Dataset(X, y)


def design_for(dataset, G=1):
    return build_signed_design(dataset, make_partition(dataset.p, G))


def default_weights(p):
    return PenaltyWeights.ones(p)


def tight_config(**overrides):
    """Solver settings tight enough for oracle comparisons on tiny data."""
    base = dict(phi=1.0, tol=1e-9, max_iter=200000, inner_sweeps=10)
    base.update(overrides)
    return SolverConfig(**base)
