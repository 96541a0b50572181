"""Exact linear-programming reference for the weighted-l1 SVM.

The problem is an LP after the usual splits: slack xi_i for each hinge
term, beta_plus = u - v and beta0 = b_pos - b_neg with all parts
non-negative.  A dense two-phase simplex with Bland's rule solves it
exactly (up to floating point), which makes it the independent oracle the
iterative solvers are tested against.  Deliberately small scale: the size
guard rejects anything beyond a few hundred variables.
"""

from dataclasses import dataclass

import numpy as np

from .data import objective
from .engine import FitResult

MAX_LP_VARIABLES = 400


class SimplexFailure(RuntimeError):
    """Pivot budget exhausted; no answer is returned rather than a wrong one."""


@dataclass
class StandardLP:
    """min c @ w subject to M w >= b, w >= 0, with the SVM variable layout.

    ``w = (xi_1..xi_n, u_1..u_p, v_1..v_p, b_pos, b_neg)``.
    """

    c: np.ndarray
    M: np.ndarray
    b: np.ndarray
    n: int
    p: int


def build_lp(dataset, weights, lam):
    """Assemble the LP for one dataset and penalty level."""
    if lam < 0.0:
        raise ValueError("lam must be non-negative")
    n, p = dataset.n, dataset.p
    n_vars = n + 2 * p + 2
    if n_vars > MAX_LP_VARIABLES:
        raise ValueError(
            "size guard: %d LP variables exceed the cap of %d" % (n_vars, MAX_LP_VARIABLES)
        )
    if weights.alpha.shape != (p,):
        raise ValueError("weights must have length %d" % p)
    signed = dataset.X * dataset.y[:, None]
    M = np.zeros((n, n_vars))
    M[:, :n] = np.eye(n)
    M[:, n:n + p] = signed
    M[:, n + p:n + 2 * p] = -signed
    M[:, n + 2 * p] = dataset.y
    M[:, n + 2 * p + 1] = -dataset.y
    c = np.concatenate(
        [np.full(n, 1.0 / n), lam * weights.alpha, lam * weights.alpha, [0.0, 0.0]]
    )
    return StandardLP(c=c, M=M, b=np.ones(n), n=n, p=p)


def _pivot(T, r, j):
    T[r] = T[r] / T[r, j]
    col = T[:, j].copy()
    col[r] = 0.0
    T -= np.outer(col, T[r])


def _run_pivots(T, basis, enterable, tol, budget):
    """Bland pivoting until no reduced cost is below -tol.

    Entering: smallest eligible column index.  Leaving: row with the
    smallest ratio, ties broken by the smallest basic variable index.
    Deterministic by construction.  Returns the pivot count consumed.
    """
    m = basis.shape[0]
    used = 0
    while True:
        reduced = T[-1, :enterable]
        candidates = np.flatnonzero(reduced < -tol)
        if candidates.size == 0:
            return used
        j = int(candidates[0])
        col = T[:m, j]
        positive = col > tol
        if not positive.any():
            raise ValueError("LP is unbounded")
        ratios = np.full(m, np.inf)
        ratios[positive] = T[:m, -1][positive] / col[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios == best)
        r = int(ties[np.argmin(basis[ties])])
        _pivot(T, r, j)
        basis[r] = j
        used += 1
        if used >= budget:
            raise SimplexFailure("pivot budget of %d exhausted" % budget)


def _solve_standard_form(A, b, c, max_pivots, tol):
    """min c @ x, A x = b, x >= 0.  Returns (x, basis, pivots)."""
    m, n = A.shape
    A = A.copy()
    b = b.copy()
    negative = b < 0
    A[negative] *= -1.0
    b[negative] *= -1.0
    # phase 1: artificial identity basis, cost = sum of artificials
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[-1, :n] = -A.sum(axis=0)
    T[-1, -1] = -b.sum()
    basis = np.arange(n, n + m)
    pivots = _run_pivots(T, basis, n, tol, max_pivots)
    if -T[-1, -1] > 1e-7:
        raise ValueError("LP is infeasible")
    # drive leftover artificials out of the basis; drop redundant rows
    keep = np.ones(m, dtype=bool)
    for r in range(m):
        if basis[r] < n:
            continue
        row = T[r, :n]
        eligible = np.flatnonzero(np.abs(row) > tol)
        if eligible.size:
            j = int(eligible[0])
            _pivot(T, r, j)
            basis[r] = j
        else:
            keep[r] = False
    if not keep.all():
        T = np.vstack([T[:m][keep], T[-1:]])
        basis = basis[keep]
        m = basis.shape[0]
    # phase 2: original costs, artificial columns removed
    T = np.hstack([T[:, :n], T[:, -1:]])
    cost = np.concatenate([c, [0.0]])
    for r in range(m):
        if cost[basis[r]] != 0.0:
            cost = cost - cost[basis[r]] * T[r]
    T[-1] = cost
    pivots += _run_pivots(T, basis, n, tol, max_pivots - pivots)
    x = np.zeros(n)
    x[basis] = T[:m, -1]
    return x, basis, pivots


def simplex_solve(lp, max_pivots=10**6, tol=1e-9):
    """Solve the LP; returns (w, value) at an optimal basic solution.

    The inequality rows get surplus variables first, then the two-phase
    tableau method runs with Bland's rule, so identical inputs replay
    identical pivot sequences.
    """
    m, n_vars = lp.M.shape
    A = np.hstack([lp.M, -np.eye(m)])
    c = np.concatenate([lp.c, np.zeros(m)])
    x, _, _ = _solve_standard_form(A, lp.b, c, max_pivots, tol)
    w = x[:n_vars]
    return w, float(lp.c @ w)


def oracle_fit(dataset, weights, lam, support_eps=1e-6):
    """LP-exact fit mapped back to (beta0, beta_plus).

    The hinge objective of the recovered coefficients is checked against
    the LP optimum (they agree at any optimal basic solution); a mismatch
    beyond 1e-9 relative raises, since it would mean a bug rather than
    noise.  ``iterations`` reports simplex pivots.
    """
    lp = build_lp(dataset, weights, lam)
    A = np.hstack([lp.M, -np.eye(lp.n)])
    c = np.concatenate([lp.c, np.zeros(lp.n)])
    x, _, pivots = _solve_standard_form(A, lp.b, c, 10**6, 1e-9)
    n, p = lp.n, lp.p
    value = float(lp.c @ x[: lp.M.shape[1]])
    beta_plus = x[n:n + p] - x[n + p:n + 2 * p]
    beta0 = float(x[n + 2 * p] - x[n + 2 * p + 1])
    obj = objective(dataset, weights, lam, beta0, beta_plus)
    if abs(obj - value) > 1e-9 * max(1.0, abs(value)):
        raise RuntimeError(
            "LP optimum %.12g disagrees with the model objective %.12g" % (value, obj)
        )
    return FitResult(
        beta0=beta0,
        beta_plus=beta_plus,
        lam=float(lam),
        iterations=pivots,
        converged=True,
        objective=obj,
        residual_history=np.zeros((0, 2)),
        support=np.flatnonzero(np.abs(beta_plus) > support_eps),
    )
