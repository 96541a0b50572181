"""Per-block coefficient updates for the ADMM engine.

Each block g solves (or descends on)

    min_b  lam * sum_j alpha_j |b_j|  +  (phi/2) ||A_g b - v||^2

with v the block's current consensus target.  Two interchangeable updates
are provided: an exact-tolerance coordinate descent pass and a single
proximal-gradient step whose majorization constant eta must dominate
phi * lambda_max(A_g' A_g).
"""

from dataclasses import dataclass

import numpy as np
from numba import njit


def soft_threshold(a, kappa):
    """sign(a) * max(|a| - kappa, 0), elementwise."""
    a = np.asarray(a, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - kappa, 0.0)


@dataclass
class BlockContext:
    """Inputs for one block subproblem.

    ``v`` is the target ``omega_g - gamma_g / phi``; ``eta`` is only needed
    by the proximal update.
    """

    A: np.ndarray
    col_sq_norms: np.ndarray
    alpha: np.ndarray
    lam: float
    phi: float
    v: np.ndarray
    eta: float = None

    def __post_init__(self):
        m = self.A.shape[1]
        if self.col_sq_norms.shape != (m,) or self.alpha.shape != (m,):
            raise ValueError("column norms and weights must match the block width")
        if self.v.shape != (self.A.shape[0],):
            raise ValueError("target v must match the row count")
        if self.lam < 0.0 or self.phi <= 0.0:
            raise ValueError("need lam >= 0 and phi > 0")


def update_beta_prox(ctx, beta):
    """One majorized proximal step from ``beta``.

    Majorizing the quadratic with eta * I gives the closed form
    ``S(beta - (phi/eta) A'(A beta - v), lam * alpha / eta)``.
    """
    if ctx.eta is None:
        raise ValueError("eta is required for the proximal update")
    beta = np.asarray(beta, dtype=np.float64)
    grad = ctx.A.T @ (ctx.A @ beta - ctx.v)
    return soft_threshold(beta - (ctx.phi / ctx.eta) * grad, (ctx.lam / ctx.eta) * ctx.alpha)


@njit(cache=True, nogil=True)
def _cd_sweeps(A, col_sq, thresh, v, beta, sweeps, inner_tol):
    # thresh[j] holds lam * alpha[j] / phi; the per-coordinate threshold is
    # thresh[j] / col_sq[j].  The residual r = v - A beta is maintained
    # incrementally; A is column-major so the inner loops stride by one.
    n, m = A.shape
    r = v.copy()
    for j in range(m):
        bj = beta[j]
        if bj != 0.0:
            for i in range(n):
                r[i] -= bj * A[i, j]
    for _ in range(sweeps):
        delta = 0.0
        for j in range(m):
            cj = col_sq[j]
            if cj <= 0.0:
                beta[j] = 0.0  # zero column: coefficient is irrelevant, pin it
                continue
            dot = 0.0
            for i in range(n):
                dot += A[i, j] * r[i]
            u = beta[j] + dot / cj
            k = thresh[j] / cj
            if u > k:
                nb = u - k
            elif u < -k:
                nb = u + k
            else:
                nb = 0.0
            d = nb - beta[j]
            if d != 0.0:
                for i in range(n):
                    r[i] -= d * A[i, j]
                beta[j] = nb
                ad = abs(d)
                if ad > delta:
                    delta = ad
        if delta < inner_tol:
            break
    return r


def update_beta_cd(ctx, beta, sweeps=10, inner_tol=1e-8, return_residual=False):
    """Cyclic coordinate descent on the block subproblem.

    Runs at most ``sweeps`` full passes, stopping early once the largest
    coordinate change in a pass drops below ``inner_tol``.  Returns the new
    coefficient vector, plus the final residual ``v - A beta`` when
    ``return_residual`` is set.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be at least 1")
    beta = np.array(beta, dtype=np.float64)
    thresh = (ctx.lam / ctx.phi) * ctx.alpha
    r = _cd_sweeps(
        np.asfortranarray(ctx.A, dtype=np.float64),
        np.ascontiguousarray(ctx.col_sq_norms, dtype=np.float64),
        np.ascontiguousarray(thresh, dtype=np.float64),
        np.ascontiguousarray(ctx.v, dtype=np.float64),
        beta,
        sweeps,
        inner_tol,
    )
    if return_residual:
        return beta, r
    return beta


def estimate_eta(A, phi, safety=1.01):
    """Majorization constant: safety * phi * lambda_max(A'A) by power iteration.

    Iterates until the Rayleigh quotient changes by less than 1e-8
    relatively, capped at 200 rounds.  An all-zero block gets a tiny
    positive floor so the proximal step stays defined.
    """
    if not safety > 1.0:
        raise ValueError("safety must exceed 1")
    A = np.asarray(A, dtype=np.float64)
    if not A.any():
        return safety * phi * np.finfo(np.float64).eps
    rng = np.random.default_rng(0)
    x = rng.standard_normal(A.shape[1])
    x /= np.linalg.norm(x)
    rayleigh = 0.0
    for _ in range(200):
        s = A.T @ (A @ x)
        new = float(x @ s)
        ns = float(np.linalg.norm(s))
        if ns == 0.0:
            rayleigh = 0.0
            break
        x = s / ns
        if abs(new - rayleigh) <= 1e-8 * abs(new):
            rayleigh = new
            break
        rayleigh = new
    return safety * phi * rayleigh
