"""Three-block semi-proximal ADMM with a symmetric Gauss-Seidel sweep.

The weighted-l1 SVM is split over feature blocks.  With A_g the signed
design columns of block g and A_0 = y the intercept column, the iterate
carries (beta_0, beta_1..G, z, omega_1..G) subject to

    z + sum_g omega_g + A_0 beta_0 = 1,      A_g beta_g = omega_g,

with multipliers gamma_0 and gamma_1..G.  One iteration updates the
coefficients, takes a half step on omega, updates z, repeats the omega
step with the fresh z, then ascends the multipliers.  The middle repeat is
what makes the three-block scheme convergent; dropping it is not an
option here.
"""

import json
import math
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .data import SolverConfig
from .parallel import thread_map
from .subsolvers import BlockContext, estimate_eta, update_beta_cd, update_beta_prox


class SolverDivergence(RuntimeError):
    """A non-finite iterate appeared; carries the 1-based iteration index."""

    def __init__(self, iteration):
        super().__init__("non-finite iterate at iteration %d" % iteration)
        self.iteration = iteration


def _fsum(arrays):
    # summation in fixed list order keeps results thread-count independent
    out = arrays[0].copy()
    for a in arrays[1:]:
        out += a
    return out


@dataclass
class AdmmState:
    """Mutable ADMM iterate.  ``abeta[g]`` caches ``A_g @ beta[g]``."""

    beta0: float
    beta: list
    z: np.ndarray
    omega: list
    gamma0: np.ndarray
    gamma: list
    abeta: list
    iteration: int = 0

    @classmethod
    def zeros(cls, design):
        n, G = design.n, design.G
        sizes = design.partition.sizes
        return cls(
            beta0=0.0,
            beta=[np.zeros(int(sz)) for sz in sizes],
            z=np.zeros(n),
            omega=[np.zeros(n) for _ in range(G)],
            gamma0=np.zeros(n),
            gamma=[np.zeros(n) for _ in range(G)],
            abeta=[np.zeros(n) for _ in range(G)],
        )

    def copy(self):
        return AdmmState(
            beta0=self.beta0,
            beta=[b.copy() for b in self.beta],
            z=self.z.copy(),
            omega=[w.copy() for w in self.omega],
            gamma0=self.gamma0.copy(),
            gamma=[g.copy() for g in self.gamma],
            abeta=[a.copy() for a in self.abeta],
            iteration=self.iteration,
        )

    def beta_plus(self):
        return np.concatenate(self.beta)


@dataclass
class FitResult:
    """Solution of one penalized SVM fit.

    ``support`` holds the indices with |coefficient| above the support
    threshold; ``stage1`` carries the plain-l1 stage when the fit came from
    the two-step procedure.
    """

    beta0: float
    beta_plus: np.ndarray
    lam: float
    iterations: int
    converged: bool
    objective: float
    residual_history: np.ndarray
    support: np.ndarray
    stage1: "FitResult | None" = None

    def decision_function(self, X):
        return self.beta0 + X @ self.beta_plus

    def predict(self, X):
        """Predicted labels; a decision value of exactly zero maps to +1."""
        return np.where(self.decision_function(X) >= 0.0, 1.0, -1.0)

    def to_json(self):
        coef = [
            [int(j), float(v)] for j, v in enumerate(self.beta_plus) if v != 0.0
        ]
        doc = {
            "lambda": float(self.lam),
            "intercept": float(self.beta0),
            "coef": coef,
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "objective": float(self.objective),
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text, n_features, support_eps=1e-6):
        doc = json.loads(text)
        beta_plus = np.zeros(n_features)
        for j, v in doc["coef"]:
            beta_plus[int(j)] = float(v)
        return cls(
            beta0=float(doc["intercept"]),
            beta_plus=beta_plus,
            lam=float(doc["lambda"]),
            iterations=int(doc["iterations"]),
            converged=bool(doc["converged"]),
            objective=float(doc["objective"]),
            residual_history=np.zeros((0, 2)),
            support=np.flatnonzero(np.abs(beta_plus) > support_eps),
        )


def hinge_prox(v, shift):
    """Proximal map of ``shift * sum (.)_+``: three-piece soft shift.

    Entries above ``shift`` move down by ``shift``, entries in
    ``[0, shift]`` collapse to zero, negative entries pass through.
    """
    v = np.asarray(v, dtype=np.float64)
    return np.maximum(v - shift, 0.0) - np.maximum(-v, 0.0)


def update_intercept(state, design, cfg):
    """Exact intercept minimizer: mean of y * (1 - z - sum omega - gamma0/phi)."""
    resid = 1.0 - state.z - state.gamma0 / cfg.phi
    if state.omega:
        resid -= _fsum(state.omega)
    return float(design.y @ resid) / design.n


def update_z(state, design, cfg):
    """Slack update via the hinge prox at level 1/(n phi)."""
    v = 1.0 - design.y * state.beta0 - _fsum(state.omega) - state.gamma0 / cfg.phi
    return hinge_prox(v, 1.0 / (design.n * cfg.phi))


def update_omega(state, design, cfg):
    """Joint minimizer over all omega blocks given the current z.

    The blocks couple only through their sum, so the solution is each
    block's unconstrained target ``A_g beta_g - (gamma0 - gamma_g)/phi``
    minus the common correction that restores the sum constraint.  Called
    once before and once after the z update each iteration.
    """
    G = design.G
    d = design.y * state.beta0 + state.z - 1.0
    mismatch = [(state.gamma0 - state.gamma[g]) / cfg.phi for g in range(G)]
    c = (d + _fsum(state.abeta) - _fsum(mismatch)) / (G + 1.0)
    return [state.abeta[g] - mismatch[g] - c for g in range(G)]


def update_multipliers(state, design, cfg):
    """Dual ascent with step theta * phi on both constraint groups."""
    step = cfg.theta * cfg.phi
    r1 = design.y * state.beta0 + state.z + _fsum(state.omega) - 1.0
    gamma0 = state.gamma0 + step * r1
    gamma = [
        state.gamma[g] + step * (state.abeta[g] - state.omega[g])
        for g in range(design.G)
    ]
    return gamma0, gamma


def residuals(state, design, z_prev, omega_prev, phi):
    """Scaled (primal, dual) residual pair.

    Primal: largest constraint violation norm; dual: phi times the largest
    iterate movement in (z, omega).  Both are divided by sqrt(n) so the
    tolerance is size-free.
    """
    root_n = math.sqrt(design.n)
    r1 = design.y * state.beta0 + state.z + _fsum(state.omega) - 1.0
    primal = float(np.linalg.norm(r1))
    for g in range(design.G):
        primal = max(primal, float(np.linalg.norm(state.abeta[g] - state.omega[g])))
    dual = float(np.linalg.norm(state.z - z_prev))
    for g in range(design.G):
        dual = max(dual, float(np.linalg.norm(state.omega[g] - omega_prev[g])))
    return primal / root_n, phi * dual / root_n


def block_etas(design, cfg):
    """Per-block majorization constants for the proximal variant."""
    return [
        estimate_eta(design.block(g), cfg.phi, cfg.eta_safety) for g in range(design.G)
    ]


def _update_blocks(state, design, weights, lam, cfg, etas, pool):
    def one(g):
        ctx = BlockContext(
            A=design.block(g),
            col_sq_norms=design.col_sq_norms[design.partition.block_slice(g)],
            alpha=weights.block(design.partition, g),
            lam=lam,
            phi=cfg.phi,
            v=state.omega[g] - state.gamma[g] / cfg.phi,
            eta=None if etas is None else etas[g],
        )
        if cfg.variant == "cd":
            beta, resid = update_beta_cd(
                ctx, state.beta[g], cfg.inner_sweeps, cfg.inner_tol, return_residual=True
            )
            return beta, ctx.v - resid
        beta = update_beta_prox(ctx, state.beta[g])
        return beta, design.block(g) @ beta

    results = thread_map(one, range(design.G), pool=pool)
    for g, (beta, abeta) in enumerate(results):
        state.beta[g] = beta
        state.abeta[g] = abeta


def admm_step(state, design, weights, lam, cfg, etas=None, pool=None):
    """Run one full iteration in place and return its residual pair.

    Every sub-update rebinds fresh arrays, so references taken before the
    call keep the previous iterate.
    """
    z_prev = state.z
    omega_prev = state.omega
    state.beta0 = update_intercept(state, design, cfg)
    _update_blocks(state, design, weights, lam, cfg, etas, pool)
    state.omega = update_omega(state, design, cfg)  # half step, z still old
    state.z = update_z(state, design, cfg)
    state.omega = update_omega(state, design, cfg)  # repeat with the new z
    state.gamma0, state.gamma = update_multipliers(state, design, cfg)
    state.iteration += 1
    return residuals(state, design, z_prev, omega_prev, cfg.phi)


@dataclass
class Snapshot:
    """Iterate snapshot for convergence diagnostics."""

    iteration: int
    beta0: float
    beta: list
    z: np.ndarray
    z_prev: np.ndarray


class TrajectoryRecorder:
    """Collects iterate snapshots and, optionally, per-iteration objectives.

    Snapshots are taken every ``interval`` iterations into a ring buffer
    that keeps the most recent ``max_snapshots`` entries.
    """

    def __init__(self, interval=10, max_snapshots=500, track_objective=False):
        if interval < 1 or max_snapshots < 1:
            raise ValueError("interval and max_snapshots must be positive")
        self.interval = interval
        self.snapshots = deque(maxlen=max_snapshots)
        self.objectives = [] if track_objective else None
        self._last_z = None

    @property
    def track_objective(self):
        return self.objectives is not None

    def observe(self, state, objective=None):
        if self.objectives is not None:
            self.objectives.append(objective)
        if state.iteration % self.interval == 0:
            z_prev = state.z if self._last_z is None else self._last_z
            self.snapshots.append(
                Snapshot(
                    iteration=state.iteration,
                    beta0=state.beta0,
                    beta=[b.copy() for b in state.beta],
                    z=state.z.copy(),
                    z_prev=z_prev.copy(),
                )
            )
        self._last_z = state.z


def _objective_from_design(design, weights, lam, beta0, beta_plus):
    margins = 1.0 - design.A @ beta_plus - design.y * beta0
    hinge = float(np.maximum(margins, 0.0).mean())
    return hinge + lam * float(weights.alpha @ np.abs(beta_plus))


def _objective_from_state(state, design, weights, lam):
    margins = 1.0 - _fsum(state.abeta) - design.y * state.beta0
    hinge = float(np.maximum(margins, 0.0).mean())
    return hinge + lam * float(weights.alpha @ np.abs(state.beta_plus()))


def fit_weighted_l1_svm(
    design,
    weights,
    lam,
    cfg=None,
    init=None,
    threads=1,
    recorder=None,
    reweight=None,
    return_state=False,
):
    """Solve the weighted-l1 SVM at one penalty level.

    Parameters
    ----------
    design : SignedDesign
        Label-signed design with its block partition.
    weights : PenaltyWeights
        Per-coefficient penalty weights.
    lam : float
        Penalty level, non-negative.
    cfg : SolverConfig, optional
        Engine settings; defaults are tuned for desk-scale problems.
    init : AdmmState, optional
        Warm start; copied, the caller's state is left untouched.
    threads : int
        Worker threads for the per-block updates.  Results do not depend
        on the thread count.
    recorder : TrajectoryRecorder, optional
        Receives every iterate for convergence diagnostics.
    reweight : callable, optional
        Called with the state before each iteration; must return fresh
        PenaltyWeights.  Used by the per-iteration adaptive variant.
    return_state : bool
        Also return the final AdmmState for warm-starting.

    Returns
    -------
    FitResult, or (FitResult, AdmmState) when ``return_state`` is set.

    Raises
    ------
    SolverDivergence
        If an iterate turns non-finite.  Hitting ``max_iter`` is not an
        error; the result is returned with ``converged=False``.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    if lam < 0.0:
        raise ValueError("lam must be non-negative")
    if weights.alpha.shape != (design.p,):
        raise ValueError("weights must have length %d" % design.p)
    state = init.copy() if init is not None else AdmmState.zeros(design)
    if [len(b) for b in state.beta] != [int(s) for s in design.partition.sizes]:
        raise ValueError("warm-start state does not match the partition")
    etas = block_etas(design, cfg) if cfg.variant == "prox" else None
    pool = None
    if threads > 1 and design.G > 1:
        pool = ThreadPoolExecutor(max_workers=min(threads, design.G))
    start_iteration = state.iteration
    history = np.empty((cfg.max_iter, 2))
    converged = False
    ran = 0
    try:
        for k in range(cfg.max_iter):
            if reweight is not None:
                weights = reweight(state)
            primal, dual = admm_step(state, design, weights, lam, cfg, etas, pool)
            if not (math.isfinite(primal) and math.isfinite(dual)):
                raise SolverDivergence(k + 1)
            history[k] = (primal, dual)
            ran = k + 1
            if recorder is not None:
                obj = None
                if recorder.track_objective:
                    obj = _objective_from_state(state, design, weights, lam)
                recorder.observe(state, obj)
            if primal <= cfg.tol and dual <= cfg.tol:
                converged = True
                break
    finally:
        if pool is not None:
            pool.shutdown()
    beta_plus = state.beta_plus()
    result = FitResult(
        beta0=state.beta0,
        beta_plus=beta_plus,
        lam=float(lam),
        iterations=state.iteration - start_iteration,
        converged=converged,
        objective=_objective_from_design(design, weights, lam, state.beta0, beta_plus),
        residual_history=history[:ran].copy(),
        support=np.flatnonzero(np.abs(beta_plus) > cfg.support_eps),
    )
    if return_state:
        return result, state
    return result


def dist_residual_weight(theta, d1=0.25):
    """Weight of the aggregate-residual term in the distance monitor."""
    if not 0.0 < theta:
        raise ValueError("theta must be positive")
    if not 0.0 < d1 < 1.0:
        raise ValueError("d1 must lie in (0, 1)")
    return 1.0 + d1 - d1 * theta - (1.0 - d1) * min(theta, 1.0 / theta)


def dist_monitor(trajectory, reference, design, cfg, etas=None, d1=0.25):
    """Distance-style merit value of each snapshot against a reference.

    The quantity combines the block-wise deviation of the constraint
    images from their average, the proximal seminorms (twice: once inside
    the first sum and once on their own), the slack deviation, the last
    slack movement, and a weighted aggregate residual.  Along a convergent
    run it contracts linearly, which is what the diagnostics look for.

    ``etas`` supplies the proximal majorization constants; pass None for
    the coordinate-descent variant, whose proximal terms vanish.  The
    intercept block is solved exactly, so it never contributes a seminorm.
    """
    snaps = list(getattr(trajectory, "snapshots", trajectory))
    if not snaps:
        raise ValueError("empty trajectory")
    G = design.G
    m1 = dist_residual_weight(cfg.theta, d1)
    share = 1.0 / (G + 1.0)
    out = np.empty(len(snaps))
    for idx, snap in enumerate(snaps):
        diffs = [design.y * (snap.beta0 - reference.beta0)]
        for g in range(G):
            diffs.append(design.block(g) @ (snap.beta[g] - reference.beta[g]))
        total = _fsum(diffs)
        value = 0.0
        for d in diffs:
            dev = d - share * total
            value += float(dev @ dev)
        if etas is not None:
            semi = 0.0
            for g in range(G):
                db = snap.beta[g] - reference.beta[g]
                semi += etas[g] * float(db @ db) - cfg.phi * float(diffs[g + 1] @ diffs[g + 1])
            value += 2.0 * semi
        dz = snap.z - reference.z
        value += float(dz @ dz)
        zstep = snap.z - snap.z_prev
        value += (G / (G + 1.0)) * float(zstep @ zstep)
        agg = total + dz
        value += m1 * share * float(agg @ agg)
        out[idx] = value
    return out
