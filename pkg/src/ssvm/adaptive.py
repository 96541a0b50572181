"""Two-step adaptive reweighting.

Stage one solves the plain l1 problem at penalty ``upsilon * lam``; its
coefficient magnitudes feed a SCAD-derivative weight for each feature,
and stage two re-solves with those weights held fixed (one reweighting
step).  Large stage-one coefficients get weight zero and escape further
shrinkage, small ones keep the full penalty.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .data import PenaltyWeights, SolverConfig
from .engine import fit_weighted_l1_svm


@dataclass
class TwoStepConfig:
    """Settings for the two-step procedure.

    ``upsilon`` scales the stage-one penalty relative to lam, ``scad_a``
    is the concavity knob (must exceed 2), and ``per_iteration_weights``
    switches stage two to recomputing the weights from the running iterate
    before every iteration instead of freezing them.
    """

    upsilon: float = 1.0
    scad_a: float = 3.7
    stage1: SolverConfig = field(default_factory=SolverConfig)
    stage2: SolverConfig = field(default_factory=SolverConfig)
    per_iteration_weights: bool = False

    def __post_init__(self):
        if not self.upsilon > 0.0:
            raise ValueError("upsilon must be positive")
        if not self.scad_a > 2.0:
            raise ValueError("scad_a must exceed 2")


def scad_derivative(t, lam, a=3.7):
    """Derivative of the SCAD penalty at |t|.

    Equals lam on [0, lam], decays linearly as ``(a lam - t)_+ / (a - 1)``
    beyond, and is identically zero past ``a lam``.
    """
    if not a > 2.0:
        raise ValueError("a must exceed 2")
    if lam < 0.0:
        raise ValueError("lam must be non-negative")
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0.0):
        raise ValueError("t must be non-negative")
    return np.where(t <= lam, lam, np.maximum(a * lam - t, 0.0) / (a - 1.0))


def adaptive_weights(beta_plus, lam, a=3.7):
    """SCAD-derivative weights, normalized into [0, 1] by dividing by lam."""
    if not lam > 0.0:
        raise ValueError("lam must be positive")
    return PenaltyWeights(scad_derivative(np.abs(beta_plus), lam, a) / lam)


def two_step_fit(design, lam, cfg=None, variant=None, init=None, threads=1, return_states=False):
    """Run both stages and return the stage-two fit.

    Parameters
    ----------
    design : SignedDesign
    lam : float
        Stage-two penalty level; stage one runs at ``upsilon * lam``.
    cfg : TwoStepConfig, optional
    variant : {"cd", "prox"}, optional
        Overrides the block-update variant of both stages.
    init : AdmmState, optional
        Warm start for stage one (stage two always warm-starts from the
        stage-one state).
    return_states : bool
        Also return the final stage-one and stage-two states, in that
        order, for path-wise warm starting.

    The returned FitResult carries the stage-one fit in ``stage1``.
    """
    cfg = cfg if cfg is not None else TwoStepConfig()
    stage1_cfg, stage2_cfg = cfg.stage1, cfg.stage2
    if variant is not None:
        stage1_cfg = replace(stage1_cfg, variant=variant)
        stage2_cfg = replace(stage2_cfg, variant=variant)
    ones = PenaltyWeights.ones(design.p)
    stage1, s1_state = fit_weighted_l1_svm(
        design,
        ones,
        cfg.upsilon * lam,
        stage1_cfg,
        init=init,
        threads=threads,
        return_state=True,
    )
    weights = adaptive_weights(stage1.beta_plus, lam, cfg.scad_a)
    reweight = None
    if cfg.per_iteration_weights:
        def reweight(state):
            return adaptive_weights(state.beta_plus(), lam, cfg.scad_a)
    fit, s2_state = fit_weighted_l1_svm(
        design,
        weights,
        lam,
        stage2_cfg,
        init=s1_state,
        threads=threads,
        reweight=reweight,
        return_state=True,
    )
    fit.stage1 = stage1
    if return_states:
        return fit, s1_state, s2_state
    return fit
