"""The two experiment metrics: policy loss and transition-matrix MSE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import TabularMdp
from .planning import PlanningProblem, policy_evaluation
from .regularizers import RegularizedModel


@dataclass(frozen=True)
class LossResult:
    loss: float
    v_opt: np.ndarray
    v_reg: np.ndarray


@dataclass(frozen=True)
class MseResult:
    mse_plain: float
    mse_absorbing: float


def policy_loss(true_mdp: TabularMdp, pi_reg: np.ndarray, pi_opt: np.ndarray,
                start_dist: np.ndarray, v_opt: np.ndarray | None = None) -> LossResult:
    """Start-weighted value gap between two policies, both evaluated in the true MDP.

    ``v_opt`` may be passed in when the optimal policy's values were already
    computed (they are constant across replications and strengths).
    """
    problem = PlanningProblem.from_mdp(true_mdp)
    if v_opt is None:
        v_opt = policy_evaluation(problem, pi_opt)
    v_reg = policy_evaluation(problem, pi_reg)
    loss = float(np.dot(start_dist, v_opt - v_reg))
    return LossResult(loss, v_opt, v_reg)


def _augment_with_absorbing(t: np.ndarray, exit_mass: np.ndarray) -> np.ndarray:
    """Grow each matrix by one absorbing state that receives ``exit_mass`` per row."""
    n_actions, n, _ = t.shape
    aug = np.zeros((n_actions, n + 1, n + 1))
    aug[:, :n, :n] = t
    aug[:, :n, n] = exit_mass
    aug[:, n, n] = 1.0
    return aug


def transition_mse(t_true: np.ndarray, reg: RegularizedModel) -> MseResult:
    """Mean squared entrywise difference between true and regularized matrices.

    For the discount method the rows are substochastic; the missing mass is
    an implicit absorbing state entered with probability eps each step.
    ``mse_absorbing`` therefore also compares the matrices augmented with
    that state (true rows gain a zero column, regularized rows their exit
    mass, and the absorbing state self-loops in both). For the other
    methods it equals ``mse_plain``.
    """
    if t_true.shape != reg.t_reg.shape:
        raise ValueError(f"shape mismatch: true {t_true.shape} vs regularized {reg.t_reg.shape}")
    mse_plain = float(np.mean((t_true - reg.t_reg) ** 2))
    if reg.method != "discount":
        return MseResult(mse_plain, mse_plain)
    aug_true = _augment_with_absorbing(t_true, np.zeros(t_true.shape[:2]))
    aug_reg = _augment_with_absorbing(reg.t_reg, 1.0 - reg.t_reg.sum(axis=2))
    mse_absorbing = float(np.mean((aug_true - aug_reg) ** 2))
    return MseResult(mse_plain, mse_absorbing)
