"""Exact policy evaluation and policy iteration over tabular models.

Matrices may be substochastic (rows summing to at most 1, as produced by
the discount blend); gamma < 1 together with row sums <= 1 keeps the
evaluation system nonsingular. Evaluation is a direct LU solve, so all
equivalence properties can be tested at solver precision.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mdp import TIE_TOL, TabularMdp
from .regularizers import RegularizedModel

_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class PlanningProblem:
    t: np.ndarray      # (n_actions, n_states, n_states), rows sum to <= 1
    r: np.ndarray      # (n_states, n_actions)
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "t", np.asarray(self.t, dtype=float))
        object.__setattr__(self, "r", np.asarray(self.r, dtype=float))
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if np.any(self.t < -1e-12):
            raise ValueError("transition matrices must be nonnegative")
        if np.any(self.t.sum(axis=2) > 1.0 + 1e-9):
            raise ValueError("transition rows must sum to at most 1")

    @property
    def n_states(self) -> int:
        return self.t.shape[1]

    @property
    def n_actions(self) -> int:
        return self.t.shape[0]

    @classmethod
    def from_mdp(cls, mdp: TabularMdp) -> "PlanningProblem":
        return cls(mdp.transition, mdp.reward_mean, mdp.gamma)

    @classmethod
    def from_regularized(cls, reg: RegularizedModel) -> "PlanningProblem":
        return cls(reg.t_reg, reg.r_hat, reg.effective_gamma)


def policy_evaluation(problem: PlanningProblem, policy: np.ndarray) -> np.ndarray:
    """Solve V = R_pi + gamma * T_pi V directly."""
    n = problem.n_states
    idx = np.arange(n)
    t_pi = problem.t[policy, idx, :]
    r_pi = problem.r[idx, policy]
    return np.linalg.solve(np.eye(n) - problem.gamma * t_pi, r_pi)


def q_from_values(problem: PlanningProblem, v: np.ndarray) -> np.ndarray:
    """One-step lookahead: Q[s, a] = r[s, a] + gamma * t[a, s, :] @ v."""
    return problem.r + problem.gamma * (problem.t @ v).T


def greedy_from_q(q: np.ndarray, tie_tol: float = TIE_TOL) -> np.ndarray:
    """Lowest action index within tie_tol of each row's maximum."""
    cutoff = q.max(axis=1, keepdims=True) - tie_tol
    return (q >= cutoff).argmax(axis=1)


def q_gaps(q: np.ndarray) -> np.ndarray:
    """Per-state gap between the best and second-best action values."""
    if q.shape[1] < 2:
        return np.full(q.shape[0], np.inf)
    top2 = np.partition(q, q.shape[1] - 2, axis=1)[:, -2:]
    return top2[:, 1] - top2[:, 0]


def policy_iteration(problem: PlanningProblem, tie_tol: float = TIE_TOL,
                     initial_policy: np.ndarray | None = None
                     ) -> tuple[np.ndarray, np.ndarray]:
    """Howard policy iteration; returns the optimal policy and its Q-function.

    Improvement keeps the incumbent action whenever it is still maximal, so
    every policy change strictly increases the value and the sweep cannot
    cycle. The returned policy is re-canonicalized through greedy_from_q,
    breaking all ties toward the lowest action index within tie_tol.
    """
    n = problem.n_states
    idx = np.arange(n)
    if initial_policy is None:
        policy = np.zeros(n, dtype=np.int64)
    else:
        policy = np.asarray(initial_policy, dtype=np.int64).copy()

    for _ in range(_MAX_SWEEPS):
        v = policy_evaluation(problem, policy)
        q = q_from_values(problem, v)
        best = q.max(axis=1)
        improved = np.where(q[idx, policy] >= best, policy, q.argmax(axis=1))
        if np.array_equal(improved, policy):
            return greedy_from_q(q, tie_tol), q
        policy = improved
    raise RuntimeError(f"policy iteration did not converge in {_MAX_SWEEPS} sweeps")


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of the lowered-discount vs uniform-blend comparison."""

    policy_lowered: np.ndarray
    policy_blended: np.ndarray
    compared: np.ndarray  # states with a clear Q-gap in both problems
    agree: bool


def uniform_blend_equivalence(mdp: TabularMdp, eps: float,
                              tie_tol: float = TIE_TOL) -> EquivalenceReport:
    """Compare optimal policies of (T, (1-eps)*gamma) and ((1-eps)T + eps*T_unif, gamma).

    The two problems provably share an optimal policy. States where either
    has a Q-tie within tie_tol are excluded: the guarantee is a common
    optimal policy, not a common tie-break.
    """
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must be in [0, 1), got {eps}")
    n = mdp.n_states
    lowered = PlanningProblem(mdp.transition, mdp.reward_mean, (1.0 - eps) * mdp.gamma)
    blended = PlanningProblem((1.0 - eps) * mdp.transition + eps / n,
                              mdp.reward_mean, mdp.gamma)
    pi_low, q_low = policy_iteration(lowered, tie_tol)
    pi_blend, q_blend = policy_iteration(blended, tie_tol)
    compared = (q_gaps(q_low) > tie_tol) & (q_gaps(q_blend) > tie_tol)
    agree = bool(np.all(pi_low[compared] == pi_blend[compared]))
    return EquivalenceReport(pi_low, pi_blend, compared, agree)
