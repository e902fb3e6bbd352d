"""Sufficient statistics and the maximum-likelihood model of a dataset.

Unvisited state-action pairs fall back to a uniform transition row and a
mean reward of 0.50. The fallback is applied verbatim in every
environment, including those whose true rewards are negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset

UNVISITED_REWARD = 0.50


@dataclass(frozen=True)
class CountsTensor:
    """Transition counts and reward sums: the sufficient statistics."""

    c: np.ndarray            # (n_states, n_actions, n_states) int64
    reward_sum: np.ndarray   # (n_states, n_actions)
    visit_count: np.ndarray  # (n_states, n_actions) int64

    @property
    def n_states(self) -> int:
        return self.c.shape[0]

    @property
    def n_actions(self) -> int:
        return self.c.shape[1]


@dataclass(frozen=True)
class EstimatedModel:
    """MLE transition matrices and mean rewards, with visit counts attached."""

    t_hat: np.ndarray        # (n_actions, n_states, n_states)
    r_hat: np.ndarray        # (n_states, n_actions)
    visit_count: np.ndarray  # (n_states, n_actions) int64


def count(dataset: Dataset, n_states: int, n_actions: int) -> CountsTensor:
    """Accumulate transition counts and reward sums over every step."""
    c = np.zeros((n_states, n_actions, n_states), dtype=np.int64)
    reward_sum = np.zeros((n_states, n_actions))
    for ti, traj in enumerate(dataset.trajectories):
        for si, step in enumerate(traj.steps):
            ok = (0 <= step.state < n_states and 0 <= step.action < n_actions
                  and 0 <= step.next_state < n_states)
            if not ok:
                raise ValueError(
                    f"trajectory {ti} step {si}: indices {step[:2] + step[3:]} out of"
                    f" range for {n_states} states x {n_actions} actions"
                )
            c[step.state, step.action, step.next_state] += 1
            reward_sum[step.state, step.action] += step.reward
    return CountsTensor(c, reward_sum, c.sum(axis=2))


def mle_model(counts: CountsTensor) -> EstimatedModel:
    """Empirical frequencies per visited pair; uniform rows and reward 0.50 elsewhere."""
    n = counts.n_states
    visits = counts.visit_count
    visited = visits > 0
    denom = np.maximum(visits, 1)[:, :, None]
    rows = np.where(visited[:, :, None], counts.c / denom, 1.0 / n)
    r_hat = np.where(visited, counts.reward_sum / np.maximum(visits, 1), UNVISITED_REWARD)
    t_hat = np.ascontiguousarray(np.moveaxis(rows, 1, 0))
    return EstimatedModel(t_hat, r_hat, visits.copy())
