import numpy as np
import pytest

from mdpreg import (PlanningProblem, TabularMdp, apply_reward_shift,
                    policy_evaluation, policy_iteration, q_gaps, validate_mdp)


def make_two_state(gamma=0.5):
    """Action 0 stays put, action 1 switches; staying in state 1 pays 1."""
    t = np.array([
        [[1.0, 0.0], [0.0, 1.0]],   # stay
        [[0.0, 1.0], [1.0, 0.0]],   # switch
    ])
    r = np.array([[0.0, 0.0], [1.0, 0.0]])
    return TabularMdp(t, r, np.zeros((2, 2)), gamma, np.array([0.5, 0.5]))


def test_well_formed_mdp_has_empty_report():
    assert validate_mdp(make_two_state()) == []


def test_row_sum_violation_is_reported():
    t = np.array([[[0.6, 0.6], [0.5, 0.5]]])
    mdp = TabularMdp(t, np.zeros((2, 1)), np.zeros((2, 1)), 0.9, np.array([1.0, 0.0]))
    report = validate_mdp(mdp)
    assert len(report) == 1
    assert "row 0" in report[0] and "1.2" in report[0]


def test_gamma_out_of_range_is_reported():
    mdp = make_two_state(gamma=0.5)
    bad = TabularMdp(mdp.transition, mdp.reward_mean, mdp.reward_std, 1.0, mdp.start_dist)
    assert any("gamma out of range" in msg for msg in validate_mdp(bad))


def test_negative_probability_is_reported():
    t = np.array([[[1.5, -0.5], [0.0, 1.0]]])
    mdp = TabularMdp(t, np.zeros((2, 1)), np.zeros((2, 1)), 0.9, np.array([1.0, 0.0]))
    assert any("negative" in msg for msg in validate_mdp(mdp))


def test_bad_start_dist_is_reported():
    mdp = make_two_state()
    bad = TabularMdp(mdp.transition, mdp.reward_mean, mdp.reward_std, mdp.gamma,
                     np.array([0.7, 0.7]))
    assert any("start_dist sums to 1.4" in msg for msg in validate_mdp(bad))


def test_absorbing_violations_are_reported():
    mdp = make_two_state()
    not_self_loop = TabularMdp(mdp.transition, mdp.reward_mean, mdp.reward_std,
                               mdp.gamma, mdp.start_dist, absorbing={0})
    msgs = validate_mdp(not_self_loop)
    # action 1 switches away from state 0 and state 0 pays nothing, so only
    # the self-loop invariant trips
    assert any("absorbing state 0 is not a self-loop" in m for m in msgs)

    rewarded = TabularMdp(mdp.transition, mdp.reward_mean, mdp.reward_std,
                          mdp.gamma, mdp.start_dist, absorbing={1})
    assert any("nonzero reward_mean" in m for m in validate_mdp(rewarded))


def test_arrays_are_immutable():
    mdp = make_two_state()
    with pytest.raises(ValueError):
        mdp.transition[0, 0, 0] = 0.0
    with pytest.raises(ValueError):
        mdp.start_dist[0] = 1.0


def test_reward_shift_zero_is_identity():
    mdp = make_two_state()
    shifted = apply_reward_shift(mdp, 0.0)
    np.testing.assert_array_equal(shifted.reward_mean, mdp.reward_mean)


def test_reward_shift_raises_value_by_geometric_sum():
    # single absorbing-free self-loop: V = (R + x) / (1 - gamma), so the
    # shift contributes x / (1 - 0.5) = 2
    t = np.ones((1, 1, 1))
    mdp = TabularMdp(t, np.array([[1.0]]), np.zeros((1, 1)), 0.5, np.array([1.0]))
    pi = np.zeros(1, dtype=int)
    v_before = policy_evaluation(PlanningProblem.from_mdp(mdp), pi)
    v_after = policy_evaluation(PlanningProblem.from_mdp(apply_reward_shift(mdp, 1.0)), pi)
    assert v_after[0] - v_before[0] == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("x", [-5.0, 1.0, 100.0])
def test_reward_shift_keeps_optimal_policy(x):
    mdp = make_two_state()
    pi0, q0 = policy_iteration(PlanningProblem.from_mdp(mdp))
    pi_x, q_x = policy_iteration(PlanningProblem.from_mdp(apply_reward_shift(mdp, x)))
    assert np.all(q_gaps(q0) > 1e-6) and np.all(q_gaps(q_x) > 1e-6)
    np.testing.assert_array_equal(pi0, pi_x)


def test_reward_shift_skips_absorbing_states():
    t = np.array([[[1.0, 0.0], [0.0, 1.0]]])
    mdp = TabularMdp(t, np.array([[1.0], [0.0]]), np.zeros((2, 1)), 0.9,
                     np.array([1.0, 0.0]), absorbing={1})
    shifted = apply_reward_shift(mdp, 3.0)
    assert shifted.reward_mean[0, 0] == 4.0
    assert shifted.reward_mean[1, 0] == 0.0
    assert validate_mdp(shifted) == []
