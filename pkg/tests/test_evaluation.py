import numpy as np
import pytest

from mdpreg import (PlanningProblem, RegularizedModel, dirichlet_posterior_mean,
                    discount_blend, policy_iteration, policy_loss,
                    transition_mse, uniform_prior)
from mdpreg.estimation import EstimatedModel
from mdpreg.properties import random_mdp, random_uniform_visit_counts
from tests.test_mdp import make_two_state


def plain_model(t, method="eps_greedy", strength=0.0):
    n = t.shape[1]
    return RegularizedModel(t, np.zeros((n, t.shape[0])), method, strength, 0.95)


class TestPolicyLoss:
    def test_identical_policies_lose_nothing(self):
        mdp = make_two_state()
        pi = np.array([1, 0])
        result = policy_loss(mdp, pi, pi, mdp.start_dist)
        assert result.loss == 0.0

    def test_hand_computed_value_gap(self):
        # optimal: switch at 0, stay at 1 -> V = (1, 2); staying at 0 earns 0,
        # so a point mass at state 0 loses exactly 1
        mdp = make_two_state(gamma=0.5)
        pi_opt = np.array([1, 0])
        pi_reg = np.array([0, 0])
        result = policy_loss(mdp, pi_reg, pi_opt, np.array([1.0, 0.0]))
        np.testing.assert_allclose(result.v_opt, [1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(result.v_reg, [0.0, 2.0], atol=1e-12)
        assert result.loss == pytest.approx(1.0, abs=1e-12)

    def test_loss_nonnegative_against_true_optimum(self):
        rng = np.random.default_rng(23)
        for _ in range(20):
            mdp = random_mdp(rng, 5, 3)
            pi_opt, _ = policy_iteration(PlanningProblem.from_mdp(mdp))
            pi_reg = rng.integers(0, 3, 5)
            result = policy_loss(mdp, pi_reg, pi_opt, mdp.start_dist)
            assert result.loss >= -1e-9

    def test_precomputed_v_opt_matches(self):
        mdp = make_two_state()
        pi_opt = np.array([1, 0])
        pi_reg = np.array([0, 0])
        base = policy_loss(mdp, pi_reg, pi_opt, mdp.start_dist)
        fast = policy_loss(mdp, pi_reg, pi_opt, mdp.start_dist, v_opt=base.v_opt)
        assert fast.loss == base.loss


class TestTransitionMse:
    def test_identical_matrices_have_zero_mse(self):
        t = np.array([[[0.2, 0.8], [0.5, 0.5]]])
        result = transition_mse(t, plain_model(t.copy()))
        assert result.mse_plain == 0.0 and result.mse_absorbing == 0.0

    def test_hand_computed_entrywise_mean(self):
        # one differing row: ((0.5)^2 + (0.5)^2 + 0 + 0) / 4 entries
        t_true = np.array([[[1.0, 0.0], [0.3, 0.7]]])
        t_reg = np.array([[[0.5, 0.5], [0.3, 0.7]]])
        result = transition_mse(t_true, plain_model(t_reg))
        assert result.mse_plain == pytest.approx(0.125, abs=1e-15)
        assert result.mse_absorbing == result.mse_plain

    def test_discount_augmentation_at_full_blend(self):
        # eps = 1 empties every row into the absorbing column; the expected
        # value is recomputed here from explicit block matrices
        t_true = np.array([[[1.0, 0.0], [0.3, 0.7]]])
        model = EstimatedModel(t_true.copy(), np.zeros((2, 1)),
                               np.ones((2, 1), dtype=np.int64))
        reg = discount_blend(model, 1.0, 0.95)
        result = transition_mse(t_true, reg)

        aug_true = np.array([[1.0, 0.0, 0.0], [0.3, 0.7, 0.0], [0.0, 0.0, 1.0]])
        aug_reg = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 1.0], [0.0, 0.0, 1.0]])
        expected = ((aug_true - aug_reg) ** 2).mean()
        assert result.mse_absorbing == pytest.approx(expected, abs=1e-15)
        assert result.mse_plain == pytest.approx((t_true ** 2).mean(), abs=1e-15)

    def test_discount_augmented_column_holds_eps(self):
        rng = np.random.default_rng(3)
        t_true = rng.dirichlet(np.ones(3), size=(2, 3))
        model = EstimatedModel(np.array(t_true), np.zeros((3, 2)),
                               np.ones((3, 2), dtype=np.int64))
        reg = discount_blend(model, 0.4, 0.95)
        result = transition_mse(t_true, reg)
        # (N+1)^2 denominator per action: recompute independently
        diff_core = (t_true - reg.t_reg) ** 2
        per_action = diff_core.sum(axis=(1, 2)) + 3 * 0.4 ** 2
        expected = per_action.sum() / (2 * 16)
        assert result.mse_absorbing == pytest.approx(expected, abs=1e-12)

    def test_shape_mismatch_rejected(self):
        t = np.ones((1, 2, 2)) * 0.5
        with pytest.raises(ValueError, match="shape mismatch"):
            transition_mse(np.ones((1, 3, 3)) / 3, plain_model(t))

    def test_mse_zero_iff_equal(self):
        t = np.array([[[0.2, 0.8], [0.5, 0.5]]])
        nudged = t.copy()
        nudged[0, 0] = [0.2 + 1e-6, 0.8 - 1e-6]
        assert transition_mse(t, plain_model(nudged)).mse_plain > 0.0

    def test_dirichlet_mse_approaches_uniform_limit(self):
        rng = np.random.default_rng(41)
        counts = random_uniform_visit_counts(rng, 4, 2, row_total=25)
        t_true = rng.dirichlet(np.ones(4), size=(2, 4))
        uniform_mse = float(((t_true - 0.25) ** 2).mean())

        def curve(magnitudes):
            values = []
            for m in magnitudes:
                reg = dirichlet_posterior_mean(counts, uniform_prior(float(m), 4, 2),
                                               0.95)
                values.append(transition_mse(np.asarray(t_true), reg).mse_plain)
            return np.asarray(values)

        assert curve([1e12])[0] == pytest.approx(uniform_mse, abs=1e-9)
        # continuity: refining the magnitude grid 10x shrinks the largest jump
        # proportionally
        coarse = np.abs(np.diff(curve(np.linspace(0, 50, 26)))).max()
        fine = np.abs(np.diff(curve(np.linspace(0, 50, 251)))).max()
        assert fine <= 0.15 * coarse
