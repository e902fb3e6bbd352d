"""Tabular batch-RL regularization toolkit.

Three transition-matrix regularizers in a common weighted-average form,
exact policy iteration over the regularized models, and a deterministic
Monte-Carlo harness measuring policy loss and transition-matrix MSE.
"""

from .data import (CollectionConfig, Dataset, StartMode, Step, Trajectory,
                   generate_dataset, sample_trajectory, write_dataset_csv)
from .environments import (DEFAULT_GRID_TOPOLOGY, GridNoiseConfig, MdpSpecError,
                           MdpValidationError, TopologyConfig, build_cliff_walk,
                           build_interconnected_grid, build_two_goals,
                           cliff_near_goal_states, load_mdp_spec, save_mdp_spec)
from .estimation import CountsTensor, EstimatedModel, count, mle_model
from .evaluation import LossResult, MseResult, policy_loss, transition_mse
from .harness import (ConfigError, ExperimentConfig, ResultRow, builtin_presets,
                      config_hash, emit_csv, emit_summary, load_experiment_config,
                      run_experiment)
from .mdp import DEFAULT_GAMMA, TabularMdp, apply_reward_shift, validate_mdp
from .planning import (PlanningProblem, EquivalenceReport, greedy_from_q,
                       policy_evaluation, policy_iteration, q_from_values, q_gaps,
                       uniform_blend_equivalence)
from .regularizers import (DirichletPrior, RegularizedModel, alpha_sum_from_eps,
                           dirichlet_posterior_mean, discount_blend,
                           eps_from_gammas, eps_from_prior, eps_greedy_blend,
                           gamma_l_from_eps, implied_prior_magnitude, regularize,
                           uniform_prior)
from .seeding import child_seed

__version__ = "0.1.0"
