"""The three weighted-average transition-matrix regularizers.

Each method replaces the MLE matrix for action ``a`` with a blend
``(1 - eps) * T_mle(a) + eps * T_other``:

* Dirichlet posterior mean: T_other is the prior-mean row, with a per
  state-action blend weight eps = sum(alpha) / (sum(c) + sum(alpha));
* discount blend: T_other is the zero matrix, leaving substochastic rows
  that sum to 1 - eps (equivalent to planning with the lowered discount
  (1 - eps) * gamma);
* stochastic-policy blend: T_other is the average of all actions'
  matrices, the transitions seen when every policy executes a uniform
  random action with probability eps.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .estimation import CountsTensor, EstimatedModel, mle_model

METHODS = ("dirichlet", "discount", "eps_greedy", "none")


@dataclass(frozen=True)
class DirichletPrior:
    """Per state-action Dirichlet parameters over successor states."""

    alpha: np.ndarray  # (n_states, n_actions, n_states), nonnegative

    def __post_init__(self):
        if np.any(self.alpha < 0):
            raise ValueError("Dirichlet parameters must be nonnegative")


@dataclass(frozen=True)
class RegularizedModel:
    """Blended per-action matrices plus the blend metadata.

    ``eps_per_pair`` reports the realized blend weight for each state-action
    pair (constant for discount and the stochastic-policy blend, data
    dependent for the Dirichlet posterior). ``gamma_l`` is the equivalent
    lowered discount, recorded for the discount method only.
    """

    t_reg: np.ndarray   # (n_actions, n_states, n_states)
    r_hat: np.ndarray   # (n_states, n_actions)
    method: str
    strength: float
    effective_gamma: float
    eps_per_pair: np.ndarray | None = None
    gamma_l: float | None = None


def uniform_prior(magnitude: float, n_states: int, n_actions: int) -> DirichletPrior:
    """Uniform Dirichlet prior with total parameter mass ``magnitude`` per pair."""
    if magnitude < 0:
        raise ValueError(f"prior magnitude must be nonnegative, got {magnitude}")
    alpha = np.full((n_states, n_actions, n_states), magnitude / n_states)
    return DirichletPrior(alpha)


def dirichlet_posterior_mean(counts: CountsTensor, prior: DirichletPrior,
                             gamma: float) -> RegularizedModel:
    """Posterior-mean transition rows (c + alpha) / (sum c + sum alpha).

    Pairs with neither counts nor prior mass fall back to a uniform row,
    matching the MLE default for unvisited pairs.
    """
    n, n_actions = counts.n_states, counts.n_actions
    if prior.alpha.shape != counts.c.shape:
        raise ValueError(
            f"prior shape {prior.alpha.shape} does not match counts shape {counts.c.shape}"
        )
    est = mle_model(counts)
    posterior = counts.c + prior.alpha
    totals = posterior.sum(axis=2)                       # (n_states, n_actions)
    safe = np.maximum(totals, 1e-300)
    rows = np.where((totals > 0)[:, :, None], posterior / safe[:, :, None], 1.0 / n)
    alpha_sums = prior.alpha.sum(axis=2)
    eps = np.divide(alpha_sums, safe, out=np.zeros_like(alpha_sums), where=totals > 0)
    return RegularizedModel(
        t_reg=np.ascontiguousarray(np.moveaxis(rows, 1, 0)),
        r_hat=est.r_hat,
        method="dirichlet",
        strength=float(alpha_sums.mean()),
        effective_gamma=gamma,
        eps_per_pair=eps,
    )


def discount_blend(model: EstimatedModel, eps: float, gamma: float) -> RegularizedModel:
    """Blend each matrix with zeros: rows sum to 1 - eps, planned with true gamma."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}")
    n, n_actions = model.r_hat.shape
    return RegularizedModel(
        t_reg=(1.0 - eps) * model.t_hat,
        r_hat=model.r_hat,
        method="discount",
        strength=eps,
        effective_gamma=gamma,
        eps_per_pair=np.full((n, n_actions), eps),
        gamma_l=(1.0 - eps) * gamma,
    )


def eps_greedy_blend(model: EstimatedModel, eps: float, gamma: float) -> RegularizedModel:
    """Blend each matrix with the average over all actions' matrices."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}")
    n, n_actions = model.r_hat.shape
    mean_t = model.t_hat.mean(axis=0)
    return RegularizedModel(
        t_reg=(1.0 - eps) * model.t_hat + eps * mean_t,
        r_hat=model.r_hat,
        method="eps_greedy",
        strength=eps,
        effective_gamma=gamma,
        eps_per_pair=np.full((n, n_actions), eps),
    )


def unregularized(model: EstimatedModel, gamma: float) -> RegularizedModel:
    """Pass the MLE through untouched (the 'none' baseline)."""
    n, n_actions = model.r_hat.shape
    return RegularizedModel(
        t_reg=model.t_hat.copy(),
        r_hat=model.r_hat,
        method="none",
        strength=0.0,
        effective_gamma=gamma,
        eps_per_pair=np.zeros((n, n_actions)),
    )


def regularize(model: EstimatedModel, counts: CountsTensor, method: str,
               strength: float, gamma: float) -> RegularizedModel:
    """Dispatch on method name; strength is eps or the prior magnitude."""
    if method == "dirichlet":
        prior = uniform_prior(strength, counts.n_states, counts.n_actions)
        reg = dirichlet_posterior_mean(counts, prior, gamma)
        # report the swept magnitude rather than the float-summed diagnostic
        return replace(reg, strength=float(strength))
    if method == "discount":
        return discount_blend(model, strength, gamma)
    if method == "eps_greedy":
        return eps_greedy_blend(model, strength, gamma)
    if method == "none":
        if strength != 0.0:
            raise ValueError("method 'none' only supports strength 0")
        return unregularized(model, gamma)
    raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")


def implied_prior_magnitude(gamma: float, gamma_l: float, count_sum: float,
                            n_states: int) -> float:
    """Per-entry uniform Dirichlet parameter matching discount regularization.

    Lowering the discount from gamma to gamma_l acts like a uniform prior
    with every parameter equal to ((gamma - gamma_l) / gamma_l) * (sum c / N);
    note the implied prior grows with the visit count of the pair.
    """
    if gamma_l <= 0.0:
        raise ValueError("gamma_l must be positive (formula is singular at 0)")
    if not gamma_l <= gamma < 1.0:
        raise ValueError(f"need 0 < gamma_l <= gamma < 1, got gamma={gamma}, gamma_l={gamma_l}")
    if count_sum < 0:
        raise ValueError("count_sum must be nonnegative")
    return (gamma - gamma_l) / gamma_l * (count_sum / n_states)


def eps_from_gammas(gamma: float, gamma_l: float) -> float:
    """Blend weight equivalent to lowering the discount: (gamma - gamma_l) / gamma."""
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    if not 0.0 <= gamma_l <= gamma:
        raise ValueError(f"need 0 <= gamma_l <= gamma, got gamma={gamma}, gamma_l={gamma_l}")
    return (gamma - gamma_l) / gamma


def gamma_l_from_eps(gamma: float, eps: float) -> float:
    """Inverse of eps_from_gammas."""
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must be in [0, 1], got {eps}")
    return (1.0 - eps) * gamma


def eps_from_prior(alpha_sum: float, count_sum: float) -> float:
    """Blend weight of the posterior mean: sum(alpha) / (sum(c) + sum(alpha))."""
    denom = count_sum + alpha_sum
    if denom <= 0.0:
        raise ValueError("count_sum + alpha_sum must be positive")
    return alpha_sum / denom


def alpha_sum_from_eps(eps: float, count_sum: float) -> float:
    """Inverse of eps_from_prior: the prior mass realizing a given blend weight."""
    if not 0.0 <= eps < 1.0:
        raise ValueError(f"eps must be in [0, 1), got {eps}")
    return eps / (1.0 - eps) * count_sum
