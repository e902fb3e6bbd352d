"""Executable property and acceptance suites.

Each check is an independent route to a result the library must reproduce:
brute-force policy enumeration, explicit stochastic-policy evaluation, the
closed-form matrix blends, and byte-level determinism of the harness. The
CLI `check` verb and the pytest acceptance module both run these.
"""

from __future__ import annotations

import itertools
import os
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .estimation import CountsTensor, EstimatedModel, mle_model
from .harness import (DEFAULT_SEED, builtin_presets, emit_csv, override,
                      run_experiment)
from .mdp import TIE_TOL, TabularMdp, apply_reward_shift
from .planning import (PlanningProblem, policy_evaluation, policy_iteration,
                       q_gaps, uniform_blend_equivalence)
from .regularizers import (dirichlet_posterior_mean, discount_blend,
                           eps_greedy_blend, implied_prior_magnitude,
                           uniform_prior)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def random_mdp(rng: np.random.Generator, n_states: int, n_actions: int,
               gamma: float = 0.95, state_rewards: bool = False) -> TabularMdp:
    """Random dense MDP: Dirichlet(1) rows, uniform(-1, 1) rewards, no absorbing."""
    t = rng.dirichlet(np.ones(n_states), size=(n_actions, n_states))
    if state_rewards:
        r = np.repeat(rng.uniform(-1.0, 1.0, (n_states, 1)), n_actions, axis=1)
    else:
        r = rng.uniform(-1.0, 1.0, (n_states, n_actions))
    return TabularMdp(t, r, np.zeros_like(r), gamma, np.full(n_states, 1.0 / n_states))


def random_uniform_visit_counts(rng: np.random.Generator, n_states: int,
                                n_actions: int, row_total: int) -> CountsTensor:
    """Counts with the same total per (s, a): the uniform-visits condition."""
    c = np.empty((n_states, n_actions, n_states), dtype=np.int64)
    for s in range(n_states):
        for a in range(n_actions):
            c[s, a] = rng.multinomial(row_total, np.full(n_states, 1.0 / n_states))
    reward_sum = rng.uniform(-1.0, 1.0, (n_states, n_actions)) * row_total
    return CountsTensor(c, reward_sum, c.sum(axis=2))


def _estimated_from_mdp(mdp: TabularMdp) -> EstimatedModel:
    ones = np.ones((mdp.n_states, mdp.n_actions), dtype=np.int64)
    return EstimatedModel(mdp.transition.copy(), mdp.reward_mean.copy(), ones)


def _policies_agree_tie_free(pi_a, q_a, pi_b, q_b, tie_tol=TIE_TOL) -> bool:
    compared = (q_gaps(q_a) > tie_tol) & (q_gaps(q_b) > tie_tol)
    return bool(np.all(pi_a[compared] == pi_b[compared]))


def eps_greedy_evaluation(t: np.ndarray, r: np.ndarray, gamma: float,
                          policy: np.ndarray, eps: float) -> np.ndarray:
    """Value of executing ``policy`` eps-greedily: pick policy[s] w.p. 1 - eps,
    a uniform action otherwise. Independent of the blended-matrix route."""
    n = t.shape[1]
    idx = np.arange(n)
    t_exec = (1.0 - eps) * t[policy, idx, :] + eps * t.mean(axis=0)
    r_exec = (1.0 - eps) * r[idx, policy] + eps * r.mean(axis=1)
    return np.linalg.solve(np.eye(n) - gamma * t_exec, r_exec)


def _timed(fn):
    start = time.perf_counter()
    passed, detail = fn()
    return passed, detail, time.perf_counter() - start


def check_uniform_blend(n_mdps: int = 200, seed: int = 20_001) -> CheckResult:
    """Lowered discount vs uniform blend share an optimal policy."""
    def body():
        rng = np.random.default_rng(seed)
        eps_values = (0.1, 0.3, 0.5, 0.7, 0.9)
        failures = 0
        total = 0
        for _ in range(n_mdps):
            mdp = random_mdp(rng, int(rng.integers(2, 7)), int(rng.integers(2, 4)))
            for eps in eps_values:
                total += 1
                if not uniform_blend_equivalence(mdp, eps).agree:
                    failures += 1
        return failures == 0, f"{total - failures}/{total} agreements"
    passed, detail, secs = _timed(body)
    return CheckResult("uniform_blend_equivalence", passed and secs < 30.0, detail, secs)


def check_discount_equiv(n_mdps: int = 200, seed: int = 20_002) -> CheckResult:
    """Discount blend at gamma plans identically to the MLE at lowered gamma."""
    def body():
        rng = np.random.default_rng(seed)
        eps_values = (0.1, 0.3, 0.5, 0.7, 0.9)
        failures, total = 0, 0
        for _ in range(n_mdps):
            mdp = random_mdp(rng, int(rng.integers(2, 7)), int(rng.integers(2, 4)))
            est = _estimated_from_mdp(mdp)
            for eps in eps_values:
                total += 1
                reg = discount_blend(est, eps, mdp.gamma)
                pi_a, q_a = policy_iteration(PlanningProblem.from_regularized(reg))
                lowered = PlanningProblem(est.t_hat, est.r_hat, (1.0 - eps) * mdp.gamma)
                pi_b, q_b = policy_iteration(lowered)
                if not _policies_agree_tie_free(pi_a, q_a, pi_b, q_b):
                    failures += 1
        return failures == 0, f"{total - failures}/{total} policy matches"
    passed, detail, secs = _timed(body)
    return CheckResult("discount_blend_equals_lowered_gamma", passed and secs < 30.0,
                       detail, secs)


def check_dirichlet_matrix_form(n_instances: int = 20, seed: int = 20_003) -> CheckResult:
    """Under uniform visits the posterior mean is the exact matrix blend."""
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_instances):
            n = int(rng.integers(2, 8))
            a = int(rng.integers(1, 4))
            total = int(rng.integers(5, 50))
            counts = random_uniform_visit_counts(rng, n, a, total)
            t_mle = mle_model(counts).t_hat
            for m in (1.0, 10.0, 100.0):
                reg = dirichlet_posterior_mean(counts, uniform_prior(m, n, a), 0.95)
                eps = m / (total + m)
                blend = (1.0 - eps) * t_mle + eps / n
                worst = max(worst, float(np.abs(reg.t_reg - blend).max()))
        return worst <= 1e-12, f"max entrywise deviation {worst:.2e}"
    passed, detail, secs = _timed(body)
    return CheckResult("dirichlet_matrix_form", passed, detail, secs)


def check_implied_prior_equiv(n_instances: int = 100, seed: int = 20_004) -> CheckResult:
    """Discount blend and its implied uniform Dirichlet prior plan identically."""
    def body():
        rng = np.random.default_rng(seed)
        gamma = 0.95
        failures = 0
        for _ in range(n_instances):
            n = int(rng.integers(2, 7))
            a = int(rng.integers(2, 4))
            total = int(rng.integers(5, 40))
            counts = random_uniform_visit_counts(rng, n, a, total)
            est = mle_model(counts)
            eps = float(rng.choice([0.1, 0.3, 0.5, 0.7, 0.9]))
            gamma_l = (1.0 - eps) * gamma
            alpha_i = implied_prior_magnitude(gamma, gamma_l, total, n)
            reg_disc = discount_blend(est, eps, gamma)
            reg_dir = dirichlet_posterior_mean(counts, uniform_prior(n * alpha_i, n, a),
                                               gamma)
            pi_a, q_a = policy_iteration(PlanningProblem.from_regularized(reg_disc))
            pi_b, q_b = policy_iteration(PlanningProblem.from_regularized(reg_dir))
            if not _policies_agree_tie_free(pi_a, q_a, pi_b, q_b):
                failures += 1
        return failures == 0, f"{n_instances - failures}/{n_instances} policy matches"
    passed, detail, secs = _timed(body)
    return CheckResult("implied_prior_equivalence", passed, detail, secs)


def check_eps_greedy_equiv(n_mdps: int = 100, seed: int = 20_005) -> CheckResult:
    """Greedy planning on blended matrices is optimal over eps-greedy executions."""
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(n_mdps):
            n = int(rng.integers(2, 5))
            mdp = random_mdp(rng, n, 2, state_rewards=True)
            est = _estimated_from_mdp(mdp)
            for eps in (0.25, 0.5):
                reg = eps_greedy_blend(est, eps, mdp.gamma)
                pi_hat, _ = policy_iteration(PlanningProblem.from_regularized(reg))
                v_hat = eps_greedy_evaluation(mdp.transition, mdp.reward_mean,
                                              mdp.gamma, pi_hat, eps)
                v_best = np.full(n, -np.inf)
                for assignment in itertools.product(range(2), repeat=n):
                    pi = np.array(assignment)
                    v = eps_greedy_evaluation(mdp.transition, mdp.reward_mean,
                                              mdp.gamma, pi, eps)
                    v_best = np.maximum(v_best, v)
                worst = max(worst, float(np.abs(v_hat - v_best).max()))
        return worst <= 1e-9, f"max value gap to brute force {worst:.2e}"
    passed, detail, secs = _timed(body)
    return CheckResult("eps_greedy_planning_equivalence", passed, detail, secs)


def check_reward_shift(n_mdps: int = 100, seed: int = 20_006) -> CheckResult:
    """Adding x to all rewards shifts Q by x/(1-gamma) and keeps the policy."""
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        failures = 0
        for _ in range(n_mdps):
            mdp = random_mdp(rng, int(rng.integers(2, 7)), int(rng.integers(2, 4)))
            pi0, q0 = policy_iteration(PlanningProblem.from_mdp(mdp))
            for x in (-5.0, 1.0, 100.0):
                shifted = apply_reward_shift(mdp, x)
                pi_x, q_x = policy_iteration(PlanningProblem.from_mdp(shifted))
                worst = max(worst, float(np.abs(q_x - q0 - x / (1.0 - mdp.gamma)).max()))
                if not _policies_agree_tie_free(pi0, q0, pi_x, q_x):
                    failures += 1
        ok = worst <= 1e-9 and failures == 0
        return ok, f"max Q-shift error {worst:.2e}, {failures} policy changes"
    passed, detail, secs = _timed(body)
    return CheckResult("reward_shift_invariance", passed, detail, secs)


def check_pi_oracle(n_problems: int = 500, seed: int = 20_007) -> CheckResult:
    """Policy iteration matches exhaustive policy enumeration."""
    def body():
        rng = np.random.default_rng(seed)
        worst = 0.0
        for i in range(n_problems):
            n = 2 if i % 2 == 0 else 3
            mdp = random_mdp(rng, n, 2)
            problem = PlanningProblem.from_mdp(mdp)
            pi, _ = policy_iteration(problem)
            v_pi = policy_evaluation(problem, pi)
            v_best = np.full(n, -np.inf)
            for assignment in itertools.product(range(2), repeat=n):
                v = policy_evaluation(problem, np.array(assignment))
                v_best = np.maximum(v_best, v)
            worst = max(worst, float(np.abs(v_pi - v_best).max()))
        return worst <= 1e-9, f"max value gap to enumeration {worst:.2e}"
    passed, detail, secs = _timed(body)
    return CheckResult("policy_iteration_oracle", passed, detail, secs)


def default_workers() -> int:
    return max(1, min(8, os.cpu_count() or 1))


def check_loss_curves(replications: int = 1000, workers: int | None = None,
                      seed: int = DEFAULT_SEED) -> CheckResult:
    """Regularization never hurts at the curve minimum; on the cliff the
    stochastic-policy blend beats no regularization by >= 3 standard errors."""
    workers = workers or default_workers()

    def body():
        presets = builtin_presets()
        problems = []
        details = []
        for name in ("cliff-random", "twogoals-random", "grid-random"):
            cfg = override(presets[name], replications=replications,
                           master_seed=seed, workers=workers)
            rows = run_experiment(cfg)
            by_method: dict[str, list] = {}
            for row in rows:
                by_method.setdefault(row.method, []).append(row)
            for method, mrows in by_method.items():
                at_zero = next(r for r in mrows if r.strength == 0.0)
                best = min(mrows, key=lambda r: r.mean_loss)
                if best.mean_loss > at_zero.mean_loss + 1e-12:
                    problems.append(f"{name}/{method}: min loss {best.mean_loss:.4g}"
                                    f" above strength-0 loss {at_zero.mean_loss:.4g}")
                if name == "cliff-random" and method == "eps_greedy":
                    margin = at_zero.mean_loss - best.mean_loss
                    se = float(np.hypot(at_zero.stderr_loss, best.stderr_loss))
                    details.append(f"cliff eps_greedy improvement {margin:.3g}"
                                   f" ({margin / se if se else float('inf'):.1f} se)")
                    if margin < 3.0 * se:
                        problems.append(
                            f"cliff-random/eps_greedy: improvement {margin:.4g}"
                            f" below 3 x stderr {se:.4g}")
        detail = "; ".join(details + problems) or "all curves within bounds"
        return not problems, detail
    passed, detail, secs = _timed(body)
    return CheckResult("qualitative_loss_curves", passed and secs < 600.0, detail, secs)


def check_determinism(replications: int = 24, workers: int = 8,
                      seed: int = DEFAULT_SEED) -> CheckResult:
    """Byte-identical CSV on rerun; aggregates independent of worker count."""
    def body():
        cfg = override(builtin_presets()["cliff-random"], replications=replications,
                       master_seed=seed, workers=1)
        with tempfile.TemporaryDirectory() as tmp:
            p1, p2 = Path(tmp) / "a.csv", Path(tmp) / "b.csv"
            emit_csv(run_experiment(cfg), p1)
            emit_csv(run_experiment(cfg), p2)
            if p1.read_bytes() != p2.read_bytes():
                return False, "rerun produced different CSV bytes"
        rows_serial = run_experiment(cfg)
        rows_parallel = run_experiment(override(cfg, workers=workers))
        if rows_serial != rows_parallel:
            return False, f"workers=1 and workers={workers} aggregates differ"
        return True, "byte-identical reruns; worker count irrelevant"
    passed, detail, secs = _timed(body)
    return CheckResult("determinism", passed, detail, secs)


def run_acceptance(quick: bool = False, workers: int | None = None) -> list[CheckResult]:
    """Run all nine acceptance checks (quick mode trims the Monte-Carlo sizes)."""
    loss_reps = 150 if quick else 1000
    return [
        check_uniform_blend(),
        check_discount_equiv(),
        check_dirichlet_matrix_form(),
        check_implied_prior_equiv(),
        check_eps_greedy_equiv(),
        check_reward_shift(),
        check_pi_oracle(),
        check_loss_curves(replications=loss_reps, workers=workers),
        check_determinism(),
    ]
