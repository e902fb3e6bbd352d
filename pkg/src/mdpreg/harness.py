"""Monte-Carlo experiment engine: sweeps across methods, strengths, and seeds.

One replication draws a dataset, estimates the model, and plans once per
(method, strength) pair; rows aggregate mean and standard error across
replications. Replication r always uses child_seed(master_seed, r) and
aggregation always sums in replication order, so results are bit-identical
for any worker count.
"""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial

import numpy as np

from .data import CollectionConfig, StartMode, generate_dataset
from .environments import (CLIFF_START, build_cliff_walk, build_interconnected_grid,
                           build_two_goals, cliff_near_goal_states, load_mdp_spec)
from .estimation import count, mle_model
from .evaluation import transition_mse
from .mdp import TabularMdp
from .planning import PlanningProblem, policy_evaluation, policy_iteration
from .regularizers import METHODS, regularize
from .seeding import child_seed

DEFAULT_SEED = 1729
DEFAULT_REPLICATIONS = 5000
DEFAULT_EPS_GRID = tuple(i / 20 for i in range(21))
DEFAULT_MAGNITUDE_GRID = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0)

# the dense example limited-start variant needs an explicit list of 5 states
GRID_LIMITED_STARTS = (0, 2, 4, 6, 8)

BUILTIN_MDPS = ("cliff", "two_goals", "grid")

CSV_HEADER = ("method,strength,mean_loss,stderr_loss,mean_mse_plain,"
              "mean_mse_absorbing,replications,config_hash")


class ConfigError(ValueError):
    """Invalid experiment configuration; carries the full problem list."""

    def __init__(self, problems: list[str]):
        self.problems = problems
        super().__init__("invalid experiment config: " + "; ".join(problems))


@dataclass(frozen=True)
class ExperimentConfig:
    """Declarative description of one sweep (JSON-mirrorable, see README)."""

    mdp: str                                   # builtin name or spec-file path
    collection: CollectionConfig
    methods: tuple[str, ...] = ("dirichlet", "discount", "eps_greedy")
    eps_grid: tuple[float, ...] = DEFAULT_EPS_GRID
    magnitude_grid: tuple[float, ...] = DEFAULT_MAGNITUDE_GRID
    replications: int = DEFAULT_REPLICATIONS
    master_seed: int = DEFAULT_SEED
    gamma: float | None = None                 # override the MDP's discount
    out: str | None = None
    workers: int = 1


@dataclass(frozen=True)
class ResultRow:
    method: str
    strength: float
    mean_loss: float
    stderr_loss: float
    mean_mse_plain: float
    mean_mse_absorbing: float
    replications: int
    config_hash: str


def validate_experiment_config(cfg: ExperimentConfig) -> list[str]:
    problems = []
    if not cfg.methods:
        problems.append("methods list is empty")
    for m in cfg.methods:
        if m not in METHODS:
            problems.append(f"unknown method {m!r}")
    if len(set(cfg.methods)) != len(cfg.methods):
        problems.append("methods list has duplicates")
    needs_eps = any(m in ("discount", "eps_greedy") for m in cfg.methods)
    if needs_eps and not cfg.eps_grid:
        problems.append("eps_grid is empty but a method sweeps eps")
    if "dirichlet" in cfg.methods and not cfg.magnitude_grid:
        problems.append("magnitude_grid is empty but dirichlet is requested")
    for e in cfg.eps_grid:
        if not 0.0 <= e <= 1.0:
            problems.append(f"eps value {e} outside [0, 1]")
    if len(set(cfg.eps_grid)) != len(cfg.eps_grid):
        problems.append("eps_grid has duplicate values")
    for m in cfg.magnitude_grid:
        if m < 0:
            problems.append(f"prior magnitude {m} is negative")
    if len(set(cfg.magnitude_grid)) != len(cfg.magnitude_grid):
        problems.append("magnitude_grid has duplicate values")
    if cfg.replications < 1:
        problems.append("replications must be >= 1")
    if cfg.workers < 1:
        problems.append("workers must be >= 1")
    if not 0 <= cfg.master_seed < 2 ** 64:
        problems.append("master_seed must fit in 64 bits")
    if cfg.gamma is not None and not 0.0 <= cfg.gamma < 1.0:
        problems.append(f"gamma override {cfg.gamma} outside [0, 1)")
    return problems


def resolve_mdp(cfg: ExperimentConfig) -> TabularMdp:
    """Build a builtin MDP or load a spec file, applying any gamma override."""
    if cfg.mdp == "cliff":
        mdp = build_cliff_walk()
    elif cfg.mdp == "two_goals":
        mdp = build_two_goals()
    elif cfg.mdp == "grid":
        mdp = build_interconnected_grid()
    else:
        mdp = load_mdp_spec(cfg.mdp)
    if cfg.gamma is not None:
        mdp = mdp.with_gamma(cfg.gamma)
    return mdp


def sweep_cells(cfg: ExperimentConfig) -> list[tuple[str, float]]:
    """(method, strength) pairs in output order: config method order, grid order."""
    cells = []
    for m in cfg.methods:
        if m == "dirichlet":
            grid: tuple[float, ...] = cfg.magnitude_grid
        elif m == "none":
            grid = (0.0,)
        else:
            grid = cfg.eps_grid
        cells.extend((m, float(s)) for s in grid)
    return cells


def config_hash(cfg: ExperimentConfig) -> str:
    """Stable 12-hex-digit digest of everything that affects the results."""
    doc = {
        "mdp": cfg.mdp,
        "gamma": cfg.gamma,
        "methods": list(cfg.methods),
        "eps_grid": list(cfg.eps_grid),
        "magnitude_grid": list(cfg.magnitude_grid),
        "collection": {
            "n_trajectories": cfg.collection.n_trajectories,
            "trajectory_length": cfg.collection.trajectory_length,
            "p_optimal": cfg.collection.p_optimal,
            "start_mode": [cfg.collection.start_mode.kind,
                           list(cfg.collection.start_mode.states)],
        },
        "replications": cfg.replications,
        "master_seed": cfg.master_seed,
    }
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:12]


@dataclass(frozen=True)
class _ReplicationContext:
    mdp: TabularMdp
    true_problem: PlanningProblem
    pi_opt: np.ndarray
    v_opt: np.ndarray
    start_dist: np.ndarray
    cells: tuple[tuple[str, float], ...]
    collection: CollectionConfig
    master_seed: int


def _replication_task(ctx: _ReplicationContext, rep: int
                      ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One full replication: dataset -> estimate -> per-cell plan and metrics."""
    try:
        return _replication_metrics(ctx, rep)
    except Exception as exc:
        raise RuntimeError(f"replication {rep} failed: {exc}") from exc


def _replication_metrics(ctx: _ReplicationContext, rep: int
                         ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mdp = ctx.mdp
    dataset = generate_dataset(mdp, ctx.pi_opt, ctx.collection,
                               child_seed(ctx.master_seed, rep))
    counts = count(dataset, mdp.n_states, mdp.n_actions)
    est = mle_model(counts)

    k = len(ctx.cells)
    losses = np.empty(k)
    mse_plain = np.empty(k)
    mse_abs = np.empty(k)
    warm: dict[str, np.ndarray] = {}
    for i, (method, strength) in enumerate(ctx.cells):
        reg = regularize(est, counts, method, strength, mdp.gamma)
        policy, _ = policy_iteration(PlanningProblem.from_regularized(reg),
                                     initial_policy=warm.get(method))
        warm[method] = policy
        v_reg = policy_evaluation(ctx.true_problem, policy)
        losses[i] = float(np.dot(ctx.start_dist, ctx.v_opt - v_reg))
        mse = transition_mse(mdp.transition, reg)
        mse_plain[i] = mse.mse_plain
        mse_abs[i] = mse.mse_absorbing
    return losses, mse_plain, mse_abs


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run the full sweep and aggregate across replications (deterministic)."""
    problems = validate_experiment_config(cfg)
    if problems:
        raise ConfigError(problems)
    mdp = resolve_mdp(cfg)
    true_problem = PlanningProblem.from_mdp(mdp)
    pi_opt, _ = policy_iteration(true_problem)
    v_opt = policy_evaluation(true_problem, pi_opt)
    ctx = _ReplicationContext(
        mdp=mdp,
        true_problem=true_problem,
        pi_opt=pi_opt,
        v_opt=v_opt,
        start_dist=cfg.collection.start_mode.distribution(mdp.n_states),
        cells=tuple(sweep_cells(cfg)),
        collection=cfg.collection,
        master_seed=cfg.master_seed,
    )

    task = partial(_replication_task, ctx)
    reps = range(cfg.replications)
    if cfg.workers <= 1:
        results = [task(r) for r in reps]
    else:
        chunk = max(1, cfg.replications // (cfg.workers * 8))
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(task, reps, chunksize=chunk))

    # stack in replication order; np reductions then sum in a fixed order
    losses = np.stack([r[0] for r in results])
    mse_plain = np.stack([r[1] for r in results])
    mse_abs = np.stack([r[2] for r in results])
    n = cfg.replications
    stderr = (losses.std(axis=0, ddof=1) / np.sqrt(n) if n > 1
              else np.zeros(losses.shape[1]))
    digest = config_hash(cfg)
    return [
        ResultRow(method, strength,
                  float(losses[:, i].mean()), float(stderr[i]),
                  float(mse_plain[:, i].mean()), float(mse_abs[:, i].mean()),
                  n, digest)
        for i, (method, strength) in enumerate(ctx.cells)
    ]


def builtin_presets() -> dict[str, ExperimentConfig]:
    """Named experiment configs for the shipped environments.

    `{env}-random/mixed/optimal` vary the behavior mixture (p_optimal 0,
    0.5, 1) with uniform starts; `{env}-start-*` vary the trajectory start
    states under random behavior.
    """
    presets: dict[str, ExperimentConfig] = {}

    def add(name: str, mdp: str, n: int, length: int, p: float, start: StartMode):
        presets[name] = ExperimentConfig(
            mdp=mdp,
            collection=CollectionConfig(n, length, p, start),
        )

    for suffix, p in (("random", 0.0), ("mixed", 0.5), ("optimal", 1.0)):
        add(f"cliff-{suffix}", "cliff", 25, 20, p, StartMode.uniform())
        add(f"twogoals-{suffix}", "two_goals", 15, 10, p, StartMode.uniform())
        add(f"grid-{suffix}", "grid", 15, 10, p, StartMode.uniform())

    add("cliff-start-s", "cliff", 25, 20, 0.0, StartMode.fixed(CLIFF_START))
    add("cliff-start-neargoal", "cliff", 25, 20, 0.0,
        StartMode.subset(cliff_near_goal_states()))
    add("twogoals-start-small", "two_goals", 15, 10, 0.0, StartMode.fixed(1))
    add("twogoals-start-large", "two_goals", 15, 10, 0.0, StartMode.fixed(10))
    add("grid-start-limited", "grid", 15, 10, 0.0, StartMode.subset(GRID_LIMITED_STARTS))
    add("grid-start-single", "grid", 15, 10, 0.0, StartMode.fixed(0))
    return presets


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def emit_csv(rows: list[ResultRow], path) -> None:
    """Write rows as CSV with a fixed header and 12-significant-digit floats."""
    if not rows:
        raise ValueError("no result rows to write")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(CSV_HEADER + "\n")
        for r in rows:
            fh.write(",".join([
                r.method, _fmt(r.strength), _fmt(r.mean_loss), _fmt(r.stderr_loss),
                _fmt(r.mean_mse_plain), _fmt(r.mean_mse_absorbing),
                str(r.replications), r.config_hash,
            ]) + "\n")


def emit_summary(rows: list[ResultRow]) -> str:
    """Human-readable table sorted by (method, strength)."""
    if not rows:
        raise ValueError("no result rows to summarize")
    header = f"{'method':<12}{'strength':>10}{'mean_loss':>14}{'stderr':>12}" \
             f"{'mse_plain':>14}{'mse_absorb':>14}"
    lines = [header, "-" * len(header)]
    for r in sorted(rows, key=lambda x: (x.method, x.strength)):
        lines.append(f"{r.method:<12}{r.strength:>10.4g}{r.mean_loss:>14.6g}"
                     f"{r.stderr_loss:>12.4g}{r.mean_mse_plain:>14.6g}"
                     f"{r.mean_mse_absorbing:>14.6g}")
    return "\n".join(lines)


def _start_mode_from_json(value) -> StartMode:
    if value == "uniform":
        return StartMode.uniform()
    if isinstance(value, dict) and len(value) == 1:
        key, payload = next(iter(value.items()))
        if key == "fixed":
            return StartMode.fixed(int(payload))
        if key == "set":
            return StartMode.subset([int(s) for s in payload])
    raise ConfigError([f"start_mode must be \"uniform\", {{\"fixed\": s}} or"
                       f" {{\"set\": [...]}}, got {value!r}"])


def load_experiment_config(path) -> ExperimentConfig:
    """Parse a JSON experiment config (field names mirror ExperimentConfig)."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError([f"{path}: not valid JSON (line {exc.lineno}: {exc.msg})"])
    if not isinstance(doc, dict):
        raise ConfigError([f"{path}: top level must be a JSON object"])
    known = {"mdp", "collection", "methods", "eps_grid", "magnitude_grid",
             "replications", "master_seed", "gamma", "out", "workers"}
    unknown = sorted(set(doc) - known)
    if unknown:
        raise ConfigError([f"unknown config field(s): {', '.join(unknown)}"])
    for field in ("mdp", "collection"):
        if field not in doc:
            raise ConfigError([f"missing config field: {field}"])
    coll = doc["collection"]
    for field in ("n_trajectories", "trajectory_length"):
        if field not in coll:
            raise ConfigError([f"missing collection field: {field}"])
    try:
        collection = CollectionConfig(
            n_trajectories=int(coll["n_trajectories"]),
            trajectory_length=int(coll["trajectory_length"]),
            p_optimal=float(coll.get("p_optimal", 0.0)),
            start_mode=_start_mode_from_json(coll.get("start_mode", "uniform")),
        )
    except ValueError as exc:
        raise ConfigError([str(exc)])

    defaults = ExperimentConfig(mdp="", collection=collection)
    cfg = ExperimentConfig(
        mdp=str(doc["mdp"]),
        collection=collection,
        methods=tuple(doc.get("methods", defaults.methods)),
        eps_grid=tuple(float(e) for e in doc.get("eps_grid", defaults.eps_grid)),
        magnitude_grid=tuple(float(m) for m in
                             doc.get("magnitude_grid", defaults.magnitude_grid)),
        replications=int(doc.get("replications", defaults.replications)),
        master_seed=int(doc.get("master_seed", defaults.master_seed)),
        gamma=None if doc.get("gamma") is None else float(doc["gamma"]),
        out=doc.get("out"),
        workers=int(doc.get("workers", 1)),
    )
    problems = validate_experiment_config(cfg)
    if problems:
        raise ConfigError(problems)
    return cfg


def override(cfg: ExperimentConfig, *, master_seed=None, replications=None,
             out=None, workers=None) -> ExperimentConfig:
    """Apply CLI-level overrides to a loaded or preset config."""
    if master_seed is not None:
        cfg = replace(cfg, master_seed=master_seed)
    if replications is not None:
        cfg = replace(cfg, replications=replications)
    if out is not None:
        cfg = replace(cfg, out=out)
    if workers is not None:
        cfg = replace(cfg, workers=workers)
    return cfg
