"""Batch experiment runner: paired policy comparisons with CSV output.

Every run draws one ground-truth world from a stream keyed by the run id;
all policies inside a run face that same world, so comparisons are paired.
Rows are emitted in run-id order whatever the parallelism, and every stream
is derived from the master seed, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .diffusion import DiffusionModel, modified_ic, non_progressive_ic, sample_realization, standard_ic
from .errors import ConfigError
from .estimation import EstimatorConfig
from .graph import InfluenceGraph, assign_uniform_probability, load_snap_edge_list
from .policies import POLICY_NAMES, make_policy, nonadaptive_greedy_schedule, run_adaptive_policy
from .rng import derive_rng

MODEL_NAMES = ("modified-ic", "standard-ic", "non-progressive-ic")

RESULT_HEADER = (
    "run_id",
    "policy",
    "step",
    "seed",
    "active_count",
    "cumulative_utility",
    "realization_digest",
)
SUMMARY_HEADER = (
    "policy",
    "seeds",
    "step",
    "mean_cumulative_utility",
    "std_cumulative_utility",
    "runs",
    "degenerate",
)


@dataclass
class ExperimentConfig:
    graph_path: str | None = None
    model: str = "modified-ic"
    deactivation: float = 0.0
    edge_probability: float | str = 0.1  # a float, or "from-file" to keep loaded values
    k: int = 1
    horizon: int | str = "k-plus-1"
    policies: tuple[str, ...] = ("greedy", "random")
    n_simulations: int = 1000
    n_runs: int = 100
    master_seed: int = 0
    output_path: str | None = None
    undirected: bool = False
    estimator_mode: str = "auto"
    enumeration_cap: int = 24

    def resolved_horizon(self) -> int:
        if self.horizon in ("k-plus-1", "auto"):
            return self.k + 1
        return int(self.horizon)

    def validate(self) -> None:
        if self.model not in MODEL_NAMES:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if self.n_simulations < 1 or self.n_runs < 1:
            raise ConfigError("simulations and runs must be >= 1")
        if self.resolved_horizon() < 1:
            raise ConfigError("horizon must be >= 1")
        if isinstance(self.edge_probability, str):
            if self.edge_probability != "from-file":
                raise ConfigError(f"bad edge probability {self.edge_probability!r}")
        elif not (0.0 <= float(self.edge_probability) <= 1.0):
            raise ConfigError("edge probability outside [0, 1]")
        for name in self.policies:
            if name not in POLICY_NAMES:
                raise ConfigError(f"unknown policy {name!r}")
        if not self.policies:
            raise ConfigError("no policies requested")

    def build_model(self) -> DiffusionModel:
        if self.model == "modified-ic":
            return modified_ic()
        if self.model == "standard-ic":
            return standard_ic()
        return non_progressive_ic(self.deactivation)


@dataclass
class RunRecord:
    run_id: int
    policy: str
    step: int
    seed: int | None
    active_count: int
    cumulative_utility: int
    realization_digest: str

    def row(self) -> tuple:
        return (
            self.run_id,
            self.policy,
            self.step,
            "" if self.seed is None else self.seed,
            self.active_count,
            self.cumulative_utility,
            self.realization_digest,
        )


def load_experiment_graph(config: ExperimentConfig) -> InfluenceGraph:
    if config.graph_path is None:
        raise ConfigError("no graph path configured")
    graph = load_snap_edge_list(config.graph_path, directed=not config.undirected)
    if config.edge_probability != "from-file":
        graph = assign_uniform_probability(graph, float(config.edge_probability))
    return graph


def _estimator_config(config: ExperimentConfig) -> EstimatorConfig:
    return EstimatorConfig(
        mode=config.estimator_mode,
        n_sims=config.n_simulations,
        cap=config.enumeration_cap,
        master_seed=config.master_seed,
    )


def _execute_run(config: ExperimentConfig, graph: InfluenceGraph, run_id: int,
                 nonadaptive_schedule) -> list[RunRecord]:
    model = config.build_model()
    horizon = config.resolved_horizon()
    layered = model.build_layered(graph, horizon)
    realization = sample_realization(layered, derive_rng(config.master_seed, "realization", run_id))
    digest = realization.digest()
    records: list[RunRecord] = []
    for name in config.policies:
        policy = make_policy(name, _estimator_config(config), nonadaptive_schedule)
        rng = derive_rng(config.master_seed, "policy", run_id, name)
        result = run_adaptive_policy(
            policy, graph, model, config.k, horizon, realization,
            rng=rng, layered=layered, stream_prefix=("estimate", run_id, name),
        )
        seed_at_step = {t: v for v, t in result.seeds}
        cumulative = 0
        for t, active_set in enumerate(result.trace.active_sets, start=1):
            cumulative += len(active_set)
            records.append(RunRecord(
                run_id, name, t, seed_at_step.get(t), len(active_set), cumulative, digest,
            ))
    return records


def run_experiment(config: ExperimentConfig, graph: InfluenceGraph | None = None,
                   workers: int = 1) -> list[RunRecord]:
    """Execute every (run, policy) pair and return rows in deterministic order."""
    config.validate()
    if graph is None:
        graph = load_experiment_graph(config)
    model = config.build_model()
    horizon = config.resolved_horizon()
    nonadaptive_schedule = None
    if "non-adaptive" in config.policies:
        # realization-independent, so computed once and shared across runs
        nonadaptive_schedule = nonadaptive_greedy_schedule(
            graph, model, config.k, horizon, _estimator_config(config)
        )
    run_ids = list(range(1, config.n_runs + 1))
    if workers <= 1:
        batches = [_execute_run(config, graph, r, nonadaptive_schedule) for r in run_ids]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(
                _run_task,
                [(config, graph, r, nonadaptive_schedule) for r in run_ids],
            ))
    records: list[RunRecord] = []
    for batch in batches:
        records.extend(batch)
    return records


def _run_task(args) -> list[RunRecord]:
    return _execute_run(*args)


@dataclass
class SummaryRow:
    policy: str
    seeds: int
    step: int
    mean_cumulative_utility: float
    std_cumulative_utility: float
    runs: int
    degenerate: bool

    def row(self) -> tuple:
        return (
            self.policy,
            self.seeds,
            self.step,
            repr(self.mean_cumulative_utility),
            repr(self.std_cumulative_utility),
            self.runs,
            int(self.degenerate),
        )


def summarize(records: list[RunRecord], k: int) -> list[SummaryRow]:
    """Per policy and per seeds-so-far: mean and sample std of cumulative spread.

    When several steps share a seed count (the spare diffusion steps after
    the budget), the latest step represents it.  A single-run sample has no
    spread estimate; its std is reported as 0 with the degenerate flag set.
    """
    if not records:
        raise ValueError("empty result table")
    by_policy_step: dict[tuple[str, int], list[int]] = {}
    for rec in records:
        by_policy_step.setdefault((rec.policy, rec.step), []).append(rec.cumulative_utility)
    rows: list[SummaryRow] = []
    policies = sorted({rec.policy for rec in records})
    for policy in policies:
        by_seeds: dict[int, int] = {}
        for pol, step in by_policy_step:
            if pol == policy:
                seeds = min(step, k)
                by_seeds[seeds] = max(step, by_seeds.get(seeds, 0))  # later steps win
        for seeds, step in sorted(by_seeds.items()):
            values = by_policy_step[(policy, step)]
            n = len(values)
            mean = sum(values) / n
            if n > 1:
                var = sum((x - mean) ** 2 for x in values) / (n - 1)
                std, degenerate = math.sqrt(var), False
            else:
                std, degenerate = 0.0, True
            rows.append(SummaryRow(policy, seeds, step, mean, std, n, degenerate))
    return rows


def render_results_csv(records: list[RunRecord]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RESULT_HEADER)
    for rec in records:
        writer.writerow(rec.row())
    return buffer.getvalue()


def render_summary_csv(rows: list[SummaryRow]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_HEADER)
    for row in rows:
        writer.writerow(row.row())
    return buffer.getvalue()


def write_outputs(config: ExperimentConfig, records: list[RunRecord]) -> tuple[str, str]:
    """Write the result and summary CSVs; returns their paths."""
    if config.output_path is None:
        raise ConfigError("no output path configured")
    out = config.output_path
    base, ext = os.path.splitext(out)
    summary_path = f"{base}_summary{ext or '.csv'}"
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_results_csv(records))
    with open(summary_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_summary_csv(summarize(records, config.k)))
    return out, summary_path


def parse_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def config_from_mapping(values: dict[str, str], base: ExperimentConfig | None = None) -> ExperimentConfig:
    config = base or ExperimentConfig()
    updates: dict = {}
    for key, value in values.items():
        if key in ("graph", "graph_path"):
            updates["graph_path"] = value
        elif key == "model":
            updates["model"] = value
        elif key == "deactivation":
            updates["deactivation"] = float(value)
        elif key == "p":
            updates["edge_probability"] = value if value == "from-file" else float(value)
        elif key == "k":
            updates["k"] = int(value)
        elif key == "horizon":
            updates["horizon"] = value if value in ("auto", "k-plus-1") else int(value)
        elif key == "policies":
            updates["policies"] = tuple(name.strip() for name in value.split(",") if name.strip())
        elif key == "simulations":
            updates["n_simulations"] = int(value)
        elif key == "runs":
            updates["n_runs"] = int(value)
        elif key == "seed":
            updates["master_seed"] = int(value)
        elif key == "output":
            updates["output_path"] = value
        elif key == "undirected":
            updates["undirected"] = value.lower() in ("1", "true", "yes")
        else:
            raise ConfigError(f"unknown config key {key!r}")
    try:
        return replace(config, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
