"""Command-line harness.

Subcommands: ``run`` (batch experiment), ``verify`` (counterexample suites
and property sweeps), ``stats`` (graph statistics), ``optimal``
(brute-force policy value on a small instance).

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 capacity error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import CapacityError, ConfigError, EdgeListParseError
from .graph import assign_uniform_probability, erdos_renyi_graph, graph_stats, load_snap_edge_list
from .harness import (
    ExperimentConfig,
    config_from_mapping,
    parse_config_file,
    run_experiment,
    summarize,
    write_outputs,
)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="myopicim")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a policy-comparison experiment")
    run.add_argument("--config", help="key=value config file; flags override it")
    run.add_argument("--graph", help="SNAP edge-list path")
    run.add_argument("--model", choices=("modified-ic", "standard-ic", "non-progressive-ic"))
    run.add_argument("--deactivation", type=float)
    run.add_argument("--p", help="uniform edge probability, or 'from-file'")
    run.add_argument("--k", type=int)
    run.add_argument("--horizon", help="integer horizon or 'auto' (= k+1)")
    run.add_argument("--policies", help="comma-separated policy names")
    run.add_argument("--simulations", type=int)
    run.add_argument("--runs", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--output", help="result CSV path")
    run.add_argument("--undirected", action="store_true", default=None)
    run.add_argument("--workers", type=int, default=1)

    verify = sub.add_parser("verify", help="run the counterexample and property suites")
    verify.add_argument("--instances", type=int, default=20,
                        help="random small instances for the sweeps")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--output", help="write the report here instead of stdout")

    stats = sub.add_parser("stats", help="print graph statistics")
    stats.add_argument("--graph", required=True)
    stats.add_argument("--undirected", action="store_true")

    optimal = sub.add_parser("optimal", help="brute-force optimal policy value")
    optimal.add_argument("--graph", required=True)
    optimal.add_argument("--model", default="modified-ic",
                         choices=("modified-ic", "standard-ic", "non-progressive-ic"))
    optimal.add_argument("--deactivation", type=float, default=0.0)
    optimal.add_argument("--p", type=float, required=True)
    optimal.add_argument("--k", type=int, required=True)
    optimal.add_argument("--horizon", type=int, required=True)
    optimal.add_argument("--undirected", action="store_true")
    optimal.add_argument("--cap", type=int, default=14)
    return parser


def _cmd_run(args) -> int:
    values: dict[str, str] = {}
    if args.config:
        values.update(parse_config_file(args.config))
    overrides = {
        "graph": args.graph,
        "model": args.model,
        "deactivation": args.deactivation,
        "p": args.p,
        "k": args.k,
        "horizon": args.horizon,
        "policies": args.policies,
        "simulations": args.simulations,
        "runs": args.runs,
        "seed": args.seed,
        "output": args.output,
    }
    for key, value in overrides.items():
        if value is not None:
            values[key] = str(value)
    if args.undirected:
        values["undirected"] = "true"
    config = config_from_mapping(values, ExperimentConfig())
    config.validate()
    records = run_experiment(config, workers=args.workers)
    if config.output_path:
        result_path, summary_path = write_outputs(config, records)
        print(f"wrote {result_path} and {summary_path}")
    else:
        for row in summarize(records, config.k):
            print(
                f"{row.policy} seeds={row.seeds} step={row.step} "
                f"mean={row.mean_cumulative_utility:.3f} std={row.std_cumulative_utility:.3f}"
            )
    return 0


def _cmd_verify(args) -> int:
    from .diffusion import modified_ic
    from .verification import (
        check_adaptive_monotonicity,
        check_adaptive_submodularity,
        lemma5_counterexample,
        lemma6i_counterexample,
        lemma6ii_counterexample,
    )

    lines: list[str] = []
    lines.append("== two-node instance: gains before/after a failed first attempt ==")
    for p10 in range(0, 11):
        p = p10 / 10.0
        report = lemma5_counterexample(p)
        lines.append(f"p={p:.1f}")
        lines.append(report.to_text())
    lines.append("")
    lines.append("== deactivation counterexamples ==")
    lines.append(lemma6i_counterexample().to_text())
    lines.append(lemma6ii_counterexample().to_text())
    lines.append("")
    lines.append("== multi-attempt progressive sweeps (expect zero violations) ==")
    rng = np.random.default_rng(args.seed)
    model = modified_ic()
    total_mono = total_sub = total_violations = 0
    for i in range(args.instances):
        n = int(rng.integers(2, 4))
        graph = erdos_renyi_graph(n, 0.6, rng)
        graph = assign_uniform_probability(graph, float(rng.choice([0.1, 0.3, 0.5, 0.7, 0.9])))
        mono = check_adaptive_monotonicity(graph, model, horizon=3, k=2)
        sub = check_adaptive_submodularity(graph, model, horizon=3, k=2)
        total_mono += mono.instances_checked
        total_sub += sub.instances_checked
        total_violations += len(mono.violations) + len(sub.violations)
        if not mono.ok:
            lines.append(f"instance {i}: {mono.to_text()}")
        if not sub.ok:
            lines.append(f"instance {i}: {sub.to_text()}")
    lines.append(
        f"checked {args.instances} instances: {total_mono} gains, {total_sub} pairs, "
        f"{total_violations} violations"
    )
    text = "\n".join(lines) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_stats(args) -> int:
    graph = load_snap_edge_list(args.graph, directed=not args.undirected)
    stats = graph_stats(graph)
    print(f"nodes: {stats.node_count}")
    print(f"edges: {stats.edge_count}")
    print(f"mean degree: {stats.mean_degree:.4g}")
    print(f"max degree: {stats.max_degree}")
    return 0


def _cmd_optimal(args) -> int:
    from .diffusion import modified_ic, non_progressive_ic, standard_ic
    from .verification import approximation_ratio_check, optimal_adaptive_policy_value

    graph = load_snap_edge_list(args.graph, directed=not args.undirected)
    graph = assign_uniform_probability(graph, args.p)
    model = {
        "modified-ic": modified_ic(),
        "standard-ic": standard_ic(),
        "non-progressive-ic": non_progressive_ic(args.deactivation),
    }[args.model]
    optimal = optimal_adaptive_policy_value(graph, model, args.k, args.horizon, cap=args.cap)
    print(f"optimal expected cumulative spread: {optimal.value:.6f}")
    print(f"decision states evaluated: {optimal.decision_tree_size}")
    if args.model == "modified-ic":
        check = approximation_ratio_check(graph, model, args.k, args.horizon, cap=args.cap)
        print(f"adaptive greedy value: {check.greedy_value:.6f}")
        print(f"greedy/optimal ratio: {check.ratio:.6f}")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "verify":
            return _cmd_verify(args)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "optimal":
            return _cmd_optimal(args)
        raise ConfigError(f"unknown command {args.command!r}")
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 4
    except (FileNotFoundError, PermissionError, IsADirectoryError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except EdgeListParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
