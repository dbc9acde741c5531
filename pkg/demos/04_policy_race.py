"""A small policy race: paired runs, summary table, and the CSV outputs.

Scaled-down version of the batch comparison (the full protocol uses 100
runs of 1000-simulation estimates; see README).  Every policy inside a run
faces the same sampled world, so comparisons are paired.
"""

import numpy as np

from myopicim import assign_uniform_probability, erdos_renyi_graph
from myopicim.harness import (
    ExperimentConfig,
    render_summary_csv,
    run_experiment,
    summarize,
)

graph = assign_uniform_probability(erdos_renyi_graph(40, 0.12, np.random.default_rng(3)), 0.1)
config = ExperimentConfig(
    model="modified-ic",
    edge_probability=0.1,
    k=4,
    horizon="k-plus-1",
    policies=("greedy", "lazy-greedy", "degree", "centrality", "random", "non-adaptive"),
    n_simulations=200,
    n_runs=10,
    master_seed=11,
)

records = run_experiment(config, graph=graph)
rows = summarize(records, config.k)

print("cumulative spread by seeds placed (mean +/- std over 10 paired runs)")
print(f"{'policy':14s}" + "".join(f"  seeds={s:<8d}" for s in range(1, config.k + 1)))
for policy in config.policies:
    cells = []
    for seeds in range(1, config.k + 1):
        row = next(r for r in rows if r.policy == policy and r.seeds == seeds)
        cells.append(f"{row.mean_cumulative_utility:6.1f}+/-{row.std_cumulative_utility:4.1f}")
    print(f"{policy:14s}  " + "  ".join(cells))

print()
print("summary CSV (what `myopicim run --output ...` writes alongside the row file):")
print(render_summary_csv(rows))
