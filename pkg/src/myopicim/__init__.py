"""Adaptive influence maximization with myopic feedback.

Cascade models on time-expanded graphs, exact and Monte Carlo marginal-gain
estimation, greedy seed-selection policies with their heuristic and
non-adaptive baselines, and verification suites for the monotonicity /
diminishing-returns properties that back the greedy guarantee.
"""

from .diffusion import (
    DiffusionModel,
    DiffusionTrace,
    PartialRealization,
    Realization,
    SeedSchedule,
    conditional_probability,
    diffuse,
    empty_partial_realization,
    is_consistent,
    is_subrealization,
    modified_ic,
    non_progressive_ic,
    observe_myopic,
    sample_realization,
    standard_ic,
    time_of,
)
from .errors import CapacityError, ConfigError, EdgeListParseError
from .estimation import (
    EstimatorConfig,
    GainEstimator,
    MarginalGainEstimate,
    exact_marginal_gain,
    exact_policy_value,
    mc_marginal_gain,
    realized_marginal_gain,
)
from .graph import (
    GraphStats,
    InfluenceGraph,
    LayeredGraph,
    assign_uniform_probability,
    betweenness_centrality,
    build_layered_graph,
    erdos_renyi_graph,
    graph_stats,
    load_snap_edge_list,
    serialize_edge_list,
)
from .policies import (
    CentralityPolicy,
    DegreePolicy,
    GreedyPolicy,
    LazyGreedyPolicy,
    PolicyRunResult,
    RandomPolicy,
    ScheduledPolicy,
    adaptive_greedy_step,
    make_policy,
    nonadaptive_greedy_schedule,
    per_step_batch_greedy,
    run_adaptive_policy,
)
from .utility import cumulative_spread, final_spread, layered_spread
from .verification import (
    approximation_ratio_check,
    check_adaptive_monotonicity,
    check_adaptive_submodularity,
    lemma5_counterexample,
    lemma6i_counterexample,
    lemma6ii_counterexample,
    optimal_adaptive_policy_value,
)

__version__ = "0.1.0"
