"""Machine checks of the theory: monotonicity/submodularity sweeps,
fixed counterexample instances, brute-force optimal policies, and the
greedy-vs-optimal ratio.

The sweeps quantify over observation states reachable by some
seeding/observation sequence within budget.  For the multi-attempt
progressive model the expected gain of a candidate depends only on the set
of active nodes and the clock (earlier layers are screened off), so
reachable states collapse to (active set, time, seeds used) and nesting of
observation states becomes reachability in that small state graph.  The
single-attempt and deactivating models keep full observation states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .diffusion import (
    MODIFIED_IC,
    DiffusionModel,
    PartialRealization,
    empty_partial_realization,
    is_subrealization,
    step_outcomes,
)
from .errors import CapacityError
from .estimation import (
    exact_marginal_gain,
    exact_policy_value,
    expected_step_counts,
)
from .graph import InfluenceGraph
from .policies import GreedyPolicy
from .estimation import EstimatorConfig

APPROXIMATION_BOUND = 1.0 - 1.0 / math.e
_TOL = 1e-9


@dataclass
class MonotonicityReport:
    instances_checked: int = 0
    violations: list[tuple[str, int, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        lines = [f"monotonicity: {self.instances_checked} gains checked, "
                 f"{len(self.violations)} violations"]
        for psi, v, gain in self.violations:
            lines.append(f"{psi}\tv={v}\tgain={gain!r}")
        return "\n".join(lines)


@dataclass
class SubmodularityReport:
    instances_checked: int = 0
    violations: list[tuple[str, str, int, float, float]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_text(self) -> str:
        lines = [f"submodularity: {self.instances_checked} pairs checked, "
                 f"{len(self.violations)} violations"]
        for psi, psi2, v, g1, g2 in self.violations:
            lines.append(f"{psi}\t{psi2}\tv={v}\tgain_before={g1!r}\tgain_after={g2!r}")
        return "\n".join(lines)


def _root_state(layered, initial_active) -> PartialRealization:
    if not initial_active:
        return empty_partial_realization(layered)
    return PartialRealization(layered, activations={int(v): 1 for v in initial_active}, clock=1)


class _FrontierGraph:
    """Reachable (active set, time, seeds used) states for the multi-attempt model."""

    def __init__(self, graph: InfluenceGraph, model: DiffusionModel, horizon: int, k: int,
                 initial_active, cap: int):
        self.graph = graph
        self.model = model
        self.layered = model.build_layered(graph, horizon)
        if len(self.layered.random_edge_ids) > cap:
            raise CapacityError(
                f"{len(self.layered.random_edge_ids)} random timed edges exceed cap {cap}"
            )
        self.horizon = horizon
        self.k = k
        self._value_memo: dict[tuple[frozenset, int], float] = {}
        root = (frozenset(int(v) for v in initial_active), 1)
        # BFS keyed by (active set, time), keeping the fewest seeds used
        used: dict[tuple[frozenset, int], int] = {root: 0}
        self.children: dict[tuple[frozenset, int], set[tuple[frozenset, int]]] = {root: set()}
        queue = [root]
        while queue:
            state = queue.pop()
            active, t = state
            budget_left = self.k - used[state]
            kids: set[tuple[frozenset, int]] = set()
            if budget_left > 0:
                for v in range(graph.node_count):
                    if v not in active:
                        kids.add((active | {v}, t))
            if t < horizon:
                for grown in self._evolutions(active):
                    kids.add((grown, t + 1))
            self.children.setdefault(state, set()).update(kids)
            for kid in kids:
                seeds_spent = used[state] + (1 if kid[1] == t else 0)
                if kid not in used or seeds_spent < used[kid]:
                    used[kid] = seeds_spent
                    self.children.setdefault(kid, set())
                    queue.append(kid)
        self.states = list(self.children)

    def _evolutions(self, active: frozenset):
        forced: set[int] = set(active)  # persistence edges are always live
        optional: set[int] = set()
        for v in active:
            for u, p in self.graph.out_edges(v):
                if p >= 1.0:
                    forced.add(u)
                elif p > 0.0:
                    optional.add(u)
        optional -= forced
        optional_list = sorted(optional)
        for bits in range(1 << len(optional_list)):
            extra = {optional_list[j] for j in range(len(optional_list)) if (bits >> j) & 1}
            yield frozenset(forced | extra)

    def descendants(self, state) -> set:
        seen: set = set()
        stack = list(self.children[state])
        while stack:
            s = stack.pop()
            if s in seen:
                continue
            seen.add(s)
            stack.extend(self.children[s])
        seen.discard(state)
        return seen

    def future_value(self, active: frozenset, t: int) -> float:
        """E[sum over t' >= t of |active set|] seeding ``active`` at ``t``."""
        key = (active, t)
        if key not in self._value_memo:
            psi = PartialRealization(self.layered, activations={v: t for v in active}, clock=t)
            counts = expected_step_counts(psi, self.layered, self.model,
                                          cap=len(self.layered.random_edge_ids),
                                          from_layer=t)
            self._value_memo[key] = float(counts[t - 1:].sum())
        return self._value_memo[key]

    def gain(self, active: frozenset, t: int, v: int) -> float:
        return self.future_value(active | {v}, t) - self.future_value(active, t)

    @staticmethod
    def encode(state) -> str:
        active, t = state
        return f"state[t={t}; active={{{','.join(map(str, sorted(active)))}}}]"


def _enumerate_explicit_states(graph, model, horizon, k, initial_active, cap, state_cap):
    layered = model.build_layered(graph, horizon)
    if len(layered.random_edge_ids) > cap:
        raise CapacityError(
            f"{len(layered.random_edge_ids)} random timed edges exceed cap {cap}"
        )
    root = _root_state(layered, initial_active)
    used: dict = {root.key: 0}
    states: dict = {root.key: root}
    queue = [root]
    while queue:
        psi = queue.pop()
        budget_left = k - used[psi.key]
        kids: list[PartialRealization] = []
        if budget_left > 0:
            for v in range(graph.node_count):
                if v not in psi.dom:
                    kids.append((psi.with_seeds([v]), used[psi.key] + 1))
        if psi.clock < horizon:
            kids.extend((child, used[psi.key]) for _, child in step_outcomes(psi, model))
        for child, spent in kids:
            if child.key not in used or spent < used[child.key]:
                used[child.key] = spent
                states[child.key] = child
                queue.append(child)
        if len(states) > state_cap:
            raise CapacityError(f"more than {state_cap} reachable observation states")
    return layered, list(states.values())


def check_adaptive_monotonicity(graph: InfluenceGraph, model: DiffusionModel, horizon: int,
                                k: int, initial_active=(), cap: int = 24,
                                state_cap: int = 20000) -> MonotonicityReport:
    """Exact expected gains of every candidate at every reachable state, vs zero."""
    report = MonotonicityReport()
    if model.variant == MODIFIED_IC:
        fg = _FrontierGraph(graph, model, horizon, k, initial_active, cap)
        for state in fg.states:
            active, t = state
            for v in range(graph.node_count):
                if v in active:
                    continue
                gain = fg.gain(active, t, v)
                report.instances_checked += 1
                if gain < -_TOL:
                    report.violations.append((fg.encode(state), v, gain))
        return report
    layered, states = _enumerate_explicit_states(
        graph, model, horizon, k, initial_active, cap, state_cap
    )
    memo: dict = {}
    for psi in states:
        for v in range(graph.node_count):
            if v in psi.dom:
                continue
            key = (psi.key, v)
            if key not in memo:
                memo[key] = exact_marginal_gain(v, psi, layered, model, cap=cap).mean
            report.instances_checked += 1
            if memo[key] < -_TOL:
                report.violations.append((repr(psi), v, memo[key]))
    return report


def check_adaptive_submodularity(graph: InfluenceGraph, model: DiffusionModel, horizon: int,
                                 k: int, initial_active=(), cap: int = 24,
                                 state_cap: int = 20000) -> SubmodularityReport:
    """Diminishing gains across every reachable nested pair of observation states."""
    report = SubmodularityReport()
    if model.variant == MODIFIED_IC:
        fg = _FrontierGraph(graph, model, horizon, k, initial_active, cap)
        for state in fg.states:
            active, t = state
            for other in sorted(fg.descendants(state), key=lambda s: (s[1], sorted(s[0]))):
                grown, t2 = other
                for v in range(graph.node_count):
                    if v in grown:
                        continue
                    before = fg.gain(active, t, v)
                    after = fg.gain(grown, t2, v)
                    report.instances_checked += 1
                    if before < after - _TOL:
                        report.violations.append(
                            (fg.encode(state), fg.encode(other), v, before, after)
                        )
        return report
    layered, states = _enumerate_explicit_states(
        graph, model, horizon, k, initial_active, cap, state_cap
    )
    memo: dict = {}

    def gain(psi: PartialRealization, v: int) -> float:
        key = (psi.key, v)
        if key not in memo:
            memo[key] = exact_marginal_gain(v, psi, layered, model, cap=cap).mean
        return memo[key]

    for psi in states:
        for larger in states:
            if psi is larger or not is_subrealization(psi, larger):
                continue
            if psi.key == larger.key:
                continue
            for v in range(graph.node_count):
                if v in larger.dom:
                    continue
                before = gain(psi, v)
                after = gain(larger, v)
                report.instances_checked += 1
                if before < after - _TOL:
                    report.violations.append((repr(psi), repr(larger), v, before, after))
    return report


# ---------------------------------------------------------------------------
# fixed counterexample instances
# ---------------------------------------------------------------------------

@dataclass
class Lemma5Report:
    """Two nodes, one edge u -> v of probability p, u active from the start,
    horizon 3.  Gains of seeding v before versus after watching u's first
    attempt fail."""

    p: float
    standard_gain_before: float
    standard_gain_after: float
    modified_gain_before: float
    modified_gain_after: float

    @property
    def standard_violation(self) -> bool:
        return self.standard_gain_before < self.standard_gain_after - 1e-12

    @property
    def modified_violation(self) -> bool:
        return self.modified_gain_before < self.modified_gain_after - 1e-12

    def to_text(self) -> str:
        return (
            f"single-attempt: gain(before)={self.standard_gain_before!r} "
            f"gain(after-failure)={self.standard_gain_after!r} "
            f"violation={self.standard_violation}\n"
            f"multi-attempt: gain(before)={self.modified_gain_before!r} "
            f"gain(after-failure)={self.modified_gain_after!r} "
            f"violation={self.modified_violation}"
        )


def lemma5_counterexample(p: float) -> Lemma5Report:
    """Gains on the two-node instance under both attempt semantics.

    The post-failure state pins u's first attempt dead.  At p = 1 that state
    has zero prior probability, so its gain is computed by direct case
    enumeration over the one remaining random edge instead of through the
    conditional machinery.
    """
    from .diffusion import modified_ic, standard_ic

    if not (0.0 <= p <= 1.0):
        raise ValueError("p outside [0, 1]")
    u, v = 0, 1
    graph = InfluenceGraph(2, [(u, v, p)])
    horizon = 3
    gains: dict[str, tuple[float, float]] = {}
    for model in (standard_ic(), modified_ic()):
        layered = model.build_layered(graph, horizon)
        before_state = PartialRealization(layered, activations={u: 1}, clock=1)
        before = exact_marginal_gain(v, before_state, layered, model).mean
        if p == 0.0:
            # the first attempt fails surely; no status to record
            after_state = PartialRealization(layered, activations={u: 1}, clock=2)
            after = exact_marginal_gain(v, after_state, layered, model).mean
        elif p == 1.0:
            # failure has zero prior probability; enumerate the post-failure
            # future by hand: v earns step 2 always, step 3 unless u's second
            # attempt would have covered it
            if model.variant == MODIFIED_IC:
                after = p * 1.0 + (1.0 - p) * 2.0
            else:
                after = 2.0
        else:
            dead_first = {layered.edge_index(u, 1, v): False}
            after_state = PartialRealization(layered, dead_first, {u: 1}, clock=2)
            after = exact_marginal_gain(v, after_state, layered, model).mean
        gains[model.variant] = (before, after)
    return Lemma5Report(
        p,
        standard_gain_before=gains["standard-ic"][0],
        standard_gain_after=gains["standard-ic"][1],
        modified_gain_before=gains["modified-ic"][0],
        modified_gain_after=gains["modified-ic"][1],
    )


@dataclass
class Lemma6iReport:
    """Two nodes with deactivation: six fair-coin timed edges, u seeded first.

    Watching u's step-1 edges die *raises* the expected gain of seeding v,
    breaking the diminishing-returns property for the deactivating model.
    """

    gain_before: float
    gain_after: float
    worlds_before: int
    worlds_after: int

    @property
    def violation(self) -> bool:
        return self.gain_after > self.gain_before + 1e-12

    def to_text(self) -> str:
        return (
            f"deactivating cumulative-spread: gain(before)={self.gain_before!r} "
            f"({self.worlds_before} worlds) gain(after)={self.gain_after!r} "
            f"({self.worlds_after} worlds) violation={self.violation}"
        )


def lemma6i_counterexample() -> Lemma6iReport:
    """Exact gains on the six-edge deactivating instance."""
    from .diffusion import non_progressive_ic

    u, v = 0, 1
    graph = InfluenceGraph(2, [(u, v, 0.5)])
    model = non_progressive_ic(0.5)
    layered = model.build_layered(graph, 3)
    before_state = PartialRealization(layered, activations={u: 1}, clock=1)
    before = exact_marginal_gain(v, before_state, layered, model)
    observed = {
        layered.edge_index(u, 1, u): False,
        layered.edge_index(u, 1, v): False,
    }
    after_state = PartialRealization(layered, observed, {u: 1}, clock=2)
    after = exact_marginal_gain(v, after_state, layered, model)
    return Lemma6iReport(before.mean, after.mean, before.sample_count, after.sample_count)


@dataclass
class Lemma6iiReport:
    """Final-spread utility with deactivation, full feedback, horizon 2.

    Seeding v at the last step scores all of v, w, z (the closing attempts
    resolve and count, with no further survival draw); seeding it first
    risks v's deactivation before the end.
    """

    gain_before: float
    gain_after: float

    @property
    def violation(self) -> bool:
        return self.gain_after > self.gain_before + 1e-12

    def to_text(self) -> str:
        return (
            f"deactivating final-spread: gain(at t=1)={self.gain_before!r} "
            f"gain(at t=2)={self.gain_after!r} violation={self.violation}"
        )


def lemma6ii_counterexample() -> Lemma6iiReport:
    """Exact gains on the star instance u; v -> w, v -> z (probability 1).

    Semantics fixed for this check: a node seeded at epoch t is active at t;
    single influence attempts land one epoch later; each node active at
    epoch t < T survives to t+1 with probability 1/2; the attempts of the
    final epoch's activations resolve and count, then the process ends.
    The expected end-counts are enumerated over the survival draws.
    """
    out_edges = {1: (2, 3)}  # v -> w, v -> z; u = 0 is isolated

    def expected_end_count(schedule: dict[int, int], horizon: int = 2) -> float:
        # enumerate survival draws: one coin per (node, epoch boundary)
        def recurse(active: frozenset, attempted: frozenset, t: int) -> float:
            arrivals = frozenset(
                w for s in active if s in out_edges and s not in attempted
                for w in out_edges[s]
            )
            attempted = attempted | frozenset(active)
            if t == horizon:
                return float(len(active | arrivals))
            total = 0.0
            survivors_pool = sorted(active)
            for bits in range(1 << len(survivors_pool)):
                prob = 0.5 ** len(survivors_pool)
                survivors = {
                    survivors_pool[j] for j in range(len(survivors_pool)) if (bits >> j) & 1
                }
                nxt = frozenset(survivors) | arrivals | frozenset(
                    w for w, at in schedule.items() if at == t + 1
                )
                total += prob * recurse(nxt, attempted, t + 1)
            return total

        first = frozenset(w for w, at in schedule.items() if at == 1)
        return recurse(first, frozenset(), 1)

    base_after = expected_end_count({0: 1})
    with_after = expected_end_count({0: 1, 1: 2})
    gain_after = with_after - base_after
    gain_before = expected_end_count({1: 1}) - expected_end_count({})
    return Lemma6iiReport(gain_before, gain_after)


# ---------------------------------------------------------------------------
# brute-force optimal policy and the ratio check
# ---------------------------------------------------------------------------

@dataclass
class OptimalPolicyValue:
    value: float
    decision_tree_size: int


def _belief_key(psi: PartialRealization, model: DiffusionModel):
    if model.variant == MODIFIED_IC:
        return (psi.clock, psi.dom)
    return psi.key


def optimal_adaptive_policy_value(graph: InfluenceGraph, model: DiffusionModel, k: int,
                                  horizon: int, cap: int = 14,
                                  initial_active=()) -> OptimalPolicyValue:
    """Exact optimal expected cumulative spread, one seed per step.

    Backward induction over reachable observation states: with budget left
    the value is the best seed's immediate count plus the expectation over
    the one-step feedback; with no budget (or no inactive node) it is the
    expected passive continuation.
    """
    from .diffusion import active_nodes_at

    layered = model.build_layered(graph, horizon)
    if len(layered.random_edge_ids) > cap:
        raise CapacityError(
            f"{len(layered.random_edge_ids)} random timed edges exceed cap {cap}"
        )
    memo: dict = {}

    def passive(psi: PartialRealization) -> float:
        counts = expected_step_counts(psi, layered, model,
                                      cap=len(layered.random_edge_ids),
                                      from_layer=psi.clock)
        return float(counts[psi.clock - 1:].sum())

    def value(psi: PartialRealization, budget: int) -> float:
        key = (_belief_key(psi, model), budget)
        if key in memo:
            return memo[key]
        t = psi.clock
        candidates = [v for v in range(graph.node_count) if v not in psi.dom]
        if budget == 0 or not candidates:
            result = passive(psi)
        elif t == horizon:
            result = float(len(active_nodes_at(psi, model, t))) + 1.0
        else:
            result = -math.inf
            for v in candidates:
                seeded = psi.with_seeds([v])
                now = float(len(active_nodes_at(seeded, model, t)))
                future = sum(
                    prob * value(child, budget - 1)
                    for prob, child in step_outcomes(seeded, model)
                )
                result = max(result, now + future)
        memo[key] = result
        return result

    root = _root_state(layered, initial_active)
    best = value(root, k)
    return OptimalPolicyValue(best, len(memo))


@dataclass
class RatioCheck:
    greedy_value: float
    optimal_value: float

    @property
    def ratio(self) -> float:
        if self.optimal_value == 0.0:
            return 1.0
        return self.greedy_value / self.optimal_value


def approximation_ratio_check(graph: InfluenceGraph, model: DiffusionModel, k: int,
                              horizon: int, cap: int = 14) -> RatioCheck:
    """Exact greedy value over exact optimal value.

    For the multi-attempt progressive model with cumulative spread the ratio
    must clear 1 - 1/e; that is asserted here.
    """
    layered = model.build_layered(graph, horizon)
    greedy = GreedyPolicy(EstimatorConfig(mode="exact", cap=max(cap, 24)))
    greedy_value = exact_policy_value(greedy, layered, model, k, cap=max(cap, 24))
    optimal = optimal_adaptive_policy_value(graph, model, k, horizon, cap=cap)
    check = RatioCheck(greedy_value, optimal.value)
    if check.greedy_value > check.optimal_value + 1e-9:
        raise AssertionError(
            f"greedy {check.greedy_value} exceeds optimal {check.optimal_value}"
        )
    if model.variant == MODIFIED_IC and check.ratio < APPROXIMATION_BOUND - 1e-9:
        raise AssertionError(
            f"approximation ratio {check.ratio} below {APPROXIMATION_BOUND}"
        )
    return check
