"""Cascade semantics over layered graphs.

Three model variants share one mechanical rule on the layered graph: a node
is active at ``t+1`` iff some live timed edge departs an active node at
``t`` and points at it (or it is seeded at ``t+1``).  The variants differ
in which timed edges exist / are eligible:

* ``modified-ic``: every active node retries each out-neighbor every step
  (all influence edges eligible); persistence edges have probability 1.
* ``standard-ic``: a node attempts each out-neighbor exactly once, on the
  step right after its first activation (influence edge eligible only when
  the source activated at the departing layer); persistence probability 1.
* ``non-progressive-ic``: like modified, but a node active at ``t`` stays
  active at ``t+1`` only via a live persistence edge of probability
  ``1 - deactivation`` (it may also be re-activated by a live in-edge).

A :class:`Realization` fixes every timed edge live or dead.  A
:class:`PartialRealization` is what a policy has seen: edge statuses
revealed by myopic feedback, first-activation times, and a clock.  Statuses
of deterministic edges (probability 0 or 1) are implied and never stored.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .graph import INFLUENCE, InfluenceGraph, LayeredGraph, build_layered_graph

MODIFIED_IC = "modified-ic"
STANDARD_IC = "standard-ic"
NON_PROGRESSIVE_IC = "non-progressive-ic"


@dataclass(frozen=True)
class DiffusionModel:
    variant: str
    deactivation: float = 0.0

    def __post_init__(self):
        if self.variant not in (MODIFIED_IC, STANDARD_IC, NON_PROGRESSIVE_IC):
            raise ValueError(f"unknown diffusion model variant {self.variant!r}")
        if not (0.0 <= self.deactivation <= 1.0):
            raise ValueError("deactivation probability outside [0, 1]")
        if self.variant != NON_PROGRESSIVE_IC and self.deactivation != 0.0:
            raise ValueError(f"{self.variant} does not deactivate nodes")

    @property
    def progressive(self) -> bool:
        return self.variant != NON_PROGRESSIVE_IC

    def build_layered(self, graph: InfluenceGraph, horizon: int) -> LayeredGraph:
        if self.progressive:
            return build_layered_graph(graph, horizon, "always-live")
        return build_layered_graph(graph, horizon, "random", 1.0 - self.deactivation)


def modified_ic() -> DiffusionModel:
    return DiffusionModel(MODIFIED_IC)


def standard_ic() -> DiffusionModel:
    return DiffusionModel(STANDARD_IC)


def non_progressive_ic(deactivation: float) -> DiffusionModel:
    return DiffusionModel(NON_PROGRESSIVE_IC, deactivation)


class Realization:
    """Live/dead assignment for every timed edge of a layered graph."""

    def __init__(self, layered: LayeredGraph, statuses: np.ndarray):
        statuses = np.asarray(statuses, dtype=bool)
        if statuses.shape != (layered.timed_edge_count,):
            raise ValueError("statuses must cover every timed edge")
        if np.any(statuses[layered.edge_prob <= 0.0]):
            raise ValueError("probability-0 edge marked live")
        if not np.all(statuses[layered.edge_prob >= 1.0]):
            raise ValueError("probability-1 edge marked dead")
        self.layered = layered
        self.statuses = statuses

    def is_live(self, eid: int) -> bool:
        return bool(self.statuses[eid])

    def prior(self) -> float:
        """Prior probability: independent Bernoulli factor per timed edge."""
        p = self.layered.edge_prob
        return float(np.prod(np.where(self.statuses, p, 1.0 - p)))

    def digest(self) -> str:
        return hashlib.sha256(np.packbits(self.statuses).tobytes()).hexdigest()[:12]


def sample_realization(layered: LayeredGraph, rng: np.random.Generator) -> Realization:
    """Each timed edge independently live with its probability."""
    statuses = rng.random(layered.timed_edge_count) < layered.edge_prob
    return Realization(layered, statuses)


def enumerate_realizations(layered: LayeredGraph, cap: int = 24):
    """Yield every positive-probability realization (2^#random edges)."""
    from .errors import CapacityError

    random_ids = layered.random_edge_ids
    if len(random_ids) > cap:
        raise CapacityError(
            f"{len(random_ids)} random timed edges exceed enumeration cap {cap}"
        )
    base = layered.forced_statuses.copy()
    for bits in range(1 << len(random_ids)):
        statuses = base.copy()
        for j, eid in enumerate(random_ids):
            statuses[eid] = bool((bits >> j) & 1)
        yield Realization(layered, statuses)


@dataclass
class SeedSchedule:
    """Seed nodes with activation times, at most ``budget`` of them."""

    entries: list[tuple[int, int]]
    budget: int | None = None

    def __post_init__(self):
        times = [t for _, t in self.entries]
        if any(t2 < t1 for t1, t2 in zip(times, times[1:])):
            raise ValueError("seed times must be non-decreasing")
        nodes = [v for v, _ in self.entries]
        if len(set(nodes)) != len(nodes):
            raise ValueError("node seeded twice")
        if self.budget is not None and len(self.entries) > self.budget:
            raise ValueError(f"{len(self.entries)} seeds exceed budget {self.budget}")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)


def _schedule_entries(schedule) -> list[tuple[int, int]]:
    if isinstance(schedule, SeedSchedule):
        return list(schedule.entries)
    return [(int(v), int(t)) for v, t in schedule]


@dataclass
class DiffusionTrace:
    """Active node sets per time step, t = 1..T."""

    active_sets: list[frozenset[int]]
    first_activation: dict[int, int] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return len(self.active_sets)

    def counts(self) -> list[int]:
        return [len(s) for s in self.active_sets]


def diffuse(model: DiffusionModel, schedule, realization: Realization) -> DiffusionTrace:
    """Run the cascade for a seed schedule under a fixed realization.

    Seeding an already-active node is a no-op.  Under ``standard-ic`` an
    influence edge fires only if its source first activated at the departing
    layer; persistence edges are always eligible.
    """
    lg = realization.layered
    T = lg.horizon
    seeds_by_time: dict[int, list[int]] = {}
    for v, t in _schedule_entries(schedule):
        if not (1 <= t <= T):
            raise ValueError(f"seed time {t} outside horizon [1, {T}]")
        if not (0 <= v < lg.base.node_count):
            raise ValueError(f"seed node {v} outside graph")
        seeds_by_time.setdefault(t, []).append(v)

    statuses = realization.statuses
    src_arr, dst_arr, kind_arr = lg.edge_src, lg.edge_dst, lg.edge_kind
    standard = model.variant == STANDARD_IC
    active: set[int] = set()
    first_act: dict[int, int] = {}
    sets: list[frozenset[int]] = []
    for t in range(1, T + 1):
        for v in seeds_by_time.get(t, ()):
            if v not in active:
                active.add(v)
                first_act.setdefault(v, t)
        sets.append(frozenset(active))
        if t == T:
            break
        nxt: set[int] = set()
        sl = lg.layer_edges(t)
        for eid in range(sl.start, sl.stop):
            s = int(src_arr[eid])
            if s not in active or not statuses[eid]:
                continue
            if standard and kind_arr[eid] == INFLUENCE and first_act.get(s) != t:
                continue
            nxt.add(int(dst_arr[eid]))
        for v in nxt:
            first_act.setdefault(v, t + 1)
        active = nxt
    return DiffusionTrace(sets, first_act)


class PartialRealization:
    """Observed timed-edge statuses plus first-activation times and a clock.

    ``dom`` is the set of nodes ever observed active.  The clock advances by
    one for every observed step even when nothing was active, so it can run
    ahead of the latest recorded observation.  Instances are treated as
    immutable; derived ones are built with :meth:`with_seeds` or
    :func:`observe_myopic`.
    """

    def __init__(self, layered: LayeredGraph, observed: dict[int, bool] | None = None,
                 activations: dict[int, int] | None = None, clock: int | None = None):
        self.layered = layered
        self.observed = dict(observed or {})
        self.activations = dict(activations or {})
        derived = 1
        for _, t in self.activations.items():
            derived = max(derived, t)
        for eid in self.observed:
            derived = max(derived, int(layered.edge_from_time[eid]) + 1)
        self.clock = derived if clock is None else int(clock)
        if self.clock < derived:
            raise ValueError(f"clock {self.clock} behind latest observation at {derived}")
        if self.clock > layered.horizon:
            raise ValueError("clock beyond horizon")
        for v, t in self.activations.items():
            if not (1 <= t <= layered.horizon):
                raise ValueError(f"activation time {t} outside horizon")
            if not (0 <= v < layered.base.node_count):
                raise ValueError(f"node {v} outside graph")
        for eid in self.observed:
            p = layered.edge_prob[eid]
            if p <= 0.0 or p >= 1.0:
                raise ValueError("deterministic edge statuses are implied, not recorded")
        self._obs_items = frozenset(self.observed.items())
        self._act_items = frozenset(self.activations.items())
        self.key = (self.clock, tuple(sorted(self.activations.items())),
                    tuple(sorted(self.observed.items())))

    @property
    def dom(self) -> frozenset[int]:
        return frozenset(self.activations)

    def schedule(self) -> list[tuple[int, int]]:
        """dom(psi) as a replayable seed schedule (activation order)."""
        return sorted(self.activations.items(), key=lambda item: (item[1], item[0]))

    def with_seeds(self, nodes) -> "PartialRealization":
        acts = dict(self.activations)
        for v in nodes:
            if v in acts:
                raise ValueError(f"node {v} already active")
            acts[v] = self.clock
        return PartialRealization(self.layered, self.observed, acts, self.clock)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PartialRealization):
            return NotImplemented
        return self.layered is other.layered and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        acts = ",".join(f"{v}@{t}" for v, t in sorted(self.activations.items()))
        obs = ",".join(
            f"{self.layered.edge_label(eid)}={'live' if s else 'dead'}"
            for eid, s in sorted(self.observed.items())
        )
        return f"psi[t={self.clock}; act={{{acts}}}; obs={{{obs}}}]"


def empty_partial_realization(layered: LayeredGraph) -> PartialRealization:
    return PartialRealization(layered)


def time_of(psi: PartialRealization) -> int:
    """Largest time index reached by the observation process (1 if empty)."""
    return psi.clock


def is_consistent(realization: Realization, psi: PartialRealization) -> bool:
    """True iff every status observed by ``psi`` matches ``realization``."""
    return all(realization.statuses[eid] == status for eid, status in psi.observed.items())


def is_subrealization(psi: PartialRealization, larger: PartialRealization) -> bool:
    """True iff ``larger`` extends ``psi``: statuses and activations nest."""
    return (
        psi.clock <= larger.clock
        and psi._obs_items <= larger._obs_items
        and psi._act_items <= larger._act_items
    )


def conditional_probability(realization: Realization, psi: PartialRealization) -> float:
    """p(phi | psi): zero if inconsistent, else the product of Bernoulli
    factors over timed edges unobserved by ``psi``."""
    if not is_consistent(realization, psi):
        return 0.0
    lg = realization.layered
    mask = np.ones(lg.timed_edge_count, dtype=bool)
    for eid in psi.observed:
        mask[eid] = False
    p = lg.edge_prob[mask]
    live = realization.statuses[mask]
    return float(np.prod(np.where(live, p, 1.0 - p)))


def clamped_statuses(psi: PartialRealization, fill: np.ndarray | None = None) -> np.ndarray:
    """Edge statuses with observed/deterministic values fixed.

    Unobserved random edges take ``fill`` values (dead when omitted).
    """
    lg = psi.layered
    statuses = lg.forced_statuses.copy() if fill is None else np.asarray(fill, dtype=bool).copy()
    if fill is not None:
        statuses[lg.edge_prob <= 0.0] = False
        statuses[lg.edge_prob >= 1.0] = True
    for eid, status in psi.observed.items():
        statuses[eid] = status
    return statuses


def sample_conditional_realization(psi: PartialRealization,
                                   rng: np.random.Generator) -> Realization:
    """Draw from p(phi | psi): observed edges clamped, the rest sampled."""
    lg = psi.layered
    statuses = rng.random(lg.timed_edge_count) < lg.edge_prob
    return Realization(lg, clamped_statuses(psi, fill=statuses))


def active_nodes_at(psi: PartialRealization, model: DiffusionModel,
                    t: int | None = None) -> frozenset[int]:
    """Nodes active at time ``t`` (default: the clock) according to ``psi``.

    Progressive models: everything activated so far.  Non-progressive: the
    observed persistence/influence edges are replayed; unobserved edges
    cannot matter for feedback-generated observations because every edge
    leaving an active node gets recorded.
    """
    if t is None:
        t = psi.clock
    if model.progressive:
        return frozenset(v for v, at in psi.activations.items() if at <= t)
    replay = Realization(psi.layered, clamped_statuses(psi))
    trace = diffuse(model, psi.schedule(), replay)
    return trace.active_sets[t - 1]


def observable_edges(psi: PartialRealization, model: DiffusionModel) -> list[int]:
    """Random timed edges the next myopic step will reveal.

    All timed edges departing the clock layer from currently active nodes,
    filtered by model eligibility (standard IC only attempts from nodes that
    activated at this very step).  Edges into already-active nodes are
    included; their statuses carry no probability weight but are part of the
    revealed step.
    """
    lg = psi.layered
    t = psi.clock
    if t >= lg.horizon:
        return []
    actives = active_nodes_at(psi, model, t)
    standard = model.variant == STANDARD_IC
    out: list[int] = []
    sl = lg.layer_edges(t)
    for eid in range(sl.start, sl.stop):
        p = lg.edge_prob[eid]
        if p <= 0.0 or p >= 1.0:
            continue
        s = int(lg.edge_src[eid])
        if s not in actives:
            continue
        if standard and lg.edge_kind[eid] == INFLUENCE and psi.activations.get(s) != t:
            continue
        out.append(eid)
    return out


def _advance(psi: PartialRealization, model: DiffusionModel, status_of) -> PartialRealization:
    """Reveal one step given a status oracle for the departing layer's edges."""
    lg = psi.layered
    t = psi.clock
    actives = active_nodes_at(psi, model, t)
    standard = model.variant == STANDARD_IC
    observed = dict(psi.observed)
    for eid in observable_edges(psi, model):
        observed[eid] = bool(status_of(eid))
    sl = lg.layer_edges(t)
    nxt: set[int] = set()
    for eid in range(sl.start, sl.stop):
        s = int(lg.edge_src[eid])
        if s not in actives:
            continue
        if standard and lg.edge_kind[eid] == INFLUENCE and psi.activations.get(s) != t:
            continue
        if status_of(eid):
            nxt.add(int(lg.edge_dst[eid]))
    activations = dict(psi.activations)
    for v in nxt:
        activations.setdefault(v, t + 1)
    return PartialRealization(lg, observed, activations, clock=t + 1)


def observe_myopic(realization: Realization, psi: PartialRealization, newly_seeded,
                   model: DiffusionModel) -> PartialRealization:
    """Seed at the current clock, then reveal one step of the process.

    Returns the extended partial realization: seeds recorded at ``T(psi)``,
    statuses of every eligible timed edge departing the clock layer from an
    active node, first activations at ``T(psi) + 1``, clock advanced by one.
    """
    if not is_consistent(realization, psi):
        raise RuntimeError("partial realization inconsistent with the ground truth")
    lg = psi.layered
    if psi.clock >= lg.horizon:
        raise ValueError("cannot observe beyond the horizon")
    seeded = psi.with_seeds([v for v in newly_seeded if v not in psi.dom])
    return _advance(seeded, model, lambda eid: realization.statuses[eid])


def step_outcomes(psi: PartialRealization, model: DiffusionModel):
    """Enumerate one observation step: yields (probability, extended psi).

    Branches over every status assignment of the eligible random edges
    departing the clock layer; deterministic edges fire per their forced
    status.  Probabilities sum to one.
    """
    lg = psi.layered
    if psi.clock >= lg.horizon:
        raise ValueError("cannot observe beyond the horizon")
    eids = observable_edges(psi, model)
    probs = [float(lg.edge_prob[eid]) for eid in eids]
    forced = lg.forced_statuses
    for bits in range(1 << len(eids)):
        assignment = {eid: bool((bits >> j) & 1) for j, eid in enumerate(eids)}
        prob = 1.0
        for j, p in enumerate(probs):
            prob *= p if assignment[eids[j]] else (1.0 - p)
        status_of = lambda eid: assignment[eid] if eid in assignment else bool(forced[eid])
        yield prob, _advance(psi, model, status_of)


def simulate_cascades_packed(layered: LayeredGraph, model: DiffusionModel, live8: np.ndarray,
                             n_sims: int, schedule=None,
                             initial_active: np.ndarray | None = None,
                             start_time: int = 1) -> np.ndarray:
    """Bit-packed cascade batch: returns per-simulation cumulative spread.

    ``live8`` packs one edge per row, eight simulations per byte
    (``np.packbits`` layout).  Not valid for the single-attempt model, whose
    eligibility needs per-simulation activation times.  ``initial_active``
    is a plain node mask applied identically to every simulation.
    """
    if model.variant == STANDARD_IC:
        raise ValueError("packed simulation does not support single-attempt eligibility")
    n = layered.base.node_count
    T = layered.horizon
    words = live8.shape[1]
    active = np.zeros((n, words), dtype=np.uint8)
    if initial_active is not None:
        active[np.asarray(initial_active, dtype=bool)] = 0xFF
    seeds_by_time: dict[int, list[int]] = {}
    for v, t in _schedule_entries(schedule or []):
        if not (start_time <= t <= T):
            raise ValueError(f"seed time {t} outside [{start_time}, {T}]")
        seeds_by_time.setdefault(t, []).append(v)
    totals = np.zeros(n_sims, dtype=np.int64)
    for t in range(start_time, T + 1):
        for v in seeds_by_time.get(t, ()):
            active[v, :] = 0xFF
        totals += np.unpackbits(active, axis=1, count=n_sims).sum(axis=0, dtype=np.int64)
        if t == T:
            break
        sl = layered.layer_edges(t)
        contrib = live8[sl] & active[layered.edge_src[sl]]
        starts, group_dsts = layered.layer_groups(t)
        nxt = np.zeros((n, words), dtype=np.uint8)
        if len(starts):
            nxt[group_dsts] = np.bitwise_or.reduceat(contrib, starts, axis=0)
        active = nxt
    return totals


def simulate_cascades(layered: LayeredGraph, model: DiffusionModel, live: np.ndarray,
                      schedule=None, initial_active: np.ndarray | None = None,
                      start_time: int = 1) -> list[np.ndarray]:
    """Vectorized cascade over many realizations at once.

    ``live`` has one row per simulated realization and one column per timed
    edge.  Returns the (S, n) active-node matrix for each time step from
    ``start_time`` to the horizon.  ``initial_active`` rows pre-activate
    nodes at ``start_time`` (treated as activated then).
    """
    n = layered.base.node_count
    T = layered.horizon
    S = live.shape[0]
    active = np.zeros((S, n), dtype=bool)
    if initial_active is not None:
        active |= initial_active
    standard = model.variant == STANDARD_IC
    if standard:
        first_act = np.zeros((S, n), dtype=np.int16)
        first_act[active] = start_time
    seeds_by_time: dict[int, list[int]] = {}
    for v, t in _schedule_entries(schedule or []):
        if not (start_time <= t <= T):
            raise ValueError(f"seed time {t} outside [{start_time}, {T}]")
        seeds_by_time.setdefault(t, []).append(v)

    out: list[np.ndarray] = []
    for t in range(start_time, T + 1):
        for v in seeds_by_time.get(t, ()):
            if standard:
                newly = ~active[:, v]
                first_act[newly, v] = t
            active[:, v] = True
        out.append(active.copy())
        if t == T:
            break
        sl = layered.layer_edges(t)
        src = layered.edge_src[sl]
        contrib = live[:, sl] & active[:, src]
        if standard:
            inf = layered.edge_kind[sl] == INFLUENCE
            contrib[:, inf] &= first_act[:, src[inf]] == t
        starts, group_dsts = layered.layer_groups(t)
        nxt = np.zeros((S, n), dtype=bool)
        if len(starts):
            nxt[:, group_dsts] = np.logical_or.reduceat(contrib, starts, axis=1)
        if standard:
            newly = nxt & (first_act == 0)
            first_act[newly] = t + 1
        active = nxt
    return out
