"""Conditional expected marginal gains and exact policy values.

The realized gain of seeding ``v`` after observing ``psi`` is a per-world
difference of cumulative spreads; its conditional expectation is taken over
worlds consistent with ``psi``, either exactly (enumerating every status
assignment of the unobserved random edges, weighted by the independent
Bernoulli factorization) or by Monte Carlo with the same world serving both
sides of the counterfactual.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffusion import (
    STANDARD_IC,
    DiffusionModel,
    PartialRealization,
    Realization,
    clamped_statuses,
    diffuse,
    is_consistent,
    simulate_cascades,
    simulate_cascades_packed,
)
from .errors import CapacityError
from .graph import LayeredGraph
from .rng import derive_rng
from .utility import cumulative_spread

DEFAULT_ENUMERATION_CAP = 24


@dataclass(frozen=True)
class MarginalGainEstimate:
    mean: float
    std_error: float
    sample_count: int
    exact: bool


def realized_marginal_gain(v: int, psi: PartialRealization, phi: Realization,
                           model: DiffusionModel) -> int:
    """Cumulative-spread difference of seeding ``v`` at ``T(psi)`` under ``phi``.

    The counterfactual baseline replays dom(psi) forward at the observed
    activation times; the same world serves both sides.
    """
    if v in psi.dom:
        raise ValueError(f"node {v} already active")
    if not is_consistent(phi, psi):
        raise ValueError("realization inconsistent with the partial realization")
    base_schedule = psi.schedule()
    with_schedule = base_schedule + [(v, psi.clock)]
    return cumulative_spread(with_schedule, phi, model) - cumulative_spread(
        base_schedule, phi, model
    )


def _unobserved_random_edges(psi: PartialRealization, from_layer: int | None = None) -> np.ndarray:
    lg = psi.layered
    ids = lg.random_edge_ids
    mask = np.ones(len(ids), dtype=bool)
    for j, eid in enumerate(ids):
        if int(eid) in psi.observed:
            mask[j] = False
        elif from_layer is not None and lg.edge_from_time[eid] < from_layer:
            mask[j] = False
    return ids[mask]


_GRID_BLOCK = 1 << 15


def _enumeration_grid(psi: PartialRealization, cap: int, from_layer: int | None = None):
    """All status assignments of the unobserved random edges, with weights.

    Yields ``(live, weights)`` blocks: ``live[i]`` is a full edge-status row
    and ``weights[i]`` its conditional probability given ``psi``.
    Restricting to ``from_layer`` marginalizes out earlier edges (their
    weights sum to one and they are left clamped dead).
    """
    lg = psi.layered
    ids = _unobserved_random_edges(psi, from_layer)
    m = len(ids)
    if m > cap:
        raise CapacityError(f"{m} unobserved random edges exceed cap {cap}; use Monte Carlo")
    count = 1 << m
    template = clamped_statuses(psi)
    if not m:
        yield template[None, :].copy(), np.ones(1)
        return
    p = lg.edge_prob[ids]
    for start in range(0, count, _GRID_BLOCK):
        block = np.arange(start, min(start + _GRID_BLOCK, count), dtype=np.int64)
        bits = ((block[:, None] >> np.arange(m)) & 1).astype(bool)
        live = np.repeat(template[None, :], len(block), axis=0)
        live[:, ids] = bits
        yield live, np.prod(np.where(bits, p, 1.0 - p), axis=1)


def _batched_cumulative(lg: LayeredGraph, model: DiffusionModel, schedule, live: np.ndarray,
                        initial_active: np.ndarray | None = None,
                        start_time: int = 1) -> np.ndarray:
    mats = simulate_cascades(lg, model, live, schedule=schedule,
                             initial_active=initial_active, start_time=start_time)
    total = np.zeros(live.shape[0], dtype=np.int64)
    for mat in mats:
        total += mat.sum(axis=1)
    return total


def exact_marginal_gain(v: int, psi: PartialRealization, layered: LayeredGraph,
                        model: DiffusionModel,
                        cap: int = DEFAULT_ENUMERATION_CAP) -> MarginalGainEstimate:
    """Exact conditional expected gain by enumerating every consistent world."""
    if psi.layered is not layered:
        raise ValueError("psi belongs to a different layered graph")
    if v in psi.dom:
        raise ValueError(f"node {v} already active")
    base_schedule = psi.schedule()
    with_schedule = base_schedule + [(v, psi.clock)]
    mean = 0.0
    count = 0
    for live, weights in _enumeration_grid(psi, cap):
        base = _batched_cumulative(layered, model, base_schedule, live)
        withv = _batched_cumulative(layered, model, with_schedule, live)
        mean += float(weights @ (withv - base))
        count += len(weights)
    return MarginalGainEstimate(mean, 0.0, count, exact=True)


def _future_restriction(psi: PartialRealization, model: DiffusionModel):
    """Frontier summary for sampling only future edges, when sound.

    Sound when every random edge departing an active node before the clock
    layer is observed (always true for feedback-generated observations) and
    eligibility never looks at activation times (not standard IC).  Returns
    ``(start_time, initial_active_row, future_edge_ids)`` or ``None``.
    Cached on the observation object (they are immutable).
    """
    if model.variant == STANDARD_IC:
        return None
    cache = getattr(psi, "_restriction_cache", None)
    if cache is None:
        cache = {}
        object.__setattr__(psi, "_restriction_cache", cache)
    cache_key = (model.variant, model.deactivation)
    if cache_key in cache:
        return cache[cache_key]
    lg = psi.layered
    t = psi.clock
    result = None
    if t > 1:
        replay = Realization(lg, clamped_statuses(psi))
        trace = diffuse(model, psi.schedule(), replay)
        closed = True
        for tau in range(1, t):
            actives = trace.active_sets[tau - 1]
            sl = lg.layer_edges(tau)
            for eid in range(sl.start, sl.stop):
                p = lg.edge_prob[eid]
                if p <= 0.0 or p >= 1.0 or eid in psi.observed:
                    continue
                if int(lg.edge_src[eid]) in actives:
                    closed = False
                    break
            if not closed:
                break
        if closed:
            initial = np.zeros(lg.base.node_count, dtype=bool)
            for u in trace.active_sets[t - 1]:
                initial[u] = True
            result = (t, initial, _unobserved_random_edges(psi, from_layer=t))
    cache[cache_key] = result
    return result


def _finish_mc(delta: np.ndarray, n_sims: int) -> MarginalGainEstimate:
    delta = delta.astype(np.float64)
    mean = float(delta.mean())
    std_error = float(delta.std(ddof=1) / np.sqrt(n_sims)) if n_sims > 1 else 0.0
    return MarginalGainEstimate(mean, std_error, n_sims, exact=False)


def mc_marginal_gain(v: int, psi: PartialRealization, layered: LayeredGraph,
                     model: DiffusionModel, n_sims: int,
                     rng: np.random.Generator) -> MarginalGainEstimate:
    """Monte Carlo estimate of the conditional expected gain.

    Draws ``n_sims`` worlds from p(phi | psi) by clamping observed edges and
    sampling the rest; each world serves the with-seed and without-seed
    counterfactual (common random numbers).
    """
    if psi.layered is not layered:
        raise ValueError("psi belongs to a different layered graph")
    if v in psi.dom:
        raise ValueError(f"node {v} already active")
    if n_sims < 1:
        raise ValueError("need at least one simulation")
    if model.variant == STANDARD_IC:
        # per-simulation activation times rule out the packed kernel
        ids = _unobserved_random_edges(psi)
        template = clamped_statuses(psi)
        live = np.repeat(template[None, :], n_sims, axis=0)
        if len(ids):
            p = layered.edge_prob[ids].astype(np.float32)
            live[:, ids] = rng.random((n_sims, len(ids)), dtype=np.float32) < p
        base_schedule = psi.schedule()
        base = _batched_cumulative(layered, model, base_schedule, live)
        withv = _batched_cumulative(layered, model, base_schedule + [(v, psi.clock)], live)
        return _finish_mc(withv - base, n_sims)

    restriction = _future_restriction(psi, model)
    if restriction is None:
        ids = _unobserved_random_edges(psi)
        start_time, initial = 1, None
        base_schedule = psi.schedule()
    else:
        start_time, initial, ids = restriction
        base_schedule = []
    live8 = _sample_packed(psi, ids, n_sims, rng)
    base = simulate_cascades_packed(layered, model, live8, n_sims, schedule=base_schedule,
                                    initial_active=initial, start_time=start_time)
    withv = simulate_cascades_packed(layered, model, live8, n_sims,
                                     schedule=base_schedule + [(v, psi.clock)],
                                     initial_active=initial, start_time=start_time)
    return _finish_mc(withv - base, n_sims)


def _sample_packed(psi: PartialRealization, ids: np.ndarray, n_sims: int,
                   rng: np.random.Generator) -> np.ndarray:
    """Packed (edge, simulation-bits) statuses: clamped template plus fresh
    draws for the requested random edges."""
    lg = psi.layered
    template = clamped_statuses(psi)
    words = (n_sims + 7) // 8
    live8 = np.where(template[:, None], np.uint8(0xFF), np.uint8(0)).astype(np.uint8)
    live8 = np.repeat(live8, words, axis=1)
    if len(ids):
        p = lg.edge_prob[ids].astype(np.float32)
        draws = rng.random((len(ids), n_sims), dtype=np.float32) < p[:, None]
        live8[ids, :] = np.packbits(draws, axis=1)
    return live8


def expected_step_counts(psi: PartialRealization, layered: LayeredGraph,
                         model: DiffusionModel, extra_seeds=(),
                         cap: int = DEFAULT_ENUMERATION_CAP,
                         from_layer: int | None = None) -> np.ndarray:
    """Exact E[|active set at t|] for t = 1..T given ``psi`` plus extra seeds.

    ``from_layer`` restricts the enumeration to edges departing at or after
    that layer (sound whenever earlier unobserved edges cannot fire).
    """
    schedule = psi.schedule() + [(v, t) for v, t in extra_seeds]
    schedule.sort(key=lambda e: e[1])
    totals = np.zeros(layered.horizon)
    for live, weights in _enumeration_grid(psi, cap, from_layer):
        mats = simulate_cascades(layered, model, live, schedule=schedule)
        totals += np.array([float(weights @ mat.sum(axis=1)) for mat in mats])
    return totals


def expected_cumulative_spread(psi: PartialRealization, layered: LayeredGraph,
                               model: DiffusionModel, extra_seeds=(),
                               cap: int = DEFAULT_ENUMERATION_CAP) -> float:
    """Exact E[cumulative spread | psi] for dom(psi) plus ``extra_seeds``."""
    return float(expected_step_counts(psi, layered, model, extra_seeds, cap).sum())


@dataclass
class EstimatorConfig:
    """How a policy estimates marginal gains.

    ``auto`` uses exact enumeration while the instance fits under the cap
    and Monte Carlo beyond it.
    """

    mode: str = "auto"  # "exact" | "mc" | "auto"
    n_sims: int = 1000
    cap: int = DEFAULT_ENUMERATION_CAP
    master_seed: int = 0

    def __post_init__(self):
        if self.mode not in ("exact", "mc", "auto"):
            raise ValueError(f"unknown estimator mode {self.mode!r}")


class GainEstimator:
    """Evaluates marginal gains for a policy run.

    Exact values are memoized by (observation, candidate); Monte Carlo draws
    use a stream derived from the configured master seed and the caller's
    stream key, so estimates are reproducible regardless of evaluation
    order.
    """

    def __init__(self, config: EstimatorConfig, layered: LayeredGraph, model: DiffusionModel,
                 stream_prefix: tuple = ()):
        self.config = config
        self.layered = layered
        self.model = model
        self.stream_prefix = tuple(stream_prefix)
        self.evaluations = 0
        self._memo: dict = {}

    def _use_exact(self, psi: PartialRealization) -> bool:
        if self.config.mode == "exact":
            return True
        if self.config.mode == "mc":
            return False
        return len(_unobserved_random_edges(psi)) <= self.config.cap

    def estimate(self, v: int, psi: PartialRealization, step_key: tuple = ()) -> MarginalGainEstimate:
        self.evaluations += 1
        if self._use_exact(psi):
            memo_key = (psi.key, v)
            hit = self._memo.get(memo_key)
            if hit is None:
                hit = exact_marginal_gain(v, psi, self.layered, self.model, cap=self.config.cap)
                self._memo[memo_key] = hit
            return hit
        rng = derive_rng(self.config.master_seed, *self.stream_prefix, *step_key, v)
        return mc_marginal_gain(v, psi, self.layered, self.model, self.config.n_sims, rng)


def exact_policy_value(policy, layered: LayeredGraph, model: DiffusionModel, k: int,
                       cap: int = DEFAULT_ENUMERATION_CAP, rng=None) -> float:
    """Expected cumulative spread of a policy, by full enumeration.

    Every positive-probability world is generated, the policy is run against
    it with its induced myopic feedback, and the resulting spreads are
    averaged under the prior.
    """
    from .policies import run_adaptive_policy

    if getattr(policy, "stochastic", False) and rng is None:
        raise ValueError("stochastic policy needs a fixed rng for exact evaluation")
    from .diffusion import empty_partial_realization

    root = empty_partial_realization(layered)
    total = 0.0
    for live, weights in _enumeration_grid(root, cap):
        for row, weight in zip(live, weights):
            phi = Realization(layered, row)
            result = run_adaptive_policy(policy, layered.base, model, k, layered.horizon,
                                         phi, rng=rng, layered=layered)
            total += weight * result.utility_cumulative
    return total
