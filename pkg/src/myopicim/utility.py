"""Spread utilities: final spread, cumulative spread, layered-graph spread.

The cumulative spread counts node-steps: an active node earns one unit per
step it is active, so the two-way equivalence with plain spread on the
layered graph holds by construction for the multi-attempt models.
"""

from __future__ import annotations

from collections import deque

from .diffusion import DiffusionModel, Realization, diffuse


def final_spread(schedule, realization: Realization, model: DiffusionModel) -> int:
    """Nodes active at the final step.

    For progressive models this equals the number of nodes ever activated;
    under deactivation it counts survivors plus the last arrivals.
    """
    trace = diffuse(model, schedule, realization)
    return len(trace.active_sets[-1])


def cumulative_spread(schedule, realization: Realization, model: DiffusionModel) -> int:
    """Sum over t = 1..T of the number of active nodes at step t."""
    trace = diffuse(model, schedule, realization)
    return sum(trace.counts())


def layered_spread(timed_seeds, realization: Realization) -> int:
    """Timed nodes reachable from timed seeds via live timed edges.

    Seeds are (node, time) pairs and count themselves.  Equals
    :func:`cumulative_spread` of the same schedule for models whose
    eligibility never filters an edge (multi-attempt variants).
    """
    lg = realization.layered
    seen: set[tuple[int, int]] = set()
    queue: deque[tuple[int, int]] = deque()
    for v, t in timed_seeds:
        if not (1 <= t <= lg.horizon):
            raise ValueError(f"timed seed ({v}, {t}) outside horizon")
        if (v, t) not in seen:
            seen.add((v, t))
            queue.append((v, t))
    while queue:
        v, t = queue.popleft()
        if t >= lg.horizon:
            continue
        for eid in lg.out_edge_ids(v, t):
            if not realization.statuses[eid]:
                continue
            nxt = (int(lg.edge_dst[eid]), t + 1)
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen)
