"""Shared fixtures and independent oracles for the test suite."""

from collections import deque

import numpy as np
import pytest

from myopicim import InfluenceGraph, Realization


def two_node_chain(p: float) -> InfluenceGraph:
    """u=0 -> v=1 with probability p."""
    return InfluenceGraph(2, [(0, 1, p)])


def toy_triangle() -> InfluenceGraph:
    """v=0 with edges to u=1 (0.9) and w=2 (0.1)."""
    return InfluenceGraph(3, [(0, 1, 0.9), (0, 2, 0.1)])


def realization_from(layered, live_edges) -> Realization:
    """Realization with the given (src, t, dst) triples live, others dead
    (deterministic edges keep their forced status)."""
    statuses = layered.forced_statuses.copy()
    for src, t, dst in live_edges:
        statuses[layered.edge_index(src, t, dst)] = True
    return Realization(layered, statuses)


def brute_force_betweenness(graph: InfluenceGraph) -> dict[int, float]:
    """Betweenness by enumerating all shortest paths pair by pair."""
    n = graph.node_count
    adj = [[u for u, _ in graph.out_edges(v)] for v in range(n)]

    def all_shortest_paths(s, t):
        if s == t:
            return []
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        if t not in dist:
            return []
        paths = []

        def extend(path):
            v = path[-1]
            if v == t:
                paths.append(path)
                return
            for w in adj[v]:
                if dist.get(w) == dist[v] + 1 and dist[w] <= dist[t]:
                    extend(path + [w])

        extend([s])
        return paths

    scores = {v: 0.0 for v in range(n)}
    for s in range(n):
        for t in range(n):
            paths = all_shortest_paths(s, t)
            if not paths:
                continue
            for v in range(n):
                if v in (s, t):
                    continue
                through = sum(1 for path in paths if v in path[1:-1])
                scores[v] += through / len(paths)
    return scores


def timed_reachable(layered, realization, timed_seeds) -> set[tuple[int, int]]:
    """Independent BFS over live timed edges; returns timed nodes reached."""
    live = {
        (int(layered.edge_src[e]), int(layered.edge_from_time[e]), int(layered.edge_dst[e]))
        for e in range(layered.timed_edge_count)
        if realization.statuses[e]
    }
    seen = set()
    queue = deque()
    for v, t in timed_seeds:
        if (v, t) not in seen:
            seen.add((v, t))
            queue.append((v, t))
    while queue:
        v, t = queue.popleft()
        for (s, tt, d) in live:
            if s == v and tt == t and (d, t + 1) not in seen:
                seen.add((d, t + 1))
                queue.append((d, t + 1))
    return seen


def random_probability_graph(rng, n_max=4, density=0.5, p_choices=(0.2, 0.5, 0.8)):
    from myopicim import assign_uniform_probability, erdos_renyi_graph

    n = int(rng.integers(1, n_max + 1))
    graph = erdos_renyi_graph(n, density, rng)
    return assign_uniform_probability(graph, float(rng.choice(p_choices)))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
