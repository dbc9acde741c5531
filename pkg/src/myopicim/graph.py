"""Static influence graphs, SNAP edge-list I/O, and the time-expanded layered view.

An :class:`InfluenceGraph` is a directed graph with a probability on every
edge.  A :class:`LayeredGraph` unrolls it over a finite horizon ``T``: layer
``t`` holds a copy of every node at time ``t``, and every base edge
``(v, u)`` becomes one timed edge ``(v_t, u_{t+1})`` per layer boundary.
Optional persistence edges ``(v_t, v_{t+1})`` carry activity forward in
time: probability 1 for progressive processes, an arbitrary survival
probability for non-progressive ones, or absent.
"""

from __future__ import annotations

import io
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import EdgeListParseError

INFLUENCE = 0
PERSISTENCE = 1

PERSISTENCE_MODES = ("always-live", "random", "none")


class InfluenceGraph:
    """Directed graph with per-edge influence probabilities.

    Nodes are dense integers ``0..n-1``.  ``original_ids`` maps them back to
    the ids used in the source file, so reports stay comparable with
    published datasets.
    """

    def __init__(
        self,
        node_count: int,
        edges: Iterable[tuple[int, int, float]],
        original_ids: list[int] | None = None,
        undirected_input: bool = False,
    ):
        edges = list(edges)
        seen: set[tuple[int, int]] = set()
        for src, dst, p in edges:
            if not (0 <= src < node_count and 0 <= dst < node_count):
                raise ValueError(f"edge ({src}, {dst}) outside node range [0, {node_count})")
            if src == dst:
                raise ValueError(f"self-loop on node {src}")
            if (src, dst) in seen:
                raise ValueError(f"duplicate edge ({src}, {dst})")
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"edge probability {p} outside [0, 1]")
            seen.add((src, dst))
        self.node_count = int(node_count)
        self.edge_src = np.array([e[0] for e in edges], dtype=np.int32)
        self.edge_dst = np.array([e[1] for e in edges], dtype=np.int32)
        self.edge_prob = np.array([e[2] for e in edges], dtype=np.float64)
        self.original_ids = list(original_ids) if original_ids is not None else list(range(node_count))
        self.undirected_input = bool(undirected_input)
        self._adjacency: list[list[tuple[int, float]]] | None = None

    @property
    def edge_count(self) -> int:
        return len(self.edge_src)

    def edges(self) -> list[tuple[int, int, float]]:
        return list(zip(self.edge_src.tolist(), self.edge_dst.tolist(), self.edge_prob.tolist()))

    def out_edges(self, v: int) -> list[tuple[int, float]]:
        if self._adjacency is None:
            adj: list[list[tuple[int, float]]] = [[] for _ in range(self.node_count)]
            for s, d, p in zip(self.edge_src.tolist(), self.edge_dst.tolist(), self.edge_prob.tolist()):
                adj[s].append((d, p))
            self._adjacency = adj
        return self._adjacency[v]

    def out_degrees(self) -> np.ndarray:
        return np.bincount(self.edge_src, minlength=self.node_count)

    def __eq__(self, other) -> bool:
        if not isinstance(other, InfluenceGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.original_ids == other.original_ids
            and sorted(self.edges()) == sorted(other.edges())
        )

    def __repr__(self) -> str:
        return f"InfluenceGraph(nodes={self.node_count}, edges={self.edge_count})"


def load_snap_edge_list(source, directed: bool = True) -> InfluenceGraph:
    """Parse a SNAP-style edge list: one "u v" integer pair per line.

    Lines starting with '#' are comments.  Node ids are re-indexed densely,
    preserving first-appearance order.  With ``directed=False`` every pair is
    stored as two directed edges (repeated or reversed listings collapse to
    one undirected edge).  Probabilities start at 0 until assigned.

    ``source`` may be a filesystem path or a file-like object.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            return load_snap_edge_list(fh, directed=directed)
    if not isinstance(source, io.IOBase) and not hasattr(source, "__iter__"):
        raise TypeError("source must be a path or a file-like object")

    id_map: dict[int, int] = {}
    original_ids: list[int] = []
    pairs: list[tuple[int, int]] = []
    seen_pairs: set[tuple[int, int]] = set()
    n_lines = 0
    for lineno, raw in enumerate(source, start=1):
        n_lines += 1
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise EdgeListParseError(lineno, f"expected two tokens, got {len(tokens)}")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise EdgeListParseError(lineno, f"non-integer token in {line!r}") from None
        for node in (u, v):
            if node not in id_map:
                id_map[node] = len(original_ids)
                original_ids.append(node)
        a, b = id_map[u], id_map[v]
        if a == b:
            raise EdgeListParseError(lineno, f"self-loop on node {u}")
        key = (a, b) if directed else (min(a, b), max(a, b))
        if key in seen_pairs:
            continue
        seen_pairs.add(key)
        pairs.append((a, b))
    if not original_ids:
        raise EdgeListParseError(n_lines, "empty edge list")
    edges: list[tuple[int, int, float]] = []
    for a, b in pairs:
        edges.append((a, b, 0.0))
        if not directed:
            edges.append((b, a, 0.0))
    return InfluenceGraph(
        len(original_ids), edges, original_ids=original_ids, undirected_input=not directed
    )


def serialize_edge_list(graph: InfluenceGraph) -> str:
    """Inverse of :func:`load_snap_edge_list` modulo comment lines.

    Emits one stored directed edge per line using original node ids.
    """
    lines = []
    for s, d in zip(graph.edge_src.tolist(), graph.edge_dst.tolist()):
        lines.append(f"{graph.original_ids[s]} {graph.original_ids[d]}")
    return "\n".join(lines) + ("\n" if lines else "")


def assign_uniform_probability(graph: InfluenceGraph, p: float) -> InfluenceGraph:
    """Return a copy of ``graph`` with every edge probability set to ``p``."""
    if not (0.0 <= p <= 1.0):
        raise ValueError(f"probability {p} outside [0, 1]")
    out = InfluenceGraph(
        graph.node_count,
        [],
        original_ids=graph.original_ids,
        undirected_input=graph.undirected_input,
    )
    out.edge_src = graph.edge_src.copy()
    out.edge_dst = graph.edge_dst.copy()
    out.edge_prob = np.full(graph.edge_count, float(p))
    return out


def erdos_renyi_graph(n: int, edge_prob: float, rng: np.random.Generator) -> InfluenceGraph:
    """G(n, p) digraph helper for tests and synthetic experiments."""
    if n < 1:
        raise ValueError("need at least one node")
    draws = rng.random((n, n)) < edge_prob
    np.fill_diagonal(draws, False)
    src, dst = np.nonzero(draws)
    return InfluenceGraph(n, [(int(s), int(d), 0.0) for s, d in zip(src, dst)])


@dataclass(frozen=True)
class GraphStats:
    node_count: int
    edge_count: int
    mean_degree: float
    max_degree: int


def graph_stats(graph: InfluenceGraph) -> GraphStats:
    """Node/edge counts and out-degree statistics.

    ``edge_count`` follows the input convention (undirected edges counted
    once for graphs loaded undirected); ``mean_degree`` is the mean
    out-degree of the directed storage.
    """
    directed_count = graph.edge_count
    reported = directed_count // 2 if graph.undirected_input else directed_count
    degrees = graph.out_degrees()
    mean_degree = directed_count / graph.node_count if graph.node_count else 0.0
    max_degree = int(degrees.max()) if graph.node_count else 0
    return GraphStats(graph.node_count, reported, mean_degree, max_degree)


def betweenness_centrality(graph: InfluenceGraph) -> dict[int, float]:
    """Brandes betweenness on the unweighted digraph, endpoints excluded.

    Scores are raw pass-through counts (no normalization): node ``w`` earns,
    for every ordered pair (s, t), the fraction of shortest s-t paths that
    pass through ``w``.
    """
    if graph.node_count == 0:
        raise ValueError("empty graph")
    n = graph.node_count
    scores = [0.0] * n
    for s in range(n):
        # single-source BFS counting shortest paths (Brandes forward pass)
        dist = [-1] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        dist[s] = 0
        sigma[s] = 1.0
        order: list[int] = []
        queue = deque([s])
        while queue:
            v = queue.popleft()
            order.append(v)
            for w, _ in graph.out_edges(v):
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    queue.append(w)
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        # dependency accumulation in reverse BFS order
        delta = [0.0] * n
        for w in reversed(order):
            for v in preds[w]:
                delta[v] += (sigma[v] / sigma[w]) * (1.0 + delta[w])
            if w != s:
                scores[w] += delta[w]
    return {v: scores[v] for v in range(n)}


class LayeredGraph:
    """Time-expanded view of an :class:`InfluenceGraph` over horizon ``T``.

    Timed edges are feedforward: each crosses exactly one layer boundary
    (``from_time + 1 == to_time``).  Edges within a layer boundary are laid
    out contiguously and sorted by destination so batched simulation can
    reduce per destination in one pass.
    """

    def __init__(self, base: InfluenceGraph, horizon: int, persistence_mode: str,
                 persistence_probability: float | None = None):
        if horizon < 1:
            raise ValueError("horizon must be >= 1")
        if persistence_mode not in PERSISTENCE_MODES:
            raise ValueError(f"unknown persistence mode {persistence_mode!r}")
        if persistence_mode == "random":
            if persistence_probability is None:
                raise ValueError("persistence_mode='random' needs a probability")
            if not (0.0 <= persistence_probability <= 1.0):
                raise ValueError("persistence probability outside [0, 1]")
        self.base = base
        self.horizon = int(horizon)
        self.persistence_mode = persistence_mode
        self.persistence_probability = persistence_probability

        src: list[int] = []
        dst: list[int] = []
        prob: list[float] = []
        kind: list[int] = []
        from_time: list[int] = []
        self._layer_bounds: list[tuple[int, int]] = []  # [t-1] -> (start, end)
        base_edges = sorted(zip(base.edge_dst.tolist(), base.edge_src.tolist(), base.edge_prob.tolist()))
        for t in range(1, self.horizon):
            start = len(src)
            layer: list[tuple[int, int, int, float]] = []  # (dst, kind, src, p)
            for d, s, p in base_edges:
                layer.append((d, INFLUENCE, s, p))
            if persistence_mode == "always-live":
                for v in range(base.node_count):
                    layer.append((v, PERSISTENCE, v, 1.0))
            elif persistence_mode == "random":
                for v in range(base.node_count):
                    layer.append((v, PERSISTENCE, v, float(persistence_probability)))
            layer.sort()
            for d, k, s, p in layer:
                src.append(s)
                dst.append(d)
                prob.append(p)
                kind.append(k)
                from_time.append(t)
            self._layer_bounds.append((start, len(src)))

        self.edge_src = np.array(src, dtype=np.int32)
        self.edge_dst = np.array(dst, dtype=np.int32)
        self.edge_prob = np.array(prob, dtype=np.float64)
        self.edge_kind = np.array(kind, dtype=np.uint8)
        self.edge_from_time = np.array(from_time, dtype=np.int32)
        self.random_edge_ids = np.nonzero((self.edge_prob > 0.0) & (self.edge_prob < 1.0))[0]
        # statuses of deterministic edges never change across realizations
        self.forced_statuses = self.edge_prob >= 1.0
        self._index = {
            (int(s), int(t), int(d)): eid
            for eid, (s, t, d) in enumerate(zip(src, from_time, dst))
        }
        self._out_edges: dict[tuple[int, int], list[int]] = {}
        for eid, (s, t) in enumerate(zip(src, from_time)):
            self._out_edges.setdefault((int(s), int(t)), []).append(eid)
        # per-layer destination groups for the batched kernel
        self._groups: list[tuple[np.ndarray, np.ndarray]] = []
        for t in range(1, self.horizon):
            lo, hi = self._layer_bounds[t - 1]
            d = self.edge_dst[lo:hi]
            if len(d) == 0:
                self._groups.append((np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int32)))
                continue
            starts = np.nonzero(np.diff(d, prepend=d[0] - 1))[0]
            self._groups.append((starts, d[starts]))

    @property
    def timed_edge_count(self) -> int:
        return len(self.edge_src)

    def layer_edges(self, t: int) -> slice:
        """Slice of timed edges departing layer ``t`` (1 <= t < horizon)."""
        lo, hi = self._layer_bounds[t - 1]
        return slice(lo, hi)

    def layer_groups(self, t: int) -> tuple[np.ndarray, np.ndarray]:
        return self._groups[t - 1]

    def edge_index(self, src: int, t_from: int, dst: int) -> int:
        """Timed-edge id of (src at layer t_from) -> (dst at layer t_from+1)."""
        return self._index[(src, t_from, dst)]

    def out_edge_ids(self, src: int, t_from: int) -> list[int]:
        """Timed edges departing node ``src`` at layer ``t_from``."""
        return self._out_edges.get((src, t_from), [])

    def edge_label(self, eid: int) -> str:
        s, t, d = int(self.edge_src[eid]), int(self.edge_from_time[eid]), int(self.edge_dst[eid])
        return f"({s}@{t}->{d}@{t + 1})"

    def __repr__(self) -> str:
        return (
            f"LayeredGraph(nodes={self.base.node_count}, horizon={self.horizon}, "
            f"timed_edges={self.timed_edge_count}, persistence={self.persistence_mode!r})"
        )


def build_layered_graph(graph: InfluenceGraph, horizon: int,
                        persistence_mode: str = "always-live",
                        persistence_probability: float | None = None) -> LayeredGraph:
    """Unroll ``graph`` over ``horizon`` time steps."""
    return LayeredGraph(graph, horizon, persistence_mode, persistence_probability)


def all_pairs_hop_distances(graph: InfluenceGraph) -> np.ndarray:
    """Unweighted all-pairs distances (for diameter / average path length)."""
    n = graph.node_count
    dist = np.full((n, n), math.inf)
    for s in range(n):
        dist[s, s] = 0
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w, _ in graph.out_edges(v):
                if math.isinf(dist[s, w]):
                    dist[s, w] = dist[s, v] + 1
                    queue.append(w)
    return dist
