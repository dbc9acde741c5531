import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from myopicim import (
    EdgeListParseError,
    InfluenceGraph,
    assign_uniform_probability,
    betweenness_centrality,
    build_layered_graph,
    erdos_renyi_graph,
    graph_stats,
    load_snap_edge_list,
    serialize_edge_list,
)
from conftest import brute_force_betweenness


def load_text(text, directed=True):
    return load_snap_edge_list(io.StringIO(text), directed=directed)


class TestEdgeListLoading:
    def test_two_edges(self):
        g = load_text("0 1\n1 2")
        assert g.node_count == 3
        assert sorted((s, d) for s, d, _ in g.edges()) == [(0, 1), (1, 2)]

    def test_comment_and_dense_reindex(self):
        g = load_text("# c\n5 9\n9 5")
        assert g.node_count == 2
        assert g.original_ids == [5, 9]
        assert sorted((s, d) for s, d, _ in g.edges()) == [(0, 1), (1, 0)]

    def test_non_integer_token_reports_line(self):
        with pytest.raises(EdgeListParseError) as exc:
            load_text("0 1\n0 x")
        assert exc.value.line_number == 2

    def test_wrong_token_count(self):
        with pytest.raises(EdgeListParseError):
            load_text("0 1 2")

    def test_empty_input(self):
        with pytest.raises(EdgeListParseError):
            load_text("# only a comment\n")

    def test_undirected_expansion(self):
        g = load_text("0 1\n1 0\n1 2", directed=False)
        assert g.edge_count == 4  # both listings of 0-1 collapse to one pair
        assert g.undirected_input

    def test_duplicate_directed_edges_collapse(self):
        g = load_text("0 1\n0 1")
        assert g.edge_count == 1

    def test_probabilities_start_at_zero(self):
        g = load_text("0 1")
        assert g.edge_prob.tolist() == [0.0]


@given(st.integers(2, 12), st.integers(0, 42), st.booleans())
@settings(max_examples=60, deadline=None)
def test_serialize_roundtrip(n, seed, directed):
    rng = np.random.default_rng(seed)
    base = erdos_renyi_graph(n, 0.3, rng)
    if base.edge_count == 0:
        return
    # sparse original ids, as in published edge lists
    lines = [f"{s * 7 + 3} {d * 7 + 3}" for s, d, _ in base.edges()]
    text = "\n".join(lines)
    loaded = load_snap_edge_list(io.StringIO(text), directed=directed)
    reloaded = load_snap_edge_list(io.StringIO(serialize_edge_list(loaded)), directed=directed)
    assert reloaded == loaded


class TestUniformProbability:
    def test_assigns_everywhere(self):
        g = load_text("0 1\n1 2\n2 0")
        g2 = assign_uniform_probability(g, 0.1)
        assert g2.edge_prob.tolist() == [0.1, 0.1, 0.1]
        assert g.edge_prob.tolist() == [0.0, 0.0, 0.0]  # original untouched

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_boundary_values(self, p):
        g = assign_uniform_probability(load_text("0 1"), p)
        assert g.edge_prob[0] == p

    @pytest.mark.parametrize("p", [-0.1, 1.5])
    def test_rejects_out_of_range(self, p):
        with pytest.raises(ValueError):
            assign_uniform_probability(load_text("0 1"), p)


class TestGraphValidation:
    def test_rejects_self_loop(self):
        with pytest.raises(ValueError):
            InfluenceGraph(2, [(0, 0, 0.5)])

    def test_rejects_duplicate(self):
        with pytest.raises(ValueError):
            InfluenceGraph(2, [(0, 1, 0.5), (0, 1, 0.5)])

    def test_rejects_bad_probability(self):
        with pytest.raises(ValueError):
            InfluenceGraph(2, [(0, 1, 1.5)])


class TestLayeredGraph:
    def test_two_node_counts(self):
        g = InfluenceGraph(2, [(0, 1, 0.5)])
        lg = build_layered_graph(g, 3, "always-live")
        assert lg.timed_edge_count == 2 + 4  # 2 influence + 4 persistence

    def test_single_layer_has_no_edges(self):
        g = InfluenceGraph(2, [(0, 1, 0.5)])
        assert build_layered_graph(g, 1).timed_edge_count == 0

    def test_zero_horizon_rejected(self):
        g = InfluenceGraph(2, [(0, 1, 0.5)])
        with pytest.raises(ValueError):
            build_layered_graph(g, 0)

    def test_persistence_modes(self):
        g = InfluenceGraph(2, [(0, 1, 0.5)])
        none = build_layered_graph(g, 3, "none")
        assert none.timed_edge_count == 2
        random = build_layered_graph(g, 3, "random", 0.25)
        assert random.timed_edge_count == 6
        eid = random.edge_index(0, 1, 0)
        assert random.edge_prob[eid] == 0.25

    def test_random_mode_needs_probability(self):
        g = InfluenceGraph(2, [(0, 1, 0.5)])
        with pytest.raises(ValueError):
            build_layered_graph(g, 3, "random")

    @given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 99))
    @settings(max_examples=60, deadline=None)
    def test_edge_count_formula(self, n, horizon, seed):
        g = erdos_renyi_graph(n, 0.4, np.random.default_rng(seed))
        lg = build_layered_graph(g, horizon, "always-live")
        assert lg.timed_edge_count == (horizon - 1) * (g.edge_count + n)

    @given(st.integers(1, 6), st.integers(1, 5), st.integers(0, 99))
    @settings(max_examples=60, deadline=None)
    def test_feedforward(self, n, horizon, seed):
        g = erdos_renyi_graph(n, 0.4, np.random.default_rng(seed))
        lg = build_layered_graph(g, horizon, "always-live")
        for e in range(lg.timed_edge_count):
            t = int(lg.edge_from_time[e])
            assert 1 <= t < horizon  # every edge crosses exactly one boundary


class TestBetweenness:
    def test_path_interior(self):
        g = InfluenceGraph(3, [(0, 1, 0.0), (1, 2, 0.0)])
        scores = betweenness_centrality(g)
        assert scores == {0: 0.0, 1: 1.0, 2: 0.0}

    def test_out_star_all_zero(self):
        g = InfluenceGraph(4, [(0, 1, 0.0), (0, 2, 0.0), (0, 3, 0.0)])
        assert set(betweenness_centrality(g).values()) == {0.0}

    def test_four_cycle_symmetric(self):
        g = InfluenceGraph(4, [(0, 1, 0.0), (1, 2, 0.0), (2, 3, 0.0), (3, 0, 0.0)])
        scores = betweenness_centrality(g)
        oracle = brute_force_betweenness(g)
        assert scores == pytest.approx(oracle)
        assert len(set(scores.values())) == 1

    @given(st.integers(2, 8), st.integers(0, 199))
    @settings(max_examples=80, deadline=None)
    def test_matches_brute_force(self, n, seed):
        g = erdos_renyi_graph(n, 0.35, np.random.default_rng(seed))
        scores = betweenness_centrality(g)
        oracle = brute_force_betweenness(g)
        for v in range(n):
            assert scores[v] == pytest.approx(oracle[v], abs=1e-9)

    def test_empty_graph_rejected(self):
        with pytest.raises(ValueError):
            betweenness_centrality(InfluenceGraph(0, []))


class TestGraphStats:
    def test_no_edges(self):
        stats = graph_stats(InfluenceGraph(5, []))
        assert (stats.node_count, stats.edge_count) == (5, 0)
        assert stats.mean_degree == 0.0
        assert stats.max_degree == 0

    def test_directed_counts(self):
        g = load_text("0 1\n0 2\n1 2")
        stats = graph_stats(g)
        assert (stats.node_count, stats.edge_count) == (3, 3)
        assert stats.mean_degree == pytest.approx(1.0)
        assert stats.max_degree == 2

    def test_undirected_reports_pair_count(self):
        g = load_text("0 1\n1 2", directed=False)
        stats = graph_stats(g)
        assert stats.edge_count == 2  # pairs, not directed arcs
        assert stats.mean_degree == pytest.approx(4 / 3)
        assert stats.max_degree == 2
