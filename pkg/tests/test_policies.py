import itertools

import numpy as np
import pytest

import myopicim as m
from myopicim.diffusion import empty_partial_realization, enumerate_realizations, observe_myopic
from myopicim.estimation import EstimatorConfig, GainEstimator, exact_policy_value
from myopicim.policies import adaptive_greedy_step, per_step_batch_greedy
from conftest import realization_from, toy_triangle, two_node_chain


def exact_config():
    return EstimatorConfig(mode="exact")


class TestAdaptiveGreedyStep:
    def test_toy_second_pick_is_the_uncovered_node(self):
        model = m.modified_ic()
        lg = model.build_layered(toy_triangle(), 3)
        phi = realization_from(lg, [(0, 1, 2), (0, 2, 2)])  # w active, u not
        psi = observe_myopic(phi, empty_partial_realization(lg), [0], model)
        estimator = GainEstimator(exact_config(), lg, model)
        assert adaptive_greedy_step(psi, estimator) == 1

    def test_symmetric_pair_breaks_tie_low(self):
        g = m.InfluenceGraph(2, [(0, 1, 0.5), (1, 0, 0.5)])
        model = m.modified_ic()
        lg = model.build_layered(g, 3)
        estimator = GainEstimator(exact_config(), lg, model)
        assert adaptive_greedy_step(empty_partial_realization(lg), estimator) == 0

    def test_star_center_wins(self):
        g = m.InfluenceGraph(4, [(0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.5)])
        model = m.modified_ic()
        lg = model.build_layered(g, 3)
        estimator = GainEstimator(exact_config(), lg, model)
        psi = empty_partial_realization(lg)
        choice = adaptive_greedy_step(psi, estimator)
        gains = {v: m.exact_marginal_gain(v, psi, lg, model).mean for v in range(4)}
        assert choice == max(sorted(gains), key=lambda v: gains[v]) == 0

    def test_exhausted_pool_returns_none(self):
        model = m.modified_ic()
        lg = model.build_layered(m.InfluenceGraph(1, []), 2)
        psi = m.PartialRealization(lg, {}, {0: 1})
        estimator = GainEstimator(exact_config(), lg, model)
        assert adaptive_greedy_step(psi, estimator) is None


class TestRunAdaptivePolicy:
    def test_zero_budget(self):
        model = m.modified_ic()
        lg = model.build_layered(toy_triangle(), 3)
        phi = m.sample_realization(lg, np.random.default_rng(0))
        result = m.run_adaptive_policy(m.GreedyPolicy(exact_config()), toy_triangle(),
                                       model, 0, 3, phi)
        assert len(result.seeds) == 0
        assert result.utility_cumulative == 0

    def test_toy_true_world_saturates(self):
        model = m.modified_ic()
        graph = toy_triangle()
        lg = model.build_layered(graph, 3)
        phi = realization_from(lg, [(0, 1, 2), (0, 2, 2)])
        result = m.run_adaptive_policy(m.GreedyPolicy(exact_config()), graph, model, 2, 3, phi)
        assert result.seeds.entries == [(0, 1), (1, 2)]
        assert result.utility_final == 3

    def test_random_policy_reproducible(self):
        model = m.modified_ic()
        g = m.assign_uniform_probability(
            m.erdos_renyi_graph(10, 0.3, np.random.default_rng(3)), 0.2
        )
        lg = model.build_layered(g, 4)
        phi = m.sample_realization(lg, np.random.default_rng(5))
        runs = [
            m.run_adaptive_policy(m.RandomPolicy(), g, model, 3, 4, phi,
                                  rng=np.random.default_rng(77))
            for _ in range(2)
        ]
        assert runs[0].seeds.entries == runs[1].seeds.entries
        assert runs[0].utility_cumulative == runs[1].utility_cumulative

    def test_budget_and_distinctness_invariants(self):
        model = m.modified_ic()
        rng = np.random.default_rng(11)
        config = EstimatorConfig(mode="auto", n_sims=50, master_seed=2)
        for policy_factory in (
            lambda: m.GreedyPolicy(config),
            lambda: m.DegreePolicy(),
            lambda: m.RandomPolicy(),
        ):
            g = m.assign_uniform_probability(m.erdos_renyi_graph(6, 0.4, rng), 0.5)
            lg = model.build_layered(g, 4)
            phi = m.sample_realization(lg, rng)
            result = m.run_adaptive_policy(policy_factory(), g, model, 3, 4, phi,
                                           rng=np.random.default_rng(1))
            nodes = [v for v, _ in result.seeds]
            assert len(nodes) <= 3
            assert len(set(nodes)) == len(nodes)

    def test_stops_when_everything_active(self):
        model = m.modified_ic()
        g = m.InfluenceGraph(2, [(0, 1, 1.0), (1, 0, 1.0)])
        lg = model.build_layered(g, 3)
        phi = m.sample_realization(lg, np.random.default_rng(0))
        result = m.run_adaptive_policy(m.GreedyPolicy(exact_config()), g, model, 2, 3, phi)
        assert len(result.seeds) == 1  # second pick impossible: all active


class TestLazyGreedy:
    @pytest.mark.parametrize("seed", range(30))
    def test_matches_plain_greedy_under_exact_estimation(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 5))
        g = m.assign_uniform_probability(
            m.erdos_renyi_graph(n, 0.5, rng), float(rng.choice([0.2, 0.5, 0.8]))
        )
        model = m.modified_ic()
        lg = model.build_layered(g, 3)
        phi = m.sample_realization(lg, rng)
        k = min(2, n)
        plain = m.run_adaptive_policy(m.GreedyPolicy(exact_config()), g, model, k, 3, phi)
        lazy = m.run_adaptive_policy(m.LazyGreedyPolicy(exact_config()), g, model, k, 3, phi)
        assert plain.seeds.entries == lazy.seeds.entries

    def test_first_step_evaluates_every_node(self):
        model = m.modified_ic()
        g = m.assign_uniform_probability(
            m.erdos_renyi_graph(12, 0.3, np.random.default_rng(0)), 0.3
        )
        lg = model.build_layered(g, 3)
        phi = m.sample_realization(lg, np.random.default_rng(1))
        policy = m.LazyGreedyPolicy(EstimatorConfig(mode="mc", n_sims=50, master_seed=1))
        m.run_adaptive_policy(policy, g, model, 1, 3, phi)
        assert policy.estimator.evaluations >= 12

    def test_fewer_evaluations_than_plain_on_fifty_nodes(self):
        model = m.modified_ic()
        g = m.assign_uniform_probability(
            m.erdos_renyi_graph(50, 0.08, np.random.default_rng(3)), 0.1
        )
        lg = model.build_layered(g, 6)
        phi = m.sample_realization(lg, np.random.default_rng(11))
        cfg = EstimatorConfig(mode="mc", n_sims=200, master_seed=5)
        plain = m.GreedyPolicy(cfg)
        m.run_adaptive_policy(plain, g, model, 5, 6, phi, stream_prefix=("x",))
        lazy = m.LazyGreedyPolicy(cfg)
        m.run_adaptive_policy(lazy, g, model, 5, 6, phi, stream_prefix=("x",))
        assert lazy.estimator.evaluations < plain.estimator.evaluations


class TestHeuristicPolicies:
    def test_degree_picks_star_center(self):
        g = m.InfluenceGraph(4, [(0, 1, 0.5), (0, 2, 0.5), (0, 3, 0.5)])
        model = m.modified_ic()
        lg = model.build_layered(g, 2)
        policy = m.DegreePolicy()
        policy.begin_run(lg, model)
        psi = empty_partial_realization(lg)
        assert policy.next_seeds(psi, [0, 1, 2, 3], 1) == [0]

    def test_centrality_picks_path_interior_once_head_is_active(self):
        g = m.InfluenceGraph(3, [(0, 1, 0.5), (1, 2, 0.5)])
        model = m.modified_ic()
        lg = model.build_layered(g, 3)
        policy = m.CentralityPolicy()
        policy.begin_run(lg, model)
        psi = m.PartialRealization(lg, {}, {0: 1})
        assert policy.next_seeds(psi, [1, 2], 1) == [1]

    def test_random_is_a_function_of_the_stream(self):
        g = m.assign_uniform_probability(
            m.erdos_renyi_graph(8, 0.3, np.random.default_rng(0)), 0.2
        )
        model = m.modified_ic()
        lg = model.build_layered(g, 2)
        psi = empty_partial_realization(lg)
        picks = {
            m.RandomPolicy().next_seeds(psi, list(range(8)), 1,
                                        rng=np.random.default_rng(42))[0]
            for _ in range(3)
        }
        assert len(picks) == 1

    def test_random_requires_stream(self):
        lg = m.modified_ic().build_layered(toy_triangle(), 2)
        with pytest.raises(ValueError):
            m.RandomPolicy().next_seeds(empty_partial_realization(lg), [0, 1], 1)


class TestNonAdaptiveGreedy:
    def test_first_pick_matches_adaptive(self):
        model = m.modified_ic()
        graph = toy_triangle()
        lg = model.build_layered(graph, 3)
        schedule = m.nonadaptive_greedy_schedule(graph, model, 1, 3, exact_config())
        estimator = GainEstimator(exact_config(), lg, model)
        assert schedule.entries[0][0] == adaptive_greedy_step(
            empty_partial_realization(lg), estimator
        )

    def test_toy_schedule_prefers_the_unlikely_edge(self):
        model = m.modified_ic()
        schedule = m.nonadaptive_greedy_schedule(toy_triangle(), model, 2, 3, exact_config())
        assert schedule.entries == [(0, 1), (2, 2)]  # v first, then w

    def test_budget_cannot_exceed_node_count(self):
        with pytest.raises(ValueError):
            m.nonadaptive_greedy_schedule(toy_triangle(), m.modified_ic(), 4, 3, exact_config())

    def test_scheduled_policy_skips_active_picks(self):
        model = m.modified_ic()
        graph = toy_triangle()
        lg = model.build_layered(graph, 3)
        schedule = m.SeedSchedule([(0, 1), (2, 2)], budget=2)
        phi = realization_from(lg, [(0, 1, 2), (0, 2, 2)])  # w activates on its own
        result = m.run_adaptive_policy(m.ScheduledPolicy(schedule), graph, model, 2, 3, phi)
        assert result.seeds.entries == [(0, 1)]
        assert result.utility_final == 2


class TestPerStepBatchGreedy:
    def test_single_seed_reduces_to_argmax(self):
        model = m.modified_ic()
        graph = toy_triangle()
        lg = model.build_layered(graph, 3)
        estimator = GainEstimator(exact_config(), lg, model)
        batch = per_step_batch_greedy(set(), 1, 1, lg, model, exact_config())
        assert batch == [adaptive_greedy_step(empty_partial_realization(lg), estimator)]

    def test_overflowing_budget_returns_all_inactive(self):
        model = m.modified_ic()
        lg = model.build_layered(toy_triangle(), 3)
        assert per_step_batch_greedy({0}, 2, 5, lg, model, exact_config()) == [1, 2]

    def test_final_layer_nodes_worth_one_each(self):
        model = m.modified_ic()
        g = m.InfluenceGraph(3, [])
        lg = model.build_layered(g, 3)
        batch = per_step_batch_greedy(set(), 3, 2, lg, model, exact_config())
        assert batch == [0, 1]

    @pytest.mark.parametrize("seed", range(6))
    def test_batch_value_clears_the_greedy_bound(self, seed):
        # brute-force the optimal set of the same size
        rng = np.random.default_rng(seed)
        model = m.non_progressive_ic(0.3)
        g = m.assign_uniform_probability(m.erdos_renyi_graph(4, 0.35, rng), 0.5)
        lg = model.build_layered(g, 3)
        if len(lg.random_edge_ids) > 18:
            pytest.skip("instance too large to brute force")
        from myopicim.policies import _expected_future_value

        cfg = exact_config()
        k_t = 2
        batch = per_step_batch_greedy(set(), 1, k_t, lg, model, cfg)
        batch_value = _expected_future_value(lg, model, set(batch), 1, cfg, ())
        best = max(
            _expected_future_value(lg, model, set(combo), 1, cfg, ())
            for combo in itertools.combinations(range(4), k_t)
        )
        assert batch_value >= (1 - 1 / np.e) * best - 1e-9


class TestExactPolicyValueAgainstPolicies:
    def test_greedy_value_at_least_heuristics_on_toy(self):
        model = m.modified_ic()
        lg = model.build_layered(toy_triangle(), 3)
        greedy_value = exact_policy_value(m.GreedyPolicy(exact_config()), lg, model, 2)
        degree_value = exact_policy_value(m.DegreePolicy(), lg, model, 2)
        assert greedy_value >= degree_value - 1e-9
