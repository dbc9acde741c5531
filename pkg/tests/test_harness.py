import math

import numpy as np
import pytest

import myopicim as m
from myopicim.cli import main
from myopicim.errors import ConfigError
from myopicim.harness import (
    ExperimentConfig,
    RunRecord,
    config_from_mapping,
    parse_config_file,
    render_results_csv,
    run_experiment,
    summarize,
    write_outputs,
)


def small_graph():
    rng = np.random.default_rng(1)
    return m.assign_uniform_probability(m.erdos_renyi_graph(12, 0.3, rng), 0.2)


def small_config(**overrides):
    base = dict(
        model="modified-ic",
        edge_probability=0.2,
        k=2,
        horizon="k-plus-1",
        policies=("greedy", "random"),
        n_simulations=30,
        n_runs=3,
        master_seed=5,
    )
    base.update(overrides)
    return ExperimentConfig(**base)


class TestRunExperiment:
    def test_policies_within_a_run_share_the_world(self):
        records = run_experiment(small_config(), graph=small_graph())
        digests = {}
        for rec in records:
            digests.setdefault(rec.run_id, set()).add(rec.realization_digest)
        assert all(len(d) == 1 for d in digests.values())
        assert len({next(iter(d)) for d in digests.values()}) == 3  # distinct worlds

    def test_reruns_are_byte_identical(self):
        a = render_results_csv(run_experiment(small_config(), graph=small_graph()))
        b = render_results_csv(run_experiment(small_config(), graph=small_graph()))
        assert a == b

    def test_parallelism_does_not_change_bytes(self):
        cfg = small_config()
        a = render_results_csv(run_experiment(cfg, graph=small_graph(), workers=1))
        b = render_results_csv(run_experiment(cfg, graph=small_graph(), workers=3))
        assert a == b

    def test_seed_rows_match_budget(self):
        cfg = small_config()
        records = run_experiment(cfg, graph=small_graph())
        horizon = cfg.resolved_horizon()
        for run_id in (1, 2, 3):
            for policy in cfg.policies:
                rows = [r for r in records if r.run_id == run_id and r.policy == policy]
                assert len(rows) == horizon
                assert sum(1 for r in rows if r.seed is not None) == min(cfg.k, horizon)

    def test_cumulative_utility_non_decreasing(self):
        records = run_experiment(small_config(), graph=small_graph())
        by_group = {}
        for rec in records:
            by_group.setdefault((rec.run_id, rec.policy), []).append(rec)
        for rows in by_group.values():
            values = [r.cumulative_utility for r in sorted(rows, key=lambda r: r.step)]
            assert values == sorted(values)

    def test_unknown_policy_rejected(self):
        with pytest.raises(ConfigError):
            run_experiment(small_config(policies=("mystery",)), graph=small_graph())

    def test_bad_probability_rejected(self):
        with pytest.raises(ConfigError):
            small_config(edge_probability=1.2).validate()


class TestSummarize:
    def _table(self, values_by_run, policy="greedy", step=3):
        return [
            RunRecord(run_id, policy, step, None, 0, value, "x")
            for run_id, value in enumerate(values_by_run, start=1)
        ]

    def test_hand_built_mean_and_std(self):
        rows = summarize(self._table([10, 12, 14]), k=3)
        assert rows[-1].mean_cumulative_utility == pytest.approx(12.0)
        assert rows[-1].std_cumulative_utility == pytest.approx(2.0)
        assert not rows[-1].degenerate

    def test_single_run_flagged_degenerate(self):
        rows = summarize(self._table([10]), k=3)
        assert rows[-1].std_cumulative_utility == 0.0
        assert rows[-1].degenerate

    def test_constant_utilities_zero_std(self):
        rows = summarize(self._table([7, 7, 7, 7]), k=3)
        assert rows[-1].std_cumulative_utility == 0.0
        assert not rows[-1].degenerate

    def test_empty_table_rejected(self):
        with pytest.raises(ValueError):
            summarize([], k=2)

    def test_final_step_represents_full_budget(self):
        records = run_experiment(small_config(), graph=small_graph())
        rows = summarize(records, k=2)
        full = [r for r in rows if r.seeds == 2]
        assert {r.step for r in full} == {3}  # spare diffusion step wins


class TestConfigFile:
    def test_parse_and_overrides(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("# comment\nmodel=modified-ic\nk=4\npolicies=greedy,random\nseed=3\n")
        values = parse_config_file(str(path))
        cfg = config_from_mapping(values)
        assert cfg.k == 4 and cfg.master_seed == 3
        cfg2 = config_from_mapping({"k": "6"}, cfg)
        assert cfg2.k == 6 and cfg2.policies == ("greedy", "random")

    def test_bad_line_rejected(self, tmp_path):
        path = tmp_path / "exp.cfg"
        path.write_text("model modified-ic\n")
        with pytest.raises(ConfigError):
            parse_config_file(str(path))

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            config_from_mapping({"frobnicate": "1"})


class TestCli:
    def _write_graph(self, tmp_path):
        g = small_graph()
        path = tmp_path / "graph.txt"
        path.write_text(m.serialize_edge_list(g))
        return path

    def test_run_writes_csvs(self, tmp_path, capsys):
        graph_path = self._write_graph(tmp_path)
        out = tmp_path / "results.csv"
        code = main([
            "run", "--graph", str(graph_path), "--p", "0.2", "--k", "2",
            "--policies", "degree,random", "--simulations", "20", "--runs", "2",
            "--seed", "1", "--output", str(out),
        ])
        assert code == 0
        assert out.exists()
        summary = tmp_path / "results_summary.csv"
        assert summary.exists()
        header = out.read_text().splitlines()[0]
        assert header == "run_id,policy,step,seed,active_count,cumulative_utility,realization_digest"

    def test_run_uses_config_file_with_flag_override(self, tmp_path):
        graph_path = self._write_graph(tmp_path)
        cfg = tmp_path / "exp.cfg"
        out = tmp_path / "r.csv"
        cfg.write_text(
            f"graph={graph_path}\np=0.2\nk=3\npolicies=random\nruns=2\n"
            f"simulations=10\nseed=2\noutput={out}\n"
        )
        code = main(["run", "--config", str(cfg), "--runs", "1"])
        assert code == 0
        lines = out.read_text().splitlines()
        assert all(line.startswith("1,") for line in lines[1:])

    def test_unknown_policy_exits_2(self, tmp_path):
        graph_path = self._write_graph(tmp_path)
        code = main(["run", "--graph", str(graph_path), "--p", "0.1", "--k", "1",
                     "--policies", "nope", "--runs", "1", "--simulations", "1"])
        assert code == 2

    def test_missing_graph_exits_3(self, tmp_path):
        code = main(["run", "--graph", str(tmp_path / "absent.txt"), "--p", "0.1",
                     "--k", "1", "--policies", "random", "--runs", "1",
                     "--simulations", "1"])
        assert code == 3

    def test_capacity_error_exits_4(self, tmp_path):
        g = m.assign_uniform_probability(
            m.erdos_renyi_graph(10, 0.6, np.random.default_rng(0)), 0.3
        )
        path = tmp_path / "dense.txt"
        path.write_text(m.serialize_edge_list(g))
        code = main(["optimal", "--graph", str(path), "--p", "0.3", "--k", "2",
                     "--horizon", "3"])
        assert code == 4

    def test_stats_output(self, tmp_path, capsys):
        path = tmp_path / "g.txt"
        path.write_text("0 1\n0 2\n1 2\n")
        assert main(["stats", "--graph", str(path)]) == 0
        out = capsys.readouterr().out
        assert "nodes: 3" in out and "edges: 3" in out

    def test_optimal_small_instance(self, tmp_path, capsys):
        path = tmp_path / "g.txt"
        path.write_text("0 1\n")
        assert main(["optimal", "--graph", str(path), "--p", "0.5", "--k", "1",
                     "--horizon", "3"]) == 0
        out = capsys.readouterr().out
        assert "optimal expected cumulative spread" in out
        assert "ratio" in out

    def test_verify_subcommand_writes_report(self, tmp_path):
        report = tmp_path / "verify.txt"
        assert main(["verify", "--instances", "2", "--seed", "0",
                     "--output", str(report)]) == 0
        text = report.read_text()
        assert "violation=True" in text  # the single-attempt counterexample
        assert "deactivating" in text


class TestWriteOutputs:
    def test_paths_and_content(self, tmp_path):
        cfg = small_config(output_path=str(tmp_path / "exp.csv"))
        records = run_experiment(cfg, graph=small_graph())
        result_path, summary_path = write_outputs(cfg, records)
        assert result_path.endswith("exp.csv")
        assert summary_path.endswith("exp_summary.csv")
        assert len(open(result_path).read().splitlines()) == 1 + len(records)
