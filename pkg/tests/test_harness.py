import json
import math
import random

import pytest

from araprep.corpus_filter import FilterStats, SourceStats
from araprep.harness import (
    AggregateReport,
    HpConfig,
    HpGrid,
    RunRecord,
    aggregate_runs,
    emit_grid_manifest,
    format_size,
    records_from_jsonl,
    render_hp_table,
    render_scores_table,
    render_stats_table,
    render_table,
)

CFG_A = HpConfig(2e-5, 32, 0.1)
CFG_B = HpConfig(5e-5, 64, 0.2)


class TestGrid:
    def test_default_grid_shape(self):
        grid = HpGrid()
        assert len(grid.configs()) == 60
        assert grid.epochs == 30 and grid.n_seeds == 5

    def test_single_task_manifest(self):
        assert len(emit_grid_manifest(["MQ2Q"], "model-a")) == 300

    def test_eight_task_manifest(self):
        jobs = emit_grid_manifest(list("ABCDEFGH"), "model-a")
        assert len(jobs) == 2400
        assert all(j["epochs"] == 30 for j in jobs[:5])

    def test_empty_tasks_rejected(self):
        with pytest.raises(ValueError):
            emit_grid_manifest([], "m")

    def test_manifest_deterministic_bytes(self):
        a = json.dumps(emit_grid_manifest(["X", "Y"], "m"), sort_keys=True)
        b = json.dumps(emit_grid_manifest(["X", "Y"], "m"), sort_keys=True)
        assert a == b

    def test_unique_jobs(self):
        jobs = emit_grid_manifest(["X"], "m")
        keys = {(j["task"], j["lr"], j["batch"], j["dropout"], j["seed"]) for j in jobs}
        assert len(keys) == len(jobs)


class TestAggregateRuns:
    def test_mean_and_population_std(self):
        records = [RunRecord("T", "m", CFG_A, s, v) for s, v in enumerate([1.0, 2.0, 3.0])]
        g = aggregate_runs(records).groups[("T", "m", CFG_A)]
        assert g.mean == pytest.approx(2.0, abs=1e-12)
        assert g.std == pytest.approx(math.sqrt(2 / 3), abs=1e-12)
        assert g.n == 3

    def test_sample_std_flag(self):
        records = [RunRecord("T", "m", CFG_A, s, v) for s, v in enumerate([1.0, 2.0, 3.0])]
        g = aggregate_runs(records, sample_std=True).groups[("T", "m", CFG_A)]
        assert g.std == pytest.approx(1.0)

    def test_single_record(self):
        g = aggregate_runs([RunRecord("T", "m", CFG_A, 0, 5.0)]).groups[("T", "m", CFG_A)]
        assert (g.mean, g.std, g.n) == (5.0, 0.0, 1)

    def test_duplicate_seed_rejected(self):
        records = [RunRecord("T", "m", CFG_A, 0, 1.0), RunRecord("T", "m", CFG_A, 0, 2.0)]
        with pytest.raises(ValueError, match="duplicate"):
            aggregate_runs(records)

    def test_best_by_mean(self):
        records = [RunRecord("T", "m", CFG_A, s, 76.2) for s in range(3)]
        records += [RunRecord("T", "m", CFG_B, s, 74.1) for s in range(3)]
        best_cfg, best = aggregate_runs(records).best[("T", "m")]
        assert best_cfg == CFG_A and best.mean == pytest.approx(76.2)

    def test_tie_broken_by_lower_std(self):
        records = [RunRecord("T", "m", CFG_A, s, v) for s, v in enumerate([74.0, 76.0])]
        records += [RunRecord("T", "m", CFG_B, s, v) for s, v in enumerate([75.0, 75.0])]
        best_cfg, _ = aggregate_runs(records).best[("T", "m")]
        assert best_cfg == CFG_B

    def test_remaining_tie_broken_by_grid_order(self):
        grid = HpGrid()
        first, second = grid.configs()[0], grid.configs()[1]
        records = [RunRecord("T", "m", second, 0, 70.0), RunRecord("T", "m", first, 0, 70.0)]
        best_cfg, _ = aggregate_runs(records, grid).best[("T", "m")]
        assert best_cfg == first

    def test_shuffle_invariance(self):
        rng = random.Random(0)
        records = [
            RunRecord("T", "m", cfg, s, rng.uniform(60, 80))
            for cfg in (CFG_A, CFG_B)
            for s in range(5)
        ]
        base = aggregate_runs(records)
        shuffled = records[:]
        rng.shuffle(shuffled)
        again = aggregate_runs(shuffled)
        assert base.groups == again.groups and base.best == again.best

    def test_affine_rescale_keeps_argmax(self):
        rng = random.Random(1)
        records = [
            RunRecord("T", "m", cfg, s, rng.uniform(10, 90))
            for cfg in HpGrid().configs()[:6]
            for s in range(3)
        ]
        best_before, _ = aggregate_runs(records).best[("T", "m")]
        scaled = [
            RunRecord(r.task_id, r.model_id, r.config, r.seed, 3.5 * r.dev_score + 11.0)
            for r in records
        ]
        best_after, _ = aggregate_runs(scaled).best[("T", "m")]
        assert best_before == best_after


class TestRecordsJsonl:
    def test_parse(self):
        lines = [
            json.dumps({"task": "T", "model": "m", "lr": 2e-5, "batch": 32, "dropout": 0.1,
                        "seed": 0, "dev_score": 75.0}),
            "",
        ]
        records = records_from_jsonl(lines)
        assert records == [RunRecord("T", "m", CFG_A, 0, 75.0)]

    def test_bad_record_names_line(self):
        with pytest.raises(ValueError, match="line 2"):
            records_from_jsonl(['{"task": "T", "model": "m", "lr": 1, "batch": 1, "dropout": 0, "seed": 0, "dev_score": 1}', '{"task": "T"}'])


class TestRendering:
    def _stats(self):
        stats = FilterStats()
        stats.input_bytes, stats.output_bytes = 1000, 220
        stats.input_docs, stats.output_docs = 5, 2
        stats.per_source["CC"] = SourceStats(4, 1, 800, 120)
        stats.per_source["WIKI"] = SourceStats(1, 1, 200, 100)
        return stats

    def test_stats_table_shows_percent(self):
        table = render_stats_table(self._stats())
        assert "(22%)" in table  # total row
        assert "(15%)" in table  # CC row
        assert table.splitlines()[0].split() == ["Source", "Original", "Clean"]
        assert "Total" in table.splitlines()[-1]

    def test_empty_stats_table(self):
        table = render_stats_table(FilterStats())
        assert "Total" in table and "0B" in table

    def test_format_size(self):
        assert format_size(475 * (1 << 30)) == "475GB"
        assert format_size(int(1.6 * (1 << 30))) == "1.6GB"
        assert format_size(220) == "220B"

    def test_hp_table_layout(self):
        records = []
        tasks = ["MQ2Q", "MDD", "SVREG", "SEC", "FID", "OOLD", "XNLI", "OHSD"]
        for task in tasks:
            records += [RunRecord(task, "model-a", CFG_A, s, 70.0 + s) for s in range(3)]
        table = render_hp_table(aggregate_runs(records))
        lines = table.splitlines()
        assert len(lines[0].split()) >= 9  # model header + 8 task columns
        assert lines[2].startswith("batch size")
        assert lines[3].startswith("hidden dropout")
        assert lines[4].startswith("learning rate")

    def test_scores_table_mean_std(self):
        records = [RunRecord("T", "m", CFG_A, s, v) for s, v in enumerate([75.0, 77.0])]
        table = render_scores_table(aggregate_runs(records))
        assert "76.0±1.0" in table

    def test_render_table_dispatch(self):
        assert "Total" in render_table(self._stats())
        assert "Model" in render_table(AggregateReport())
        with pytest.raises(TypeError):
            render_table(42)
