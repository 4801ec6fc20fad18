"""Experiment bookkeeping: hyper-parameter grid manifests, per-seed score
aggregation into mean/std summaries, best-configuration selection, and
fixed-width report tables for corpus retention and tuning results."""

from __future__ import annotations

import json
import statistics
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from itertools import product

from .corpus_filter import FilterStats


@dataclass(frozen=True)
class HpConfig:
    learning_rate: float
    batch_size: int
    dropout: float


@dataclass(frozen=True)
class HpGrid:
    learning_rates: tuple[float, ...] = (7e-6, 2e-5, 5e-5)
    batch_sizes: tuple[int, ...] = (8, 16, 32, 64, 128)
    dropouts: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4)
    epochs: int = 30
    n_seeds: int = 5

    def configs(self) -> list[HpConfig]:
        return [
            HpConfig(lr, bs, dr)
            for lr, bs, dr in product(self.learning_rates, self.batch_sizes, self.dropouts)
        ]


@dataclass(frozen=True)
class RunRecord:
    task_id: str
    model_id: str
    config: HpConfig
    seed: int
    dev_score: float


@dataclass
class GroupStat:
    mean: float
    std: float
    n: int


@dataclass
class AggregateReport:
    groups: dict[tuple[str, str, HpConfig], GroupStat] = field(default_factory=dict)
    best: dict[tuple[str, str], tuple[HpConfig, GroupStat]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "groups": [
                {
                    "task": task,
                    "model": model,
                    "lr": cfg.learning_rate,
                    "batch": cfg.batch_size,
                    "dropout": cfg.dropout,
                    "mean": g.mean,
                    "std": g.std,
                    "n": g.n,
                }
                for (task, model, cfg), g in self.groups.items()
            ],
            "best": [
                {
                    "task": task,
                    "model": model,
                    "lr": cfg.learning_rate,
                    "batch": cfg.batch_size,
                    "dropout": cfg.dropout,
                    "mean": g.mean,
                    "std": g.std,
                    "n": g.n,
                }
                for (task, model), (cfg, g) in self.best.items()
            ],
        }


def emit_grid_manifest(tasks: Sequence[str], model_id: str, grid: HpGrid | None = None) -> list[dict]:
    """One job per (task, config, seed), in deterministic grid order."""
    if not tasks:
        raise ValueError("task list must be non-empty")
    grid = grid or HpGrid()
    jobs = []
    for task in tasks:
        for cfg in grid.configs():
            for seed in range(grid.n_seeds):
                jobs.append(
                    {
                        "task": task,
                        "model": model_id,
                        "lr": cfg.learning_rate,
                        "batch": cfg.batch_size,
                        "dropout": cfg.dropout,
                        "epochs": grid.epochs,
                        "seed": seed,
                    }
                )
    return jobs


def aggregate_runs(
    records: Iterable[RunRecord],
    grid: HpGrid | None = None,
    sample_std: bool = False,
) -> AggregateReport:
    """Group scores by (task, model, config) into mean and std summaries.

    The default std is the population form (divide by n); ``sample_std``
    switches to n-1. The best configuration per (task, model) is the
    highest mean, ties broken by lower std and then by grid manifest order.
    """
    grid = grid or HpGrid()
    by_group: dict[tuple[str, str, HpConfig], dict[int, float]] = {}
    appearance: dict[HpConfig, int] = {}
    for rec in records:
        key = (rec.task_id, rec.model_id, rec.config)
        seeds = by_group.setdefault(key, {})
        if rec.seed in seeds:
            raise ValueError(
                f"duplicate run: task={rec.task_id} model={rec.model_id} "
                f"config={rec.config} seed={rec.seed}"
            )
        seeds[rec.seed] = rec.dev_score
        appearance.setdefault(rec.config, len(appearance))

    grid_order = {cfg: i for i, cfg in enumerate(grid.configs())}
    n_grid = len(grid_order)

    def config_order(cfg: HpConfig) -> tuple[int, int]:
        return (grid_order.get(cfg, n_grid), appearance.get(cfg, 0))

    report = AggregateReport()
    for key in sorted(by_group, key=lambda k: (k[0], k[1], config_order(k[2]))):
        scores = list(by_group[key].values())
        mean = statistics.fmean(scores)
        if len(scores) == 1:
            std = 0.0
        else:
            std = statistics.stdev(scores) if sample_std else statistics.pstdev(scores)
        report.groups[key] = GroupStat(mean=mean, std=std, n=len(scores))

    for (task, model, cfg), g in report.groups.items():
        incumbent = report.best.get((task, model))
        if incumbent is None:
            report.best[(task, model)] = (cfg, g)
            continue
        cur_cfg, cur = incumbent
        candidate = (-g.mean, g.std, config_order(cfg))
        current = (-cur.mean, cur.std, config_order(cur_cfg))
        if candidate < current:
            report.best[(task, model)] = (cfg, g)
    return report


def records_from_jsonl(lines: Iterable[str]) -> list[RunRecord]:
    """Parse {"task","model","lr","batch","dropout","seed","dev_score"} lines."""
    records = []
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            records.append(
                RunRecord(
                    task_id=str(obj["task"]),
                    model_id=str(obj["model"]),
                    config=HpConfig(
                        learning_rate=float(obj["lr"]),
                        batch_size=int(obj["batch"]),
                        dropout=float(obj["dropout"]),
                    ),
                    seed=int(obj["seed"]),
                    dev_score=float(obj["dev_score"]),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad run record on line {lineno}: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Report rendering
# ---------------------------------------------------------------------------


def format_size(n_bytes: int) -> str:
    for unit, scale in (("GB", 1 << 30), ("MB", 1 << 20), ("KB", 1 << 10)):
        if n_bytes >= scale:
            value = n_bytes / scale
            return f"{value:.0f}{unit}" if value >= 10 else f"{value:.1f}{unit}"
    return f"{n_bytes}B"


def _rows_to_table(header: list[str], rows: list[list[str]], separators: set[int]) -> str:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip()]
    rule = "-" * len(lines[0])
    lines.append(rule)
    for i, row in enumerate(rows):
        if i in separators:
            lines.append(rule)
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines)


def render_stats_table(stats: FilterStats) -> str:
    """Source / Original / Clean retention table with a Total row."""
    rows = []
    for source, s in sorted(stats.per_source.items()):
        pct = 100.0 * s.output_bytes / s.input_bytes if s.input_bytes else 0.0
        rows.append([source, format_size(s.input_bytes), f"{format_size(s.output_bytes)} ({pct:.0f}%)"])
    total_sep = {len(rows)} if rows else set()
    rows.append(
        [
            "Total",
            format_size(stats.input_bytes),
            f"{format_size(stats.output_bytes)} ({stats.retention_pct:.0f}%)",
        ]
    )
    return _rows_to_table(["Source", "Original", "Clean"], rows, total_sep)


def _format_lr(lr: float) -> str:
    return f"{lr:.0e}".replace("e-0", "e-0") if lr < 1 else str(lr)


def render_hp_table(report: AggregateReport) -> str:
    """Per-task best batch size, dropout, and learning rate, one block per model."""
    tasks_by_model: dict[str, list[str]] = {}
    for task, model in report.best:
        tasks_by_model.setdefault(model, []).append(task)
    blocks = []
    for model in sorted(tasks_by_model):
        tasks = sorted(tasks_by_model[model])
        header = ["Model: " + model] + tasks
        rows = [["batch size"], ["hidden dropout"], ["learning rate"]]
        for task in tasks:
            cfg, _ = report.best[(task, model)]
            rows[0].append(str(cfg.batch_size))
            rows[1].append(str(cfg.dropout))
            rows[2].append(_format_lr(cfg.learning_rate))
        blocks.append(_rows_to_table(header, rows, set()))
    if not blocks:
        return _rows_to_table(["Model: (none)"], [], set())
    return "\n\n".join(blocks)


def render_scores_table(report: AggregateReport) -> str:
    """Best mean and std per task, one row per task, one block per model."""
    tasks_by_model: dict[str, list[str]] = {}
    for task, model in report.best:
        tasks_by_model.setdefault(model, []).append(task)
    blocks = []
    for model in sorted(tasks_by_model):
        rows = []
        for task in sorted(tasks_by_model[model]):
            _, g = report.best[(task, model)]
            rows.append([task, f"{g.mean:.1f}±{g.std:.1f}", str(g.n)])
        blocks.append(_rows_to_table([f"Task ({model})", "Dev score", "Runs"], rows, set()))
    if not blocks:
        return _rows_to_table(["Task", "Dev score", "Runs"], [], set())
    return "\n\n".join(blocks)


def render_table(obj: FilterStats | AggregateReport) -> str:
    """Render either retention stats or an aggregate report as text."""
    if isinstance(obj, FilterStats):
        return render_stats_table(obj)
    if isinstance(obj, AggregateReport):
        return render_hp_table(obj)
    raise TypeError(f"cannot render object of type {type(obj).__name__}")
