"""Command-line entry point for the corpus preparation pipeline.

Sub-commands cover each stage (clean, train-tokenizer, gen-instances), the
evaluation and aggregation utilities, and an end-to-end ``prepare``
orchestrator driven by a flat key=value config file. Command-line flags
override config-file values; every run is seeded and reproducible.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import bbpe, corpus_filter, eval_metrics, harness, pretrain_gen

log = logging.getLogger("araprep")

WORKERS_ENV = "ARAPREP_WORKERS"


class ConfigError(ValueError):
    pass


def _default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass
class PipelineConfig:
    inputs: list[tuple[str, str]] = field(default_factory=list)
    output_dir: str = "out"
    arabic_ratio: float = 0.70
    min_words_sentence: int = 8
    max_punct_run: int = 3
    min_words_doc: int = 64
    max_nonarabic_run: int = 5
    doc_discard_ratio: float = 0.30
    rule8_counts_dedup: bool = True
    vocab_size: int = 64000
    mask_prob: float = 0.15
    dup_factor: int = 3
    max_len: int = 128
    shard_format: str = "jsonl"
    shard_size: int = 100_000
    seed: int = 0
    workers: int = field(default_factory=_default_workers)

    def validate(self) -> None:
        if not 0.0 <= self.arabic_ratio <= 1.0:
            raise ConfigError(f"arabic_ratio must be in [0,1], got {self.arabic_ratio}")
        if not 0.0 <= self.doc_discard_ratio <= 1.0:
            raise ConfigError(f"doc_discard_ratio must be in [0,1], got {self.doc_discard_ratio}")
        if not 0.0 < self.mask_prob <= 1.0:
            raise ConfigError(f"mask_prob must be in (0,1], got {self.mask_prob}")
        if self.min_words_sentence < 1 or self.min_words_doc < 1:
            raise ConfigError("word-count thresholds must be >= 1")
        if self.max_punct_run < 1 or self.max_nonarabic_run < 1:
            raise ConfigError("run-length thresholds must be >= 1")
        if self.vocab_size <= 256 + bbpe.N_SPECIAL:
            raise ConfigError(f"vocab_size must exceed {256 + bbpe.N_SPECIAL}")
        if self.dup_factor < 1:
            raise ConfigError("dup_factor must be >= 1")
        if self.max_len < 8:
            raise ConfigError("max_len must be >= 8")
        if self.shard_format not in ("jsonl", "bin"):
            raise ConfigError(f"shard_format must be jsonl or bin, got {self.shard_format!r}")
        if self.shard_size < 1:
            raise ConfigError("shard_size must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    def filter_config(self) -> corpus_filter.FilterConfig:
        return corpus_filter.FilterConfig(
            arabic_ratio=self.arabic_ratio,
            min_words_sentence=self.min_words_sentence,
            max_punct_run=self.max_punct_run,
            min_words_doc=self.min_words_doc,
            max_nonarabic_run=self.max_nonarabic_run,
            doc_discard_ratio=self.doc_discard_ratio,
            rule8_counts_dedup=self.rule8_counts_dedup,
        )

    def masking_policy(self) -> pretrain_gen.MaskingPolicy:
        return pretrain_gen.MaskingPolicy(mask_prob=self.mask_prob, dup_factor=self.dup_factor)

    def serialize(self) -> str:
        lines = []
        for path, source in self.inputs:
            lines.append(f"input = {path}:{source}")
        for f in fields(self):
            if f.name == "inputs":
                continue
            value = getattr(self, f.name)
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()


def parse_input_spec(spec: str) -> tuple[str, str]:
    """Split ``PATH[:SOURCE]``; the tag must look like a bare identifier."""
    if ":" in spec:
        path, _, tag = spec.rpartition(":")
        if path and tag and tag.replace("-", "").replace("_", "").isalnum() and "/" not in tag:
            return path, tag
    return spec, "OTHER"


def parse_config_file(path: str | Path) -> dict[str, object]:
    """Read a flat key=value config file; repeated ``input`` keys accumulate."""
    values: dict[str, object] = {}
    inputs: list[str] = []
    with Path(path).open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, raw = line.partition("=")
            key = key.strip()
            raw = raw.strip()
            if key == "input":
                inputs.append(raw)
            else:
                values[key] = raw
    if inputs:
        values["inputs"] = inputs
    return values


_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def config_from_mapping(mapping: dict[str, object]) -> PipelineConfig:
    cfg = PipelineConfig()
    updates: dict[str, object] = {}
    for key, raw in mapping.items():
        if key == "inputs":
            updates["inputs"] = [parse_input_spec(str(s)) for s in raw]  # type: ignore[union-attr]
            continue
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key: {key}")
        current = getattr(cfg, key)
        if isinstance(current, bool):
            text = str(raw).strip().lower()
            if text not in ("true", "false", "1", "0", "yes", "no"):
                raise ConfigError(f"config key {key} expects a boolean, got {raw!r}")
            updates[key] = text in ("true", "1", "yes")
        elif isinstance(current, int):
            try:
                updates[key] = int(str(raw))
            except ValueError as exc:
                raise ConfigError(f"config key {key} expects an integer, got {raw!r}") from exc
        elif isinstance(current, float):
            try:
                updates[key] = float(str(raw))
            except ValueError as exc:
                raise ConfigError(f"config key {key} expects a number, got {raw!r}") from exc
        else:
            updates[key] = str(raw)
    return replace(cfg, **updates)


def load_config(config_path: str | None, overrides: dict[str, object]) -> PipelineConfig:
    """File values first, then CLI overrides; validation happens before I/O."""
    mapping: dict[str, object] = {}
    if config_path:
        mapping.update(parse_config_file(config_path))
    for key, value in overrides.items():
        if value is None:
            continue
        mapping[key] = value
    cfg = config_from_mapping(mapping)
    cfg.validate()
    return cfg


def _log_event(**fields_: object) -> None:
    log.info(json.dumps(fields_, sort_keys=True, default=str))


# ---------------------------------------------------------------------------
# Stage implementations (used by both sub-commands and `prepare`)
# ---------------------------------------------------------------------------


def _stage_clean(cfg: PipelineConfig, out_dir: Path) -> dict:
    if not cfg.inputs:
        raise ConfigError("no inputs configured; pass --input PATH[:SOURCE]")
    out_dir.mkdir(parents=True, exist_ok=True)
    stats = corpus_filter.FilterStats()
    docs = corpus_filter.read_document_streams(cfg.inputs, stats=stats)
    cleaned = corpus_filter.stream_clean(
        docs, cfg.filter_config(), stats=stats, workers=cfg.workers
    )
    n = corpus_filter.write_clean_jsonl(cleaned, out_dir / "cleaned.jsonl")
    with (out_dir / "filter_stats.json").open("w", encoding="utf-8") as f:
        json.dump(stats.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
    return {
        "output": str(out_dir / "cleaned.jsonl"),
        "docs_in": stats.input_docs,
        "docs_out": n,
        "bytes_in": stats.input_bytes,
        "bytes_out": stats.output_bytes,
        "malformed": stats.malformed_records,
        "stats": stats,
    }


def _stage_train_tokenizer(cfg: PipelineConfig, cleaned_path: Path, out_dir: Path) -> dict:
    corpus = corpus_filter.read_clean_jsonl(cleaned_path)
    vocab = bbpe.train_bbpe(corpus, target_size=cfg.vocab_size)
    bbpe.save_vocab(vocab, out_dir)
    return {"output": str(out_dir), "merges": len(vocab.merges), "vocab_size": vocab.size}


def _stage_gen_instances(cfg: PipelineConfig, cleaned_path: Path, vocab_dir: Path, out_dir: Path) -> dict:
    vocab = bbpe.load_vocab(vocab_dir)
    docs = pretrain_gen.tokenize_documents(corpus_filter.read_clean_jsonl(cleaned_path), vocab)
    policy = cfg.masking_policy()
    gen_stats = pretrain_gen.GenStats()
    instances = pretrain_gen.generate_instances(
        docs, vocab, policy, seed=cfg.seed, max_len=cfg.max_len, stats=gen_stats
    )
    manifest = pretrain_gen.write_instance_shards(
        instances,
        out_dir,
        policy=policy,
        seed=cfg.seed,
        max_len=cfg.max_len,
        vocab_size=vocab.size,
        shard_size=cfg.shard_size,
        fmt=cfg.shard_format,
        gen_stats=gen_stats,
    )
    return {
        "output": str(out_dir),
        "pairs": gen_stats.pairs,
        "instances": manifest["total_instances"],
        "token_mask_rate": manifest["token_mask_rate"],
    }


# ---------------------------------------------------------------------------
# Sub-commands
# ---------------------------------------------------------------------------


def cmd_clean(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, _filter_overrides(args))
    result = _stage_clean(cfg, Path(args.output_dir or cfg.output_dir))
    stats = result.pop("stats")
    _log_event(event="stage_done", stage="clean", **result)
    print(harness.render_stats_table(stats))
    return 0


def cmd_train_tokenizer(args: argparse.Namespace) -> int:
    cfg = load_config(args.config, {"vocab_size": args.vocab_size})
    out_dir = Path(args.output_dir)
    result = _stage_train_tokenizer(cfg, Path(args.input), out_dir)
    _log_event(event="stage_done", stage="train-tokenizer", **result)
    print(json.dumps({"merges": result["merges"], "vocab_size": result["vocab_size"]}))
    return 0


def cmd_encode(args: argparse.Namespace) -> int:
    vocab = bbpe.load_vocab(args.vocab_dir)
    text = args.text if args.text is not None else sys.stdin.read()
    ids = bbpe.flatten_ids(bbpe.encode(text, vocab))
    print(" ".join(map(str, ids)))
    return 0


def cmd_decode(args: argparse.Namespace) -> int:
    vocab = bbpe.load_vocab(args.vocab_dir)
    raw = args.ids if args.ids is not None else sys.stdin.read()
    ids = [int(tok) for tok in raw.replace(",", " ").split()]
    print(bbpe.decode(ids, vocab))
    return 0


def cmd_gen_instances(args: argparse.Namespace) -> int:
    overrides = {
        "mask_prob": args.mask_prob,
        "dup_factor": args.dup_factor,
        "max_len": args.max_len,
        "seed": args.seed,
        "shard_format": args.format,
        "shard_size": args.shard_size,
    }
    cfg = load_config(args.config, overrides)
    result = _stage_gen_instances(cfg, Path(args.input), Path(args.vocab_dir), Path(args.output_dir))
    _log_event(event="stage_done", stage="gen-instances", **result)
    print(json.dumps({"pairs": result["pairs"], "instances": result["instances"]}))
    return 0


def _read_prediction_file(path: str, field_name: str) -> dict[str, object]:
    out: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if field_name not in obj:
                raise ValueError(f"{path}:{lineno}: record has no {field_name!r} field")
            out[str(obj.get("id", lineno))] = obj[field_name]
    return out


def cmd_eval(args: argparse.Namespace) -> int:
    preds_by_id = _read_prediction_file(args.pred, "pred")
    if args.metric == "alue":
        scores = {task: float(score) for task, score in preds_by_id.items()}
        value = eval_metrics.alue_average(scores)
        print(json.dumps({"task": args.task, "metric": "alue", "value": value, "n": len(scores)}))
        return 0
    if not args.gold:
        raise ValueError(f"metric {args.metric} requires --gold")
    golds_by_id = _read_prediction_file(args.gold, "gold")
    missing = [k for k in preds_by_id if k not in golds_by_id]
    if missing:
        raise ValueError(f"ids missing from gold file: {missing[:5]}")
    ids = list(preds_by_id)
    preds = [preds_by_id[i] for i in ids]
    golds = [golds_by_id[i] for i in ids]

    extras: dict[str, float] = {}
    if args.metric == "accuracy":
        value = eval_metrics.accuracy(preds, golds)
    elif args.metric == "f1_macro":
        labels = args.labels.split(",") if args.labels else sorted({*map(str, preds), *map(str, golds)})
        value = eval_metrics.f1_macro([str(p) for p in preds], [str(g) for g in golds], labels)
    elif args.metric == "jaccard":
        value = eval_metrics.jaccard_multilabel(
            [set(map(str, p)) for p in preds], [set(map(str, g)) for g in golds], micro=args.micro
        )
    elif args.metric == "pearson":
        value = eval_metrics.pearson([float(p) for p in preds], [float(g) for g in golds])
    elif args.metric == "mention_f1":
        precision, recall, value = eval_metrics.conll_mention_f1(preds, golds)
        extras = {"precision": precision, "recall": recall}
    else:
        raise ValueError(f"unknown metric: {args.metric}")
    print(json.dumps({"task": args.task, "metric": args.metric, "value": value, "n": len(ids), **extras}))
    return 0


def cmd_aggregate(args: argparse.Namespace) -> int:
    with open(args.records, "r", encoding="utf-8") as f:
        records = harness.records_from_jsonl(f)
    report = harness.aggregate_runs(records, sample_std=args.sample_std)
    payload = json.dumps(report.to_dict(), indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    if args.table == "hp":
        print(harness.render_hp_table(report))
    elif args.table == "scores":
        print(harness.render_scores_table(report))
    return 0


def cmd_grid(args: argparse.Namespace) -> int:
    tasks = [t for t in args.tasks.split(",") if t]
    jobs = harness.emit_grid_manifest(tasks, args.model)
    payload = json.dumps(jobs, indent=2, sort_keys=True)
    if args.out:
        Path(args.out).write_text(payload + "\n", encoding="utf-8")
    else:
        print(payload)
    _log_event(event="manifest_done", tasks=len(tasks), jobs=len(jobs))
    return 0


def cmd_sample_pairs(args: argparse.Namespace) -> int:
    pairs = []
    with open(args.input, "r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            pairs.append((str(obj["text_a"]), str(obj["text_b"]), int(obj["label"])))
    sample = corpus_filter.balanced_sample(pairs, args.n_pos, args.n_neg, args.seed)
    with open(args.out, "w", encoding="utf-8") as f:
        for a, b, label in sample:
            f.write(json.dumps({"text_a": a, "text_b": b, "label": label}, ensure_ascii=False) + "\n")
    _log_event(event="sample_done", n_pos=args.n_pos, n_neg=args.n_neg, out=args.out)
    return 0


def cmd_prepare(args: argparse.Namespace) -> int:
    overrides = _filter_overrides(args)
    overrides.update(
        {
            "vocab_size": args.vocab_size,
            "mask_prob": args.mask_prob,
            "dup_factor": args.dup_factor,
            "max_len": args.max_len,
            "shard_format": args.format,
        }
    )
    if args.output_dir:
        overrides["output_dir"] = args.output_dir
    cfg = load_config(args.config, overrides)
    if not cfg.inputs:
        raise ConfigError("prepare needs at least one input (config `input =` line or --input)")

    out_root = Path(cfg.output_dir)
    manifest: dict[str, object] = {
        "config_hash": cfg.hash(),
        "config": json.loads(json.dumps(cfg.__dict__)),
        "stages": [],
        "status": "ok",
    }
    stages = (
        ("clean", lambda: _stage_clean(cfg, out_root / "clean")),
        (
            "train-tokenizer",
            lambda: _stage_train_tokenizer(cfg, out_root / "clean" / "cleaned.jsonl", out_root / "tokenizer"),
        ),
        (
            "gen-instances",
            lambda: _stage_gen_instances(
                cfg, out_root / "clean" / "cleaned.jsonl", out_root / "tokenizer", out_root / "instances"
            ),
        ),
    )
    exit_code = 0
    for name, run in stages:
        _log_event(event="stage_start", stage=name)
        t0 = time.monotonic()
        try:
            result = run()
        except Exception as exc:  # failed stage reported; earlier outputs stay intact
            duration = time.monotonic() - t0
            manifest["status"] = "failed"
            manifest["failed_stage"] = name
            manifest["error"] = str(exc)
            manifest["stages"].append({"name": name, "status": "failed", "duration_s": duration})
            _log_event(event="stage_failed", stage=name, error=str(exc))
            exit_code = 1
            break
        duration = time.monotonic() - t0
        result.pop("stats", None)
        entry = {"name": name, "status": "ok", "duration_s": duration}
        entry.update(result)
        manifest["stages"].append(entry)
        _log_event(event="stage_done", stage=name, duration_s=round(duration, 3))

    out_root.mkdir(parents=True, exist_ok=True)
    (out_root / "config.txt").write_text(cfg.serialize(), encoding="utf-8")
    with (out_root / "prepare_manifest.json").open("w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
    return exit_code


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _filter_overrides(args: argparse.Namespace) -> dict[str, object]:
    overrides: dict[str, object] = {
        "arabic_ratio": getattr(args, "arabic_ratio", None),
        "min_words_sentence": getattr(args, "min_words_sentence", None),
        "max_punct_run": getattr(args, "max_punct_run", None),
        "min_words_doc": getattr(args, "min_words_doc", None),
        "max_nonarabic_run": getattr(args, "max_nonarabic_run", None),
        "doc_discard_ratio": getattr(args, "doc_discard_ratio", None),
        "workers": getattr(args, "workers", None),
        "seed": getattr(args, "seed", None),
    }
    inputs = getattr(args, "input", None)
    if inputs:
        overrides["inputs"] = list(inputs)
    return overrides


def _add_filter_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", action="append", metavar="PATH[:SOURCE]", help="corpus file, repeatable")
    p.add_argument("--arabic-ratio", dest="arabic_ratio", type=float, default=None)
    p.add_argument("--min-words-sentence", dest="min_words_sentence", type=int, default=None)
    p.add_argument("--max-punct-run", dest="max_punct_run", type=int, default=None)
    p.add_argument("--min-words-doc", dest="min_words_doc", type=int, default=None)
    p.add_argument("--max-nonarabic-run", dest="max_nonarabic_run", type=int, default=None)
    p.add_argument("--doc-discard-ratio", dest="doc_discard_ratio", type=float, default=None)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="araprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("clean", help="filter and deduplicate a raw corpus")
    p.add_argument("--config", default=None)
    _add_filter_flags(p)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(func=cmd_clean)

    p = sub.add_parser("train-tokenizer", help="learn a byte-level BPE vocabulary")
    p.add_argument("--config", default=None)
    p.add_argument("--input", required=True, help="cleaned JSONL corpus")
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=None)
    p.add_argument("--output-dir", required=True)
    p.set_defaults(func=cmd_train_tokenizer)

    p = sub.add_parser("encode", help="encode text with a trained vocabulary")
    p.add_argument("--vocab-dir", required=True)
    p.add_argument("--text", default=None, help="text to encode (default: stdin)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="decode token ids back to text")
    p.add_argument("--vocab-dir", required=True)
    p.add_argument("--ids", default=None, help="space-separated ids (default: stdin)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("gen-instances", help="generate masked-LM training instances")
    p.add_argument("--config", default=None)
    p.add_argument("--input", required=True, help="cleaned JSONL corpus")
    p.add_argument("--vocab-dir", required=True)
    p.add_argument("--output-dir", required=True)
    p.add_argument("--mask-prob", dest="mask_prob", type=float, default=None)
    p.add_argument("--dup-factor", dest="dup_factor", type=int, default=None)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("jsonl", "bin"), default=None)
    p.add_argument("--shard-size", dest="shard_size", type=int, default=None)
    p.set_defaults(func=cmd_gen_instances)

    p = sub.add_parser("eval", help="score a prediction file")
    p.add_argument("--task", default="")
    p.add_argument(
        "--metric",
        required=True,
        choices=("accuracy", "f1_macro", "jaccard", "pearson", "mention_f1", "alue"),
    )
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", default=None)
    p.add_argument("--labels", default=None, help="comma-separated label set for f1_macro")
    p.add_argument("--micro", action="store_true", help="micro-averaged jaccard")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("aggregate", help="aggregate per-seed run records")
    p.add_argument("--records", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--table", choices=("hp", "scores", "none"), default="none")
    p.add_argument("--sample-std", dest="sample_std", action="store_true")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("grid", help="emit the hyper-parameter job manifest")
    p.add_argument("--tasks", required=True, help="comma-separated task ids")
    p.add_argument("--model", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("sample-pairs", help="balanced Latin-free pair sampling")
    p.add_argument("--input", required=True, help='JSONL with {"text_a","text_b","label"}')
    p.add_argument("--n-pos", dest="n_pos", type=int, required=True)
    p.add_argument("--n-neg", dest="n_neg", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample_pairs)

    p = sub.add_parser("prepare", help="run clean, train-tokenizer, and gen-instances")
    p.add_argument("--config", default=None)
    _add_filter_flags(p)
    p.add_argument("--output-dir", default=None)
    p.add_argument("--vocab-size", dest="vocab_size", type=int, default=None)
    p.add_argument("--mask-prob", dest="mask_prob", type=float, default=None)
    p.add_argument("--dup-factor", dest="dup_factor", type=int, default=None)
    p.add_argument("--max-len", dest="max_len", type=int, default=None)
    p.add_argument("--format", choices=("jsonl", "bin"), default=None)
    p.set_defaults(func=cmd_prepare)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO, format="%(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
