"""Task evaluation metrics: accuracy, macro F1, multi-label Jaccard, Pearson,
span-level mention F1 with conlleval-compatible BIO decoding, and the
eight-task benchmark average."""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

ALUE_TASKS = ("MQ2Q", "MDD", "SVREG", "SEC", "FID", "OOLD", "XNLI", "OHSD")


@dataclass(frozen=True)
class EntitySpan:
    """Token-index span, inclusive on both ends."""

    start: int
    end: int
    entity_type: str


def accuracy(preds: Sequence, golds: Sequence) -> float:
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} golds")
    if not preds:
        raise ValueError("cannot score empty inputs")
    return sum(1 for p, g in zip(preds, golds) if p == g) / len(preds)


def f1_macro(preds: Sequence, golds: Sequence, label_set: Iterable) -> float:
    """Unweighted mean of per-label F1 over the full declared label set.

    Labels with an empty precision or recall denominator contribute 0, so
    zero-support labels drag the average down deterministically.
    """
    labels = list(dict.fromkeys(label_set))
    if not labels:
        raise ValueError("label_set must be non-empty")
    if len(preds) != len(golds):
        raise ValueError(f"length mismatch: {len(preds)} predictions vs {len(golds)} golds")
    known = set(labels)
    for v in preds:
        if v not in known:
            raise ValueError(f"prediction {v!r} not in label_set")
    for v in golds:
        if v not in known:
            raise ValueError(f"gold label {v!r} not in label_set")

    total = 0.0
    for label in labels:
        tp = sum(1 for p, g in zip(preds, golds) if p == label and g == label)
        fp = sum(1 for p, g in zip(preds, golds) if p == label and g != label)
        fn = sum(1 for p, g in zip(preds, golds) if p != label and g == label)
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        total += 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return total / len(labels)


def jaccard_multilabel(pred_sets: Sequence[Iterable], gold_sets: Sequence[Iterable], micro: bool = False) -> float:
    """Mean over samples of |P∩G| / |P∪G|; a both-empty sample scores 1.0.

    ``micro=True`` instead pools intersection and union sizes over the
    whole corpus before dividing.
    """
    if len(pred_sets) != len(gold_sets):
        raise ValueError(f"length mismatch: {len(pred_sets)} predictions vs {len(gold_sets)} golds")
    if not pred_sets:
        raise ValueError("cannot score empty inputs")
    if micro:
        inter = union = 0
        for p, g in zip(pred_sets, gold_sets):
            ps, gs = set(p), set(g)
            inter += len(ps & gs)
            union += len(ps | gs)
        return inter / union if union else 1.0
    total = 0.0
    for p, g in zip(pred_sets, gold_sets):
        ps, gs = set(p), set(g)
        union = ps | gs
        total += len(ps & gs) / len(union) if union else 1.0
    return total / len(pred_sets)


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise ValueError(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    if n < 2:
        raise ValueError("pearson needs at least 2 samples")
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    var_x = math.fsum((x - mx) ** 2 for x in xs)
    var_y = math.fsum((y - my) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise ValueError("pearson is undefined for a constant input vector")
    cov = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    return cov / math.sqrt(var_x * var_y)


def decode_bio(tags: Sequence[str]) -> list[EntitySpan]:
    """Decode BIO tags to spans with conlleval-compatible leniency.

    ``B-T`` starts a chunk, ``I-T`` continues a chunk of the same type, and
    an ``I-T`` with no compatible open chunk starts one. ``O`` or a type
    change closes the open chunk.
    """
    spans: list[EntitySpan] = []
    start: int | None = None
    current: str | None = None

    def close(end_exclusive: int) -> None:
        nonlocal start, current
        if start is not None and current is not None:
            spans.append(EntitySpan(start, end_exclusive - 1, current))
        start = current = None

    for i, tag in enumerate(tags):
        if tag == "O":
            close(i)
            continue
        if len(tag) < 3 or tag[1] != "-" or tag[0] not in "BI":
            raise ValueError(f"invalid BIO tag at position {i}: {tag!r}")
        prefix, etype = tag[0], tag[2:]
        if prefix == "B":
            close(i)
            start, current = i, etype
        else:  # I-
            if current != etype:
                close(i)
                start, current = i, etype
    close(len(tags))
    return spans


def conll_mention_f1(
    pred_tag_seqs: Sequence[Sequence[str]],
    gold_tag_seqs: Sequence[Sequence[str]],
) -> tuple[float, float, float]:
    """Micro-averaged mention-level precision, recall, and F1.

    A predicted span counts only when start, end, and type all match a gold
    span of the same sequence.
    """
    if len(pred_tag_seqs) != len(gold_tag_seqs):
        raise ValueError(
            f"sequence count mismatch: {len(pred_tag_seqs)} predictions vs {len(gold_tag_seqs)} golds"
        )
    tp = fp = fn = 0
    for i, (pred, gold) in enumerate(zip(pred_tag_seqs, gold_tag_seqs)):
        if len(pred) != len(gold):
            raise ValueError(f"tag length mismatch in sequence {i}: {len(pred)} vs {len(gold)}")
        p = set(decode_bio(pred))
        g = set(decode_bio(gold))
        tp += len(p & g)
        fp += len(p - g)
        fn += len(g - p)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def alue_average(task_scores: dict[str, float]) -> float:
    """Unweighted mean over the eight benchmark tasks; the set must be exact."""
    missing = [t for t in ALUE_TASKS if t not in task_scores]
    extra = [t for t in task_scores if t not in ALUE_TASKS]
    if missing or extra:
        parts = []
        if missing:
            parts.append(f"missing tasks: {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected tasks: {', '.join(sorted(extra))}")
        raise ValueError("; ".join(parts))
    return math.fsum(task_scores[t] for t in ALUE_TASKS) / len(ALUE_TASKS)
