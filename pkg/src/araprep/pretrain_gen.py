"""BERT-style pre-training instance generation.

Packs tokenized sentences into next-sentence-prediction segment pairs,
applies whole-word masking with the 80/10/10 replacement rule, and emits a
configurable number of independently masked copies per pair. All randomness
is keyed by (seed, pair index, duplicate index), so output is byte-identical
for the same corpus, vocabulary, and seed regardless of how work is split.
"""

from __future__ import annotations

import json
import logging
import math
import random
import struct
from array import array
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path

from .bbpe import CLS_ID, FIRST_CONTENT_ID, MASK_ID, PAD_ID, SEP_ID, BbpeVocab, TokenizedWord, encode
from .corpus_filter import CleanDocument

log = logging.getLogger("araprep")

# one document = one list of sentences, one sentence = its words
TokenizedDoc = list[list[TokenizedWord]]

_SHARD_MAGIC = b"WWMI"
_SHARD_VERSION = 1


@dataclass(frozen=True)
class MaskingPolicy:
    mask_prob: float = 0.15
    replace_mask: float = 0.80
    replace_random: float = 0.10
    keep_original: float = 0.10
    dup_factor: int = 3

    def __post_init__(self) -> None:
        for name in ("mask_prob", "replace_mask", "replace_random", "keep_original"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0,1], got {v}")
        if abs(self.replace_mask + self.replace_random + self.keep_original - 1.0) > 1e-9:
            raise ValueError("replacement probabilities must sum to 1")
        if self.dup_factor < 1:
            raise ValueError("dup_factor must be >= 1")

    def to_dict(self) -> dict:
        return {
            "mask_prob": self.mask_prob,
            "replace_mask": self.replace_mask,
            "replace_random": self.replace_random,
            "keep_original": self.keep_original,
            "dup_factor": self.dup_factor,
        }


@dataclass
class TrainingInstance:
    token_ids: list[int]
    segment_ids: list[int]
    masked_positions: list[int]
    masked_labels: list[int]
    is_next: bool
    dup_index: int


@dataclass(frozen=True)
class SegmentPair:
    seg_a: tuple[TokenizedWord, ...]
    seg_b: tuple[TokenizedWord, ...]
    is_next: bool
    doc_a: int
    doc_b: int
    pair_index: int


@dataclass
class GenStats:
    pairs: int = 0
    truncated_sentences: int = 0
    forced_next: int = 0
    forced_negative: int = 0


def _n_tokens(words: Sequence[TokenizedWord]) -> int:
    return sum(len(w.token_ids) for w in words)


def _truncate_sentence(sentence: list[TokenizedWord], budget: int, stats: GenStats) -> list[TokenizedWord]:
    if _n_tokens(sentence) <= budget:
        return sentence
    stats.truncated_sentences += 1
    out: list[TokenizedWord] = []
    used = 0
    for w in sentence:
        n = len(w.token_ids)
        if used + n <= budget:
            out.append(w)
            used += n
        elif not out:
            # single word longer than the whole budget: hard-cut its ids
            out.append(TokenizedWord(w.word_index, tuple(w.token_ids[:budget])))
            break
        else:
            break
    return out


def _truncate_pair(
    seg_a: list[TokenizedWord], seg_b: list[TokenizedWord], budget: int
) -> tuple[list[TokenizedWord], list[TokenizedWord]]:
    """Drop trailing words from whichever segment is longer until it fits.

    A segment down to a single oversized word gets its token ids hard-cut
    instead (keeping at least one token), which strictly shrinks the total,
    so the loop always terminates.
    """
    len_a = _n_tokens(seg_a)
    len_b = _n_tokens(seg_b)
    while len_a + len_b > budget:
        if len_a >= len_b:
            seg, other_len = seg_a, len_b
        else:
            seg, other_len = seg_b, len_a
        if len(seg) > 1:
            new_len = (len_a if seg is seg_a else len_b) - len(seg.pop().token_ids)
        else:
            w = seg[0]
            keep = max(1, budget - other_len)
            seg[0] = TokenizedWord(w.word_index, tuple(w.token_ids[:keep]))
            new_len = keep
        if seg is seg_a:
            len_a = new_len
        else:
            len_b = new_len
    return seg_a, seg_b


def build_segment_pairs(
    docs: Sequence[TokenizedDoc],
    seed: int,
    max_len: int = 128,
    stats: GenStats | None = None,
) -> Iterator[SegmentPair]:
    """Pack consecutive sentences into segment pairs for NSP.

    Sentences accumulate into a chunk until a per-pair target length sampled
    from [32, max_len - 3] is reached, then the chunk splits at a random
    sentence boundary into segments A and B. With probability 0.5 segment B
    is replaced by sentences drawn from a uniformly sampled other document
    (is_next=False); the displaced continuation is pushed back for the next
    pair. A single-document corpus cannot produce negatives, so all its
    pairs come out is_next=True with a warning.
    """
    if stats is None:
        stats = GenStats()
    budget = max_len - 3  # CLS + 2x SEP
    if budget < 2:
        raise ValueError(f"max_len {max_len} leaves no room for two segments")
    docs = [d for d in docs if any(s for s in d)]
    if not docs:
        return
    if len(docs) == 1:
        log.warning("segment pairing over a single document: all pairs will be is_next=true")

    rng = random.Random(f"{seed}|pairs")
    lo_target = min(32, budget)
    pair_index = 0

    for di, doc in enumerate(docs):
        sentences = [s for s in doc if s]
        i = 0
        target = rng.randint(lo_target, budget)
        chunk: list[list[TokenizedWord]] = []
        chunk_tokens = 0
        while i < len(sentences):
            sentence = _truncate_sentence(list(sentences[i]), budget, stats)
            i += 1
            chunk.append(sentence)
            chunk_tokens += _n_tokens(sentence)
            if chunk_tokens < target and i < len(sentences):
                continue

            a_end = rng.randint(1, len(chunk) - 1) if len(chunk) > 1 else 1
            seg_a = [w for s in chunk[:a_end] for w in s]
            want_next = rng.random() < 0.5
            is_next = want_next
            seg_b: list[TokenizedWord]

            if want_next and len(chunk) > 1:
                seg_b = [w for s in chunk[a_end:] for w in s]
                doc_b = di
            elif len(docs) > 1:
                if want_next:
                    stats.forced_negative += 1
                is_next = False
                other = rng.randrange(len(docs) - 1)
                if other >= di:
                    other += 1
                other_sents = [s for s in docs[other] if s]
                start = rng.randrange(len(other_sents))
                b_budget = max(1, target - _n_tokens(seg_a))
                seg_b = []
                b_tokens = 0
                for s in other_sents[start:]:
                    s = _truncate_sentence(list(s), budget, stats)
                    seg_b.extend(s)
                    b_tokens += _n_tokens(s)
                    if b_tokens >= b_budget:
                        break
                doc_b = other
                # the displaced continuation goes back into the stream
                i -= len(chunk) - a_end
            elif len(chunk) > 1:
                if not want_next:
                    stats.forced_next += 1
                is_next = True
                seg_b = [w for s in chunk[a_end:] for w in s]
                doc_b = di
            else:
                chunk = []
                chunk_tokens = 0
                target = rng.randint(lo_target, budget)
                continue  # lone trailing chunk in a single-doc corpus

            seg_a, seg_b = _truncate_pair(seg_a, seg_b, budget)
            if seg_a and seg_b:
                stats.pairs += 1
                yield SegmentPair(
                    seg_a=tuple(seg_a),
                    seg_b=tuple(seg_b),
                    is_next=is_next,
                    doc_a=di,
                    doc_b=doc_b,
                    pair_index=pair_index,
                )
                pair_index += 1
            chunk = []
            chunk_tokens = 0
            target = rng.randint(lo_target, budget)


def whole_word_mask(
    words: Sequence[TokenizedWord],
    policy: MaskingPolicy,
    rng: random.Random,
    vocab_size: int,
    *,
    mask_id: int = MASK_ID,
    first_random_id: int = FIRST_CONTENT_ID,
) -> tuple[list[int], list[int], list[int]]:
    """Mask whole words; returns (masked ids, positions, original labels).

    ceil(mask_prob * word_count) words are selected in shuffled order; the
    first selection always sticks, further ones are skipped when they would
    push masked tokens past 20% of the sequence. One category draw per word
    (mask / random / keep) applies to all of its subtokens; random
    replacements are drawn per subtoken from the non-special id range.
    Positions and labels cover every subtoken of every chosen word.
    """
    if not words:
        return [], [], []
    ids: list[int] = []
    starts: list[int] = []
    for w in words:
        starts.append(len(ids))
        ids.extend(w.token_ids)
    n_tokens = len(ids)
    target_words = math.ceil(policy.mask_prob * len(words))
    token_cap = max(1, int(0.20 * n_tokens))

    order = list(range(len(words)))
    rng.shuffle(order)
    chosen: list[int] = []
    masked_tokens = 0
    for wi in order:
        if len(chosen) >= target_words:
            break
        wlen = len(words[wi].token_ids)
        if chosen and masked_tokens + wlen > token_cap:
            continue
        chosen.append(wi)
        masked_tokens += wlen

    threshold_random = policy.replace_mask + policy.replace_random
    recorded: list[tuple[int, int]] = []
    for wi in chosen:
        draw = rng.random()
        start = starts[wi]
        for k in range(len(words[wi].token_ids)):
            pos = start + k
            original = ids[pos]
            if draw < policy.replace_mask:
                ids[pos] = mask_id
            elif draw < threshold_random:
                ids[pos] = rng.randrange(first_random_id, vocab_size)
            recorded.append((pos, original))
    recorded.sort()
    return ids, [p for p, _ in recorded], [label for _, label in recorded]


def generate_instances(
    docs: Sequence[TokenizedDoc],
    vocab: BbpeVocab,
    policy: MaskingPolicy | None = None,
    seed: int = 0,
    max_len: int = 128,
    stats: GenStats | None = None,
) -> Iterator[TrainingInstance]:
    """Yield dup_factor independently masked instances per segment pair."""
    policy = policy or MaskingPolicy()
    for pair in build_segment_pairs(docs, seed, max_len=max_len, stats=stats):
        combined = list(pair.seg_a) + list(pair.seg_b)
        len_a = _n_tokens(pair.seg_a)
        len_b = _n_tokens(pair.seg_b)
        segment_ids = [0] * (len_a + 2) + [1] * (len_b + 1)
        for dup in range(policy.dup_factor):
            rng = random.Random(f"{seed}|{pair.pair_index}|{dup}")
            masked, positions, labels = whole_word_mask(combined, policy, rng, vocab.size)
            token_ids = [CLS_ID] + masked[:len_a] + [SEP_ID] + masked[len_a:] + [SEP_ID]
            shifted = [p + 1 if p < len_a else p + 2 for p in positions]
            yield TrainingInstance(
                token_ids=token_ids,
                segment_ids=segment_ids,
                masked_positions=shifted,
                masked_labels=labels,
                is_next=pair.is_next,
                dup_index=dup,
            )


def tokenize_documents(docs: Iterable[CleanDocument], vocab: BbpeVocab) -> list[TokenizedDoc]:
    """Encode each document's sentences for segment pairing."""
    out: list[TokenizedDoc] = []
    for doc in docs:
        out.append([encode(text, vocab) for text in doc.sentence_texts])
    return out


# ---------------------------------------------------------------------------
# Shard output: JSON lines or fixed-width binary, plus a manifest
# ---------------------------------------------------------------------------


def _instance_record(inst: TrainingInstance) -> str:
    return json.dumps(
        {
            "token_ids": inst.token_ids,
            "segment_ids": inst.segment_ids,
            "masked_positions": inst.masked_positions,
            "masked_labels": inst.masked_labels,
            "is_next": int(inst.is_next),
            "dup_index": inst.dup_index,
        },
        separators=(",", ":"),
    )


def _pack_instance(inst: TrainingInstance, max_len: int) -> bytes:
    n = len(inst.token_ids)
    m = len(inst.masked_positions)
    if n > max_len or m > max_len:
        raise ValueError(f"instance exceeds max_len {max_len}")
    head = struct.pack("<HHBB", n, m, int(inst.is_next), inst.dup_index)
    tok = array("H", inst.token_ids + [PAD_ID] * (max_len - n))
    seg = array("B", inst.segment_ids + [0] * (max_len - n))
    pos = array("B", inst.masked_positions + [0] * (max_len - m))
    lab = array("H", inst.masked_labels + [0] * (max_len - m))
    return head + tok.tobytes() + seg.tobytes() + pos.tobytes() + lab.tobytes()


def _record_size(max_len: int) -> int:
    return 6 + 2 * max_len + max_len + max_len + 2 * max_len


def write_instance_shards(
    instances: Iterable[TrainingInstance],
    out_dir: str | Path,
    *,
    policy: MaskingPolicy,
    seed: int,
    max_len: int = 128,
    vocab_size: int | None = None,
    shard_size: int = 100_000,
    fmt: str = "jsonl",
    gen_stats: GenStats | None = None,
) -> dict:
    """Write instances to sharded files and return the manifest dict.

    The manifest (``manifest.json``) records shard names and counts, the
    masking policy, the seed, and the realized token-level masking rate.
    """
    if fmt not in ("jsonl", "bin"):
        raise ValueError(f"unknown shard format: {fmt}")
    if fmt == "bin" and vocab_size is not None and vocab_size > 0xFFFF:
        raise ValueError("binary shards store uint16 ids; vocabulary too large")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    shards: list[dict] = []
    total = 0
    masked_total = 0
    body_tokens_total = 0
    shard_idx = 0
    writer = None
    shard_count = 0
    shard_path: Path | None = None

    def _open_next():
        nonlocal writer, shard_idx, shard_count, shard_path
        name = f"instances-{shard_idx:05d}.{fmt}"
        shard_path = out_dir / name
        if fmt == "jsonl":
            writer = shard_path.open("w", encoding="utf-8", newline="\n")
        else:
            writer = shard_path.open("wb")
            writer.write(struct.pack("<4sIII", _SHARD_MAGIC, _SHARD_VERSION, max_len, 0))
        shard_idx += 1
        shard_count = 0

    def _close_current():
        nonlocal writer
        if writer is not None:
            writer.close()
            shards.append({"path": shard_path.name, "instances": shard_count})
            writer = None

    try:
        for inst in instances:
            if writer is None:
                _open_next()
            if fmt == "jsonl":
                writer.write(_instance_record(inst) + "\n")
            else:
                writer.write(_pack_instance(inst, max_len))
            shard_count += 1
            total += 1
            masked_total += len(inst.masked_positions)
            body_tokens_total += len(inst.token_ids) - 3
            if shard_count >= shard_size:
                _close_current()
    finally:
        _close_current()

    manifest = {
        "format": fmt,
        "max_len": max_len,
        "seed": seed,
        "policy": policy.to_dict(),
        "vocab_size": vocab_size,
        "shards": shards,
        "total_instances": total,
        "token_mask_rate": (masked_total / body_tokens_total) if body_tokens_total else 0.0,
    }
    if gen_stats is not None:
        manifest["pairs"] = gen_stats.pairs
        manifest["truncated_sentences"] = gen_stats.truncated_sentences
        manifest["forced_next"] = gen_stats.forced_next
        manifest["forced_negative"] = gen_stats.forced_negative
    with (out_dir / "manifest.json").open("w", encoding="utf-8", newline="\n") as f:
        json.dump(manifest, f, ensure_ascii=True, indent=2, sort_keys=True)
        f.write("\n")
    return manifest


def read_instance_shards(out_dir: str | Path) -> Iterator[TrainingInstance]:
    """Read back instances written by :func:`write_instance_shards`."""
    out_dir = Path(out_dir)
    with (out_dir / "manifest.json").open("r", encoding="utf-8") as f:
        manifest = json.load(f)
    fmt = manifest["format"]
    max_len = manifest["max_len"]
    for shard in manifest["shards"]:
        path = out_dir / shard["path"]
        if fmt == "jsonl":
            with path.open("r", encoding="utf-8") as f:
                for line in f:
                    obj = json.loads(line)
                    yield TrainingInstance(
                        token_ids=obj["token_ids"],
                        segment_ids=obj["segment_ids"],
                        masked_positions=obj["masked_positions"],
                        masked_labels=obj["masked_labels"],
                        is_next=bool(obj["is_next"]),
                        dup_index=obj["dup_index"],
                    )
        else:
            rec_size = _record_size(max_len)
            with path.open("rb") as f:
                magic, version, hdr_max_len, _ = struct.unpack("<4sIII", f.read(16))
                if magic != _SHARD_MAGIC or version != _SHARD_VERSION or hdr_max_len != max_len:
                    raise ValueError(f"bad shard header in {path}")
                while True:
                    blob = f.read(rec_size)
                    if not blob:
                        break
                    if len(blob) != rec_size:
                        raise ValueError(f"truncated shard {path}")
                    n, m, is_next, dup = struct.unpack_from("<HHBB", blob, 0)
                    off = 6
                    tok = array("H")
                    tok.frombytes(blob[off : off + 2 * max_len])
                    off += 2 * max_len
                    seg = array("B")
                    seg.frombytes(blob[off : off + max_len])
                    off += max_len
                    pos = array("B")
                    pos.frombytes(blob[off : off + max_len])
                    off += max_len
                    lab = array("H")
                    lab.frombytes(blob[off : off + 2 * max_len])
                    yield TrainingInstance(
                        token_ids=list(tok[:n]),
                        segment_ids=list(seg[:n]),
                        masked_positions=list(pos[:m]),
                        masked_labels=list(lab[:m]),
                        is_next=bool(is_next),
                        dup_index=dup,
                    )
