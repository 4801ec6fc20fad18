"""Streaming document filtering with exact-key deduplication.

Implements the eight cleaning heuristics used to shrink a raw web corpus:
per-sentence markup/script rejection, Arabic-character ratio, minimum word
counts, punctuation-run limits, non-Arabic span stripping, keep-first
sentence dedup, and document-level discard thresholds. Documents flow
through in ingest order and every rejection is attributed to exactly one
rule, so retention accounting is exact.

The per-document engine is written for throughput: text is canonicalized
once, sentences that are pure Arabic words plus a single terminal mark take
a short arithmetic path, and everything else falls through to the general
rule checks. The public per-sentence operations define the semantics; the
engine must stay observationally identical to them (the test suite compares
against a naive reference built from the public operations).
"""

from __future__ import annotations

import json
import random
import re
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import chain
from multiprocessing import get_context
from pathlib import Path

from .normalize import (
    ARABIC_CLASS_INNER,
    CharClass,
    _ARABIC_RE,
    _NON_ARABIC_NONWS_RE,
    classify,
    contains_latin,
    normalize_text,
)

# Sentence boundaries: newline, or the end of a maximal run of terminal
# punctuation (Arabic and Latin). The punctuation stays with its sentence.
_TERMINALS = ".!؟؛"
_SENT_SPLIT_RE = re.compile(f"(?<=[{_TERMINALS}])(?=[^{_TERMINALS}])|\n")

# whitespace characters other than plain space and newline
_WS_ODD_RE = re.compile(r"[^\S\n ]")
_WS_RUN_RE = re.compile(r"[^\S\n]+")

# fast path: only Arabic letters and spaces, at most one terminal mark
_PURE_ARABIC_RE = re.compile(f"[{ARABIC_CLASS_INNER} ]+[{_TERMINALS}]?\\Z")

_DIGIT_RE = re.compile(r"\d")

_SCRIPT_MARKERS = ("<script", "</", "function", "var ")


@dataclass(frozen=True)
class FilterConfig:
    """Thresholds for the eight filtering rules; defaults match the recipe."""

    arabic_ratio: float = 0.70
    min_words_sentence: int = 8
    max_punct_run: int = 3
    min_words_doc: int = 64
    max_nonarabic_run: int = 5
    doc_discard_ratio: float = 0.30
    # whether dedup rejections count toward the document discard fraction
    rule8_counts_dedup: bool = True

    def validate(self) -> None:
        if not 0.0 <= self.arabic_ratio <= 1.0:
            raise ValueError(f"arabic_ratio must be in [0,1], got {self.arabic_ratio}")
        if not 0.0 <= self.doc_discard_ratio <= 1.0:
            raise ValueError(f"doc_discard_ratio must be in [0,1], got {self.doc_discard_ratio}")
        if self.min_words_sentence < 1:
            raise ValueError("min_words_sentence must be >= 1")
        if self.min_words_doc < 1:
            raise ValueError("min_words_doc must be >= 1")
        if self.max_punct_run < 1:
            raise ValueError("max_punct_run must be >= 1")
        if self.max_nonarabic_run < 1:
            raise ValueError("max_nonarabic_run must be >= 1")


@dataclass(frozen=True)
class RawDocument:
    doc_id: str
    source: str
    text: str
    ingest_order: int


@dataclass(frozen=True)
class Sentence:
    text: str
    words: tuple[str, ...]
    arabic_ratio: float

    @classmethod
    def from_text(cls, text: str) -> "Sentence":
        words = tuple(text.split())
        joined = " ".join(words)
        return cls(text=text.strip(), words=words, arabic_ratio=_ratio(joined, words))


@dataclass
class CleanDocument:
    """A surviving document; sentences are materialized on demand."""

    doc_id: str
    source: str
    # one row per surviving sentence: (canonical text, word count, ratio)
    sentence_rows: tuple[tuple[str, int, float], ...]
    word_count: int

    @classmethod
    def from_sentences(cls, doc_id: str, source: str, sentences: Iterable[Sentence]) -> "CleanDocument":
        rows = tuple((" ".join(s.words), len(s.words), s.arabic_ratio) for s in sentences)
        return cls(doc_id, source, rows, sum(n for _, n, _ in rows))

    @property
    def sentence_texts(self) -> list[str]:
        return [t for t, _, _ in self.sentence_rows]

    @cached_property
    def sentences(self) -> tuple[Sentence, ...]:
        return tuple(
            Sentence(text=t, words=tuple(t.split(" ")), arabic_ratio=r)
            for t, _, r in self.sentence_rows
        )

    @cached_property
    def text(self) -> str:
        return "\n".join(t for t, _, _ in self.sentence_rows)


@dataclass(frozen=True)
class DedupKey:
    key: str


@dataclass
class SourceStats:
    input_docs: int = 0
    output_docs: int = 0
    input_bytes: int = 0
    output_bytes: int = 0


@dataclass
class FilterStats:
    """Retention accounting: every byte, document, and sentence is attributed."""

    input_docs: int = 0
    output_docs: int = 0
    input_bytes: int = 0
    output_bytes: int = 0
    sentences_examined: int = 0
    sentences_passed: int = 0  # survived sentence-level rules 1-4 and 7
    sentences_kept: int = 0  # passed and belong to a surviving document
    malformed_records: int = 0
    sentence_rejections: dict[int, int] = field(
        default_factory=lambda: {1: 0, 2: 0, 3: 0, 4: 0, 7: 0}
    )
    doc_rejections: dict[int, int] = field(default_factory=lambda: {5: 0, 8: 0})
    per_source: dict[str, SourceStats] = field(default_factory=dict)

    @property
    def discarded_docs(self) -> int:
        return self.doc_rejections[5] + self.doc_rejections[8]

    @property
    def retention_pct(self) -> float:
        if self.input_bytes == 0:
            return 0.0
        return 100.0 * self.output_bytes / self.input_bytes

    def to_dict(self) -> dict:
        return {
            "input_docs": self.input_docs,
            "output_docs": self.output_docs,
            "input_bytes": self.input_bytes,
            "output_bytes": self.output_bytes,
            "retention_pct": self.retention_pct,
            "sentences_examined": self.sentences_examined,
            "sentences_passed": self.sentences_passed,
            "sentences_kept": self.sentences_kept,
            "malformed_records": self.malformed_records,
            "sentence_rejections": {str(k): v for k, v in self.sentence_rejections.items()},
            "doc_rejections": {str(k): v for k, v in self.doc_rejections.items()},
            "per_source": {
                src: {
                    "input_docs": s.input_docs,
                    "output_docs": s.output_docs,
                    "input_bytes": s.input_bytes,
                    "output_bytes": s.output_bytes,
                }
                for src, s in sorted(self.per_source.items())
            },
        }


class DedupIndex:
    """Keep-first registry of sentence keys, ordered by ingest position."""

    def __init__(self) -> None:
        self._first: dict[str, tuple[int, int]] = {}

    def offer(self, key: str, pos: tuple[int, int]) -> bool:
        """Register ``key`` at ``pos``; True iff this position owns the key."""
        return self._first.setdefault(key, pos) == pos

    def owner(self, key: str) -> tuple[int, int] | None:
        return self._first.get(key)

    def __len__(self) -> int:
        return len(self._first)

    def __contains__(self, key: str) -> bool:
        return key in self._first


def _ratio(joined: str, words) -> float:
    if not words:
        return 0.0
    non_ws = len(joined) - len(words) + 1
    non_arabic = 0
    for run in _NON_ARABIC_NONWS_RE.findall(joined):
        non_arabic += len(run)
    return (non_ws - non_arabic) / non_ws


def _fails_markup(text: str) -> bool:
    for marker in _SCRIPT_MARKERS:
        if marker in text:
            return True
    return text.count("{") >= 2 and text.count("}") >= 2


@lru_cache(maxsize=8)
def _punct_prefilter(max_run: int) -> re.Pattern[str]:
    # overapproximation: non-word chars plus underscore (category Pc is \w);
    # may span whitespace, the exact scan below resets on non-punctuation
    return re.compile(r"[\W_]{%d,}" % (max_run + 1))


def _has_long_punct_run(text: str, max_run: int) -> bool:
    for m in _punct_prefilter(max_run).finditer(text):
        count = 0
        dots_only = True
        for ch in m.group():
            if classify(ch) is CharClass.PUNCTUATION:
                count += 1
                if ch != ".":
                    dots_only = False
                if count > max_run and not dots_only:
                    return True
            else:
                count = 0
                dots_only = True
    return False


def _strip_long_nonarabic_runs(words: list[str], max_run: int) -> list[str]:
    out: list[str] = []
    run: list[str] = []
    for w in words:
        if _ARABIC_RE.search(w) is None:
            run.append(w)
        else:
            if run:
                if len(run) <= max_run:
                    out.extend(run)
                run = []
            out.append(w)
    if run and len(run) <= max_run:
        out.extend(run)
    return out


def _key_for_words(words, check_digits: bool) -> str | None:
    if check_digits:
        qualifying = [w for w in words if len(w) > 3 and _DIGIT_RE.search(w) is None]
    else:
        qualifying = [w for w in words if len(w) > 3]
    n = len(qualifying)
    if n < 2:
        return None
    if n < 6:
        return " ".join(qualifying)
    return " ".join(qualifying[:3] + qualifying[-3:])


# ---------------------------------------------------------------------------
# Public per-sentence operations
# ---------------------------------------------------------------------------


def split_sentences(doc: RawDocument | str) -> list[Sentence]:
    """Split normalized text on newlines and terminal punctuation runs.

    Terminal punctuation stays attached to its sentence; empty segments are
    dropped, so no content outside the delimiters themselves is lost.
    """
    text = doc.text if isinstance(doc, RawDocument) else doc
    sentences = []
    for piece in _SENT_SPLIT_RE.split(text):
        words = tuple(piece.split())
        if not words:
            continue
        joined = " ".join(words)
        sentences.append(Sentence(text=piece.strip(), words=words, arabic_ratio=_ratio(joined, words)))
    return sentences


def sentence_passes(s: Sentence, cfg: FilterConfig | None = None) -> tuple[bool, int | None]:
    """Apply rules 1-4 in order; returns (passed, first violated rule)."""
    cfg = cfg or FilterConfig()
    joined = " ".join(s.words)
    if _fails_markup(joined):
        return False, 1
    if s.arabic_ratio < cfg.arabic_ratio:
        return False, 2
    if len(s.words) < cfg.min_words_sentence:
        return False, 3
    if _has_long_punct_run(joined, cfg.max_punct_run):
        return False, 4
    return True, None


def strip_non_arabic_spans(s: Sentence, max_run: int = 5) -> Sentence:
    """Drop maximal runs of more than ``max_run`` words holding no Arabic letter."""
    if max_run < 1:
        raise ValueError("max_run must be >= 1")
    kept = _strip_long_nonarabic_runs(list(s.words), max_run)
    if len(kept) == len(s.words):
        return s
    return Sentence.from_text(" ".join(kept))


def dedup_key(s: Sentence) -> DedupKey | None:
    """Key from the first and last 3 qualifying words (>3 chars, digit-free).

    Sentences with fewer than 2 qualifying words are exempt (no key); with
    2-5 qualifying words the key covers all of them.
    """
    key = _key_for_words(s.words, check_digits=True)
    return DedupKey(key) if key is not None else None


# ---------------------------------------------------------------------------
# Document pipeline
# ---------------------------------------------------------------------------

# prepared document: (doc_id, source, ingest_order, input_bytes, examined,
#                     r1, r2, r3, r4, candidates)
# candidate sentence: (canonical_text, word_count, arabic_ratio, key | None)
_Prepared = tuple


def _prepare_document(
    doc_id: str, source: str, order: int, raw_text: str, cfg: FilterConfig
) -> _Prepared:
    input_bytes = len(raw_text.encode("utf-8"))
    text = normalize_text(raw_text)
    # canonicalize whitespace so a stripped piece equals " ".join(words)
    if "  " in text or _WS_ODD_RE.search(text) is not None:
        text = _WS_RUN_RE.sub(" ", text)
    examined = 0
    r1 = r2 = r3 = r4 = 0
    candidates: list[tuple[str, int, float, str | None]] = []
    min_words = cfg.min_words_sentence
    max_punct = cfg.max_punct_run
    max_nonar = cfg.max_nonarabic_run
    ratio_floor = cfg.arabic_ratio
    pure_match = _PURE_ARABIC_RE.fullmatch
    punct_prefilter = _punct_prefilter(max_punct).search
    digit_search = _DIGIT_RE.search
    nonar_findall = _NON_ARABIC_NONWS_RE.findall
    add_candidate = candidates.append

    for piece in _SENT_SPLIT_RE.split(text):
        sent = piece.strip()
        if not sent:
            continue
        words = sent.split(" ")
        examined += 1
        k = len(words)

        if pure_match(sent) is not None:
            # Arabic letters + single spaces + at most one terminal mark:
            # rules 1 and 4 cannot fire and no word run lacks Arabic
            non_ws = len(sent) - k + 1
            punct = 1 if sent[-1] in _TERMINALS else 0
            ratio = (non_ws - punct) / non_ws
            if ratio < ratio_floor:
                r2 += 1
                continue
            if k < min_words:
                r3 += 1
                continue
            qualifying = [w for w in words if len(w) > 3]
            nq = len(qualifying)
            if nq < 2:
                key = None
            elif nq < 6:
                key = " ".join(qualifying)
            else:
                key = " ".join(qualifying[:3] + qualifying[-3:])
            add_candidate((sent, k, ratio, key))
            continue

        if (
            "<script" in sent
            or "</" in sent
            or "function" in sent
            or "var " in sent
            or (sent.count("{") >= 2 and sent.count("}") >= 2)
        ):
            r1 += 1
            continue
        non_ws = len(sent) - k + 1
        non_arabic = sum(map(len, nonar_findall(sent)))
        ratio = (non_ws - non_arabic) / non_ws
        if ratio < ratio_floor:
            r2 += 1
            continue
        if k < min_words:
            r3 += 1
            continue
        if punct_prefilter(sent) is not None and _has_long_punct_run(sent, max_punct):
            r4 += 1
            continue
        # rule 6 needs at least max_run+1 non-Arabic chars to apply
        if non_arabic > max_nonar:
            stripped = _strip_long_nonarabic_runs(words, max_nonar)
            if len(stripped) != len(words):
                words = stripped
                k = len(words)
                sent = " ".join(words)
                non_ws = len(sent) - k + 1 if k else 0
                non_arabic = sum(map(len, nonar_findall(sent)))
                ratio = (non_ws - non_arabic) / non_ws if non_ws else 0.0
                if ratio < ratio_floor:
                    r2 += 1
                    continue
                if k < min_words:
                    r3 += 1
                    continue
                if punct_prefilter(sent) is not None and _has_long_punct_run(sent, max_punct):
                    r4 += 1
                    continue
        if digit_search(sent) is None:
            qualifying = [w for w in words if len(w) > 3]
        else:
            qualifying = [w for w in words if len(w) > 3 and digit_search(w) is None]
        nq = len(qualifying)
        if nq < 2:
            key = None
        elif nq < 6:
            key = " ".join(qualifying)
        else:
            key = " ".join(qualifying[:3] + qualifying[-3:])
        add_candidate((sent, k, ratio, key))

    return (doc_id, source, order, input_bytes, examined, r1, r2, r3, r4, candidates)


def _resolve_document(
    prepared: _Prepared, dedup: DedupIndex, cfg: FilterConfig
) -> tuple[CleanDocument | None, dict]:
    doc_id, source, order, input_bytes, examined, r1, r2, r3, r4, candidates = prepared
    r7 = 0
    survivors: list[tuple[str, int, float]] = []
    claim = dedup._first.setdefault
    word_count = 0
    for idx, cand in enumerate(candidates):
        key = cand[3]
        if key is not None and claim(key, (order, idx)) != (order, idx):
            r7 += 1
            continue
        survivors.append((cand[0], cand[1], cand[2]))
        word_count += cand[1]

    rejected = examined - len(candidates)
    if cfg.rule8_counts_dedup:
        rejected += r7
    doc_rule: int | None = None
    if examined and rejected / examined > cfg.doc_discard_ratio:
        doc_rule = 8
    if doc_rule is None and word_count < cfg.min_words_doc:
        doc_rule = 5

    clean: CleanDocument | None = None
    output_bytes = 0
    if doc_rule is None:
        clean = CleanDocument(
            doc_id=doc_id, source=source, sentence_rows=tuple(survivors), word_count=word_count
        )
        output_bytes = len(clean.text.encode("utf-8"))

    counts = {
        "source": source,
        "input_bytes": input_bytes,
        "output_bytes": output_bytes,
        "examined": examined,
        "passed": len(candidates) - r7,
        "rules": {1: r1, 2: r2, 3: r3, 4: r4, 7: r7},
        "doc_rule": doc_rule,
    }
    return clean, counts


def _merge_counts(stats: FilterStats, counts: dict, kept: bool) -> None:
    source = counts["source"]
    src = stats.per_source.get(source)
    if src is None:
        src = stats.per_source[source] = SourceStats()
    stats.input_docs += 1
    src.input_docs += 1
    stats.input_bytes += counts["input_bytes"]
    src.input_bytes += counts["input_bytes"]
    stats.sentences_examined += counts["examined"]
    stats.sentences_passed += counts["passed"]
    rules = counts["rules"]
    rejections = stats.sentence_rejections
    for rule in (1, 2, 3, 4, 7):
        rejections[rule] += rules[rule]
    if kept:
        stats.output_docs += 1
        src.output_docs += 1
        stats.output_bytes += counts["output_bytes"]
        src.output_bytes += counts["output_bytes"]
        stats.sentences_kept += counts["passed"]
    else:
        stats.doc_rejections[counts["doc_rule"]] += 1


def filter_document(
    doc: RawDocument, dedup: DedupIndex, cfg: FilterConfig | None = None
) -> tuple[CleanDocument | None, dict[int, int]]:
    """Run the full rule pipeline on one document against a shared dedup index.

    Returns the surviving document (or None) and this document's per-rule
    rejection counts; rules 5 and 8 count whole-document discards.
    """
    cfg = cfg or FilterConfig()
    prepared = _prepare_document(doc.doc_id, doc.source, doc.ingest_order, doc.text, cfg)
    clean, counts = _resolve_document(prepared, dedup, cfg)
    per_rule = dict(counts["rules"])
    per_rule[5] = 1 if counts["doc_rule"] == 5 else 0
    per_rule[8] = 1 if counts["doc_rule"] == 8 else 0
    return clean, per_rule


def _prepare_batch(args: tuple[list[tuple[str, str, int, str]], FilterConfig]) -> list[tuple]:
    """Worker task: prepare documents and repack candidates compactly.

    Candidate texts travel back as one newline-joined block per document;
    pickling one large string is far cheaper than many small ones.
    """
    batch, cfg = args
    out = []
    for doc_id, source, order, text in batch:
        prepared = _prepare_document(doc_id, source, order, text, cfg)
        cands = prepared[9]
        out.append(
            prepared[:9]
            + ("\n".join(c[0] for c in cands), [(c[1], c[2], c[3]) for c in cands])
        )
    return out


def _unpack_wire(wire: tuple) -> _Prepared:
    block, meta = wire[9], wire[10]
    if meta:
        texts = block.split("\n")
        cands = [(t, n, r, key) for t, (n, r, key) in zip(texts, meta)]
    else:
        cands = []
    return wire[:9] + (cands,)


def _batched_docs(
    docs: Iterable[RawDocument], target_bytes: int
) -> Iterator[list[tuple[str, str, int, str]]]:
    batch: list[tuple[str, str, int, str]] = []
    size = 0
    for d in docs:
        batch.append((d.doc_id, d.source, d.ingest_order, d.text))
        size += len(d.text)
        if size >= target_bytes:
            yield batch
            batch = []
            size = 0
    if batch:
        yield batch


def stream_clean(
    docs: Iterable[RawDocument],
    cfg: FilterConfig | None = None,
    *,
    stats: FilterStats | None = None,
    workers: int = 1,
) -> Iterator[CleanDocument]:
    """Yield surviving documents in ingest order, updating ``stats`` in place.

    With ``workers > 1`` the per-sentence work runs in a process pool while
    dedup resolution stays sequential in ingest order, so output is
    byte-identical for any worker count.
    """
    cfg = cfg or FilterConfig()
    cfg.validate()
    if stats is None:
        stats = FilterStats()
    dedup = DedupIndex()

    if workers <= 1:
        for d in docs:
            prepared = _prepare_document(d.doc_id, d.source, d.ingest_order, d.text, cfg)
            clean, counts = _resolve_document(prepared, dedup, cfg)
            _merge_counts(stats, counts, kept=clean is not None)
            if clean is not None:
                yield clean
        return

    ctx = get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        tasks = ((batch, cfg) for batch in _batched_docs(docs, target_bytes=2_000_000))
        for wire_batch in pool.imap(_prepare_batch, tasks):
            for wire in wire_batch:
                clean, counts = _resolve_document(_unpack_wire(wire), dedup, cfg)
                _merge_counts(stats, counts, kept=clean is not None)
                if clean is not None:
                    yield clean


def run_corpus_clean(
    docs: Iterable[RawDocument],
    cfg: FilterConfig | None = None,
    workers: int = 1,
) -> tuple[list[CleanDocument], FilterStats]:
    """Filter a whole corpus; returns surviving documents and final stats."""
    stats = FilterStats()
    out = list(stream_clean(docs, cfg, stats=stats, workers=workers))
    return out, stats


# ---------------------------------------------------------------------------
# Balanced pair sampling (dev-set construction)
# ---------------------------------------------------------------------------


def balanced_sample(
    pairs: Iterable[tuple[str, str, int]],
    n_pos: int,
    n_neg: int,
    seed: int,
) -> list[tuple[str, str, int]]:
    """Sample a label-balanced subset of Latin-free sentence pairs.

    Pairs where either side contains an ASCII letter are dropped before
    sampling. Exactly ``n_pos`` positive and ``n_neg`` negative pairs are
    drawn uniformly without replacement; the draw is a pure function of
    ``seed`` (positives first, then negatives).
    """
    pos: list[tuple[str, str, int]] = []
    neg: list[tuple[str, str, int]] = []
    for a, b, label in pairs:
        if contains_latin(a) or contains_latin(b):
            continue
        if int(label) == 1:
            pos.append((a, b, 1))
        else:
            neg.append((a, b, 0))
    if len(pos) < n_pos:
        raise ValueError(f"not enough positive pairs after filtering: need {n_pos}, have {len(pos)}")
    if len(neg) < n_neg:
        raise ValueError(f"not enough negative pairs after filtering: need {n_neg}, have {len(neg)}")
    rng = random.Random(seed)
    return rng.sample(pos, n_pos) + rng.sample(neg, n_neg)


# ---------------------------------------------------------------------------
# Document I/O
# ---------------------------------------------------------------------------


def read_documents(
    path: str | Path,
    source: str = "OTHER",
    start_order: int = 0,
    stats: FilterStats | None = None,
) -> Iterator[RawDocument]:
    """Read documents from JSON-lines or blank-line-separated plain text.

    JSON lines use {"id", "source", "text"}; a missing id is synthesized from
    the line number and a missing source falls back to ``source``. Records
    that cannot be parsed or carry no text are counted as malformed and
    skipped rather than aborting the stream.
    """
    path = Path(path)
    order = start_order
    try:
        with path.open("r", encoding="utf-8", errors="replace") as f:
            first = f.readline()
            is_jsonl = first.lstrip()[:1] == "{"
            if is_jsonl:
                lineno = 0
                for line in chain([first], f):
                    lineno += 1
                    line = line.strip()
                    if not line:
                        continue
                    try:
                        obj = json.loads(line)
                    except json.JSONDecodeError:
                        if stats is not None:
                            stats.malformed_records += 1
                        continue
                    if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
                        if stats is not None:
                            stats.malformed_records += 1
                        continue
                    doc_id = str(obj.get("id", f"{path.stem}:{lineno}"))
                    yield RawDocument(
                        doc_id=doc_id,
                        source=str(obj.get("source", source)),
                        text=obj["text"],
                        ingest_order=order,
                    )
                    order += 1
            else:
                buf = [first.rstrip("\n")] if first.strip() else []
                n_doc = 0
                for line in f:
                    line = line.rstrip("\n")
                    if line.strip():
                        buf.append(line)
                    elif buf:
                        n_doc += 1
                        yield RawDocument(
                            doc_id=f"{path.stem}:{n_doc}",
                            source=source,
                            text="\n".join(buf),
                            ingest_order=order,
                        )
                        order += 1
                        buf = []
                if buf:
                    n_doc += 1
                    yield RawDocument(
                        doc_id=f"{path.stem}:{n_doc}",
                        source=source,
                        text="\n".join(buf),
                        ingest_order=order,
                    )
    except OSError as exc:
        raise OSError(f"failed reading corpus file {path}: {exc}") from exc


def read_document_streams(
    inputs: list[tuple[str | Path, str]],
    stats: FilterStats | None = None,
) -> Iterator[RawDocument]:
    """Chain several (path, source) inputs into one ingest-ordered stream."""
    order = 0
    for path, source in inputs:
        for doc in read_documents(path, source=source, start_order=order, stats=stats):
            order = doc.ingest_order + 1
            yield doc


def write_clean_jsonl(docs: Iterable[CleanDocument], path: str | Path) -> int:
    """Write surviving documents as JSON lines; returns the document count."""
    n = 0
    with Path(path).open("w", encoding="utf-8") as f:
        for doc in docs:
            rec = {
                "id": doc.doc_id,
                "source": doc.source,
                "text": doc.text,
                "sentences": doc.sentence_texts,
            }
            f.write(json.dumps(rec, ensure_ascii=False) + "\n")
            n += 1
    return n


def read_clean_jsonl(path: str | Path) -> Iterator[CleanDocument]:
    """Load documents written by :func:`write_clean_jsonl`."""
    with Path(path).open("r", encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            yield CleanDocument.from_sentences(
                doc_id=str(obj["id"]),
                source=str(obj.get("source", "OTHER")),
                sentences=(Sentence.from_text(t) for t in obj["sentences"]),
            )
