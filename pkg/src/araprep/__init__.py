"""Corpus preparation and evaluation toolkit for Arabic language-model
pre-training: normalization, aggressive filtering with exact dedup,
byte-level BPE tokenization, whole-word-masked instance generation, NLU
metrics, and experiment aggregation."""

from .bbpe import BbpeVocab, TokenizedWord, decode, encode, load_vocab, save_vocab, train_bbpe
from .corpus_filter import (
    CleanDocument,
    DedupIndex,
    DedupKey,
    FilterConfig,
    FilterStats,
    RawDocument,
    Sentence,
    balanced_sample,
    dedup_key,
    filter_document,
    run_corpus_clean,
    sentence_passes,
    split_sentences,
    strip_non_arabic_spans,
)
from .eval_metrics import (
    ALUE_TASKS,
    EntitySpan,
    accuracy,
    alue_average,
    conll_mention_f1,
    decode_bio,
    f1_macro,
    jaccard_multilabel,
    pearson,
)
from .harness import (
    AggregateReport,
    HpConfig,
    HpGrid,
    RunRecord,
    aggregate_runs,
    emit_grid_manifest,
    render_table,
)
from .normalize import CharClass, arabic_ratio, classify, contains_latin, normalize_text
from .pretrain_gen import (
    MaskingPolicy,
    TrainingInstance,
    build_segment_pairs,
    generate_instances,
    whole_word_mask,
)

__version__ = "0.1.0"
