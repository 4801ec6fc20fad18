import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from araprep.eval_metrics import (
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
from oracles import brute_mention_prf, brute_spans, encode_bio


class TestAccuracy:
    def test_perfect(self):
        assert accuracy(["A", "B"], ["A", "B"]) == 1.0

    def test_partial(self):
        assert accuracy(["A", "B", "A"], ["A", "B", "C"]) == pytest.approx(2 / 3)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            accuracy([], [])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            accuracy(["A"], ["A", "B"])

    def test_permutation_invariant(self):
        preds, golds = ["A", "B", "C", "A"], ["A", "C", "C", "B"]
        base = accuracy(preds, golds)
        order = [2, 0, 3, 1]
        assert accuracy([preds[i] for i in order], [golds[i] for i in order]) == base


class TestF1Macro:
    def test_perfect_binary(self):
        assert f1_macro(["a", "b"], ["a", "b"], ["a", "b"]) == 1.0

    def test_reference_value(self):
        got = f1_macro(list("ABBB"), list("AABB"), ["A", "B"])
        assert got == pytest.approx((2 / 3 + 4 / 5) / 2, abs=1e-12)

    def test_zero_support_label_counts_as_zero(self):
        with_c = f1_macro(list("ABBB"), list("AABB"), ["A", "B", "C"])
        without_c = f1_macro(list("ABBB"), list("AABB"), ["A", "B"])
        assert with_c == pytest.approx(without_c * 2 / 3)

    def test_unknown_label_rejected(self):
        with pytest.raises(ValueError, match="label_set"):
            f1_macro(["x"], ["a"], ["a"])

    def test_empty_label_set_rejected(self):
        with pytest.raises(ValueError):
            f1_macro([], [], [])


class TestJaccard:
    def test_single_pair(self):
        assert jaccard_multilabel([{"a", "b"}], [{"b", "c"}]) == pytest.approx(1 / 3)

    def test_perfect(self):
        sets = [{"a"}, {"b", "c"}]
        assert jaccard_multilabel(sets, sets) == 1.0

    def test_both_empty_convention(self):
        assert jaccard_multilabel([set()], [set()]) == 1.0

    def test_micro_variant(self):
        preds = [{"a"}, {"b"}]
        golds = [{"a"}, {"c"}]
        assert jaccard_multilabel(preds, golds, micro=True) == pytest.approx(1 / 3)
        assert jaccard_multilabel(preds, golds) == pytest.approx(0.5)

    def test_range(self):
        rng = random.Random(0)
        universe = list("abcdef")
        for _ in range(50):
            preds = [set(rng.sample(universe, rng.randint(0, 4))) for _ in range(5)]
            golds = [set(rng.sample(universe, rng.randint(0, 4))) for _ in range(5)]
            assert 0.0 <= jaccard_multilabel(preds, golds) <= 1.0


class TestPearson:
    def test_perfect_positive(self):
        assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)

    def test_perfect_negative(self):
        assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_reference_value(self):
        assert pearson([1, 2, 3], [1, 3, 2]) == pytest.approx(0.5, abs=1e-12)

    def test_constant_input_rejected(self):
        with pytest.raises(ValueError, match="constant"):
            pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(ValueError, match="constant"):
            pearson([1, 2, 3], [5, 5, 5])

    def test_bounds(self):
        rng = random.Random(1)
        for _ in range(100):
            xs = [rng.random() for _ in range(10)]
            ys = [rng.random() for _ in range(10)]
            assert -1.0 <= pearson(xs, ys) <= 1.0

    def test_shift_scale_invariant(self):
        xs = [1.0, 4.0, 2.0, 8.0]
        ys = [0.5, 2.0, 1.5, 3.0]
        r = pearson(xs, ys)
        assert pearson([3 * x + 7 for x in xs], ys) == pytest.approx(r)


class TestDecodeBio:
    def test_basic(self):
        spans = decode_bio(["B-PER", "I-PER", "O", "B-LOC"])
        assert spans == [EntitySpan(0, 1, "PER"), EntitySpan(3, 3, "LOC")]

    def test_leading_i_starts_chunk(self):
        assert decode_bio(["I-PER", "I-PER"]) == [EntitySpan(0, 1, "PER")]

    def test_all_outside(self):
        assert decode_bio(["O", "O", "O"]) == []

    def test_type_change_splits(self):
        assert decode_bio(["B-PER", "I-LOC"]) == [EntitySpan(0, 0, "PER"), EntitySpan(1, 1, "LOC")]

    def test_b_after_b_splits(self):
        assert decode_bio(["B-PER", "B-PER"]) == [EntitySpan(0, 0, "PER"), EntitySpan(1, 1, "PER")]

    def test_unknown_tag_rejected(self):
        with pytest.raises(ValueError, match="position 1"):
            decode_bio(["O", "X-PER"])
        with pytest.raises(ValueError):
            decode_bio(["B"])

    @given(
        st.lists(
            st.tuples(st.integers(0, 1), st.sampled_from(["PER", "LOC", "ORG"])), max_size=8
        )
    )
    @settings(max_examples=200)
    def test_encode_decode_identity(self, raw):
        # build sorted non-overlapping spans from random lengths
        spans = []
        cursor = 0
        for gap, etype in raw:
            start = cursor + gap
            end = start  # single- or double-token span
            spans.append((start, end, etype))
            cursor = end + 1
        length = cursor + 1
        tags = encode_bio(spans, length)
        got = [(s.start, s.end, s.entity_type) for s in decode_bio(tags)]
        assert got == spans


class TestConllMentionF1:
    def test_identical(self):
        seqs = [["B-PER", "I-PER", "O"], ["O", "B-LOC"]]
        assert conll_mention_f1(seqs, seqs) == (1.0, 1.0, 1.0)

    def test_shifted_span_scores_zero(self):
        pred = [["O", "B-PER", "I-PER"]]
        gold = [["B-PER", "I-PER", "O"]]
        precision, recall, f1 = conll_mention_f1(pred, gold)
        assert (precision, recall, f1) == (0.0, 0.0, 0.0)

    def test_type_must_match(self):
        pred = [["B-LOC", "I-LOC"]]
        gold = [["B-PER", "I-PER"]]
        assert conll_mention_f1(pred, gold)[2] == 0.0

    def test_sequence_count_mismatch(self):
        with pytest.raises(ValueError, match="count"):
            conll_mention_f1([["O"]], [["O"], ["O"]])

    def test_length_mismatch_names_index(self):
        with pytest.raises(ValueError, match="sequence 1"):
            conll_mention_f1([["O"], ["O", "O"]], [["O"], ["O"]])

    def test_swap_symmetry(self):
        rng = random.Random(3)
        pred, gold = _random_tag_corpus(rng, 40)
        p1, r1, f1 = conll_mention_f1(pred, gold)
        p2, r2, f2 = conll_mention_f1(gold, pred)
        assert (p1, r1) == (r2, p2)
        assert f1 == pytest.approx(f2)

    def test_matches_brute_force(self):
        rng = random.Random(4)
        pred, gold = _random_tag_corpus(rng, 300)
        assert conll_mention_f1(pred, gold) == brute_mention_prf(pred, gold)

    def test_decode_matches_brute_spans(self):
        rng = random.Random(5)
        pred, _ = _random_tag_corpus(rng, 200)
        for seq in pred:
            got = [(s.start, s.end, s.entity_type) for s in decode_bio(seq)]
            assert got == brute_spans(seq)


def _random_tag_corpus(rng, n_seqs, max_len=8, types=("PER", "LOC")):
    tags = ["O"] + [f"{p}-{t}" for p in "BI" for t in types]
    pred, gold = [], []
    for _ in range(n_seqs):
        n = rng.randint(1, max_len)
        pred.append([rng.choice(tags) for _ in range(n)])
        gold.append([rng.choice(tags) for _ in range(n)])
    return pred, gold


class TestPermutationInvariance:
    def test_all_sample_metrics(self):
        rng = random.Random(9)
        order = list(range(6))
        rng.shuffle(order)

        preds, golds = list("ABABAB"), list("ABBBAA")
        assert f1_macro([preds[i] for i in order], [golds[i] for i in order], ["A", "B"]) == \
            f1_macro(preds, golds, ["A", "B"])

        pred_sets = [{"a"}, {"b"}, set(), {"a", "b"}, {"c"}, {"a", "c"}]
        gold_sets = [{"a"}, {"c"}, set(), {"b"}, {"c"}, {"a"}]
        assert jaccard_multilabel([pred_sets[i] for i in order], [gold_sets[i] for i in order]) == \
            pytest.approx(jaccard_multilabel(pred_sets, gold_sets))

        xs = [1.0, 5.0, 2.0, 8.0, 3.0, 9.0]
        ys = [2.0, 4.0, 1.0, 9.0, 2.5, 7.0]
        assert pearson([xs[i] for i in order], [ys[i] for i in order]) == pytest.approx(pearson(xs, ys))

        rng2 = random.Random(10)
        pred_tags, gold_tags = _random_tag_corpus(rng2, 6)
        assert conll_mention_f1([pred_tags[i] for i in order], [gold_tags[i] for i in order]) == \
            conll_mention_f1(pred_tags, gold_tags)


class TestAlueAverage:
    def test_uniform(self):
        assert alue_average({t: 70.0 for t in ALUE_TASKS}) == 70.0

    def test_benchmark_dev_row(self):
        row = {
            "MQ2Q": 75.1, "MDD": 65.7, "SVREG": 87.4, "SEC": 46.8,
            "FID": 84.8, "OOLD": 92.2, "XNLI": 72.4, "OHSD": 85.0,
        }
        assert alue_average(row) == pytest.approx(76.175, abs=1e-9)

    def test_missing_task_rejected(self):
        scores = {t: 1.0 for t in ALUE_TASKS[:-1]}
        with pytest.raises(ValueError, match="OHSD"):
            alue_average(scores)

    def test_extra_task_rejected(self):
        scores = {t: 1.0 for t in ALUE_TASKS}
        scores["BONUS"] = 2.0
        with pytest.raises(ValueError, match="BONUS"):
            alue_average(scores)
