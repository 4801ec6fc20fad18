from __future__ import annotations

import random
import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).resolve().parent))

from araprep.corpus_filter import RawDocument

# timing-based deadlines flake on shared machines; example counts stay put
settings.register_profile("no-deadline", deadline=None)
settings.load_profile("no-deadline")

AR_LETTERS = "ابتثجحخدذرزسشصضطظعغفقكلمنهوي"


def arabic_word(rng: random.Random, lo: int = 3, hi: int = 8) -> str:
    return "".join(rng.choice(AR_LETTERS) for _ in range(rng.randint(lo, hi)))


def arabic_sentence(rng: random.Random, n_words: int | None = None, vocab: list[str] | None = None) -> str:
    k = n_words or rng.randint(8, 16)
    if vocab:
        return " ".join(rng.choices(vocab, k=k)) + "."
    return " ".join(arabic_word(rng) for _ in range(k)) + "."


@pytest.fixture(scope="session")
def arabic_vocab() -> list[str]:
    rng = random.Random(20240)
    return [arabic_word(rng) for _ in range(3000)]


def messy_corpus(rng: random.Random, n_docs: int, vocab: list[str]) -> list[RawDocument]:
    """Random documents exercising every rule: junk, markup, digits, dups,
    diacritics, emoji, short fragments, and clean prose."""
    latin = ["lorem", "ipsum", "dolor", "sit", "amet", "consectetur", "adipiscing", "velit"]
    docs: list[RawDocument] = []
    reusable: list[str] = []
    for i in range(n_docs):
        kind = rng.random()
        sents: list[str] = []
        n = rng.randint(3, 12)
        if kind < 0.45:
            for _ in range(n):
                s = arabic_sentence(rng, vocab=vocab)
                if rng.random() < 0.2:
                    s = s[:-1] + "!!!!"  # punctuation run
                if rng.random() < 0.2:
                    s = s.replace(" ", " ً", 1)  # stray diacritic
                if rng.random() < 0.15:
                    words = s.split()
                    pos = rng.randrange(len(words))
                    words[pos:pos] = rng.choices(latin, k=rng.randint(1, 8))
                    s = " ".join(words)
                sents.append(s)
        elif kind < 0.6:
            sents = [" ".join(rng.choices(latin, k=rng.randint(5, 15))) + "." for _ in range(n)]
        elif kind < 0.7:
            sents = [
                '<p id="x">' + arabic_sentence(rng, vocab=vocab) + "</p>" for _ in range(n)
            ]
        elif kind < 0.8:
            sents = [arabic_sentence(rng, rng.randint(1, 7), vocab=vocab) for _ in range(n)]
        elif kind < 0.9 and reusable:
            sents = rng.choice(reusable)
        else:
            for _ in range(n):
                s = arabic_sentence(rng, vocab=vocab)
                if rng.random() < 0.3:
                    words = s.split()
                    words[rng.randrange(len(words))] = f"رقم{rng.randint(10, 99)}"
                    s = " ".join(words)
                if rng.random() < 0.2:
                    s += " \U0001f600"
                sents.append(s)
        if isinstance(sents, list) and rng.random() < 0.5 and sents and not isinstance(sents[0], list):
            reusable.append(sents)
        text = "\n".join(sents) if rng.random() < 0.5 else " ".join(sents)
        docs.append(RawDocument(f"doc-{i}", rng.choice(["CC", "NEWS", "WIKI"]), text, i))
    return docs
