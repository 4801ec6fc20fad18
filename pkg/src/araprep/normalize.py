"""Arabic-aware character classification and text normalization.

Cleaning applied ahead of filtering and tokenization: strips diacritics
(tashkeel), tatweel/kashida, emoji, and HTML markup, and leaves every other
character untouched and in order.
"""

from __future__ import annotations

import re
import unicodedata
from enum import Enum

TATWEEL = 0x0640

# Harakat and Quranic marks (U+064B-U+065F) plus the superscript alef.
TASHKEEL = frozenset(range(0x064B, 0x0660)) | {0x0670}

# Emoticons, Misc Symbols & Pictographs, Transport, Supplemental Symbols,
# plus the classic Misc Symbols / Dingbats range.
EMOJI_RANGES = (
    (0x1F300, 0x1F5FF),
    (0x1F600, 0x1F64F),
    (0x1F680, 0x1F6FF),
    (0x1F900, 0x1F9FF),
    (0x2600, 0x27BF),
)

_ARABIC_BLOCKS = (
    (0x0600, 0x06FF),
    (0x0750, 0x077F),
    (0x08A0, 0x08FF),
    (0xFB50, 0xFDFF),
    (0xFE70, 0xFEFF),
)


def _letters_in_arabic_blocks() -> frozenset[int]:
    letters: set[int] = set()
    for lo, hi in _ARABIC_BLOCKS:
        for cp in range(lo, hi + 1):
            if unicodedata.category(chr(cp)).startswith("L"):
                letters.add(cp)
    # tatweel is category Lm but carries no lexical content
    letters.discard(TATWEEL)
    return frozenset(letters - TASHKEEL)


ARABIC_LETTERS = _letters_in_arabic_blocks()
EMOJI = frozenset(cp for lo, hi in EMOJI_RANGES for cp in range(lo, hi + 1))


class CharClass(Enum):
    """Disjoint character kinds; :func:`classify` maps every scalar to one."""

    ARABIC_LETTER = "arabic_letter"
    ARABIC_DIACRITIC = "arabic_diacritic"
    TATWEEL = "tatweel"
    LATIN_LETTER = "latin_letter"
    DIGIT = "digit"
    PUNCTUATION = "punctuation"
    WHITESPACE = "whitespace"
    EMOJI = "emoji"
    OTHER = "other"


def classify(ch: str) -> CharClass:
    """Classify a single character. Total over all Unicode scalar values.

    Latin letters are ASCII [A-Za-z] only; digits are any Unicode decimal
    digit (category Nd); punctuation covers the P* and S* categories so
    symbol runs count toward gibberish detection.
    """
    cp = ord(ch)
    if cp == TATWEEL:
        return CharClass.TATWEEL
    if cp in TASHKEEL:
        return CharClass.ARABIC_DIACRITIC
    if ch.isspace():
        return CharClass.WHITESPACE
    if cp in EMOJI:
        return CharClass.EMOJI
    if cp in ARABIC_LETTERS:
        return CharClass.ARABIC_LETTER
    if "A" <= ch <= "Z" or "a" <= ch <= "z":
        return CharClass.LATIN_LETTER
    cat = unicodedata.category(ch)
    if cat == "Nd":
        return CharClass.DIGIT
    if cat[0] in "PS":
        return CharClass.PUNCTUATION
    return CharClass.OTHER


def _char_class_pattern(codepoints: frozenset[int]) -> str:
    """Build a compact regex character class from a codepoint set."""
    pts = sorted(codepoints)
    runs: list[str] = []
    start = prev = pts[0]
    for cp in pts[1:]:
        if cp == prev + 1:
            prev = cp
            continue
        runs.append(chr(start) if start == prev else f"{chr(start)}-{chr(prev)}")
        start = prev = cp
    runs.append(chr(start) if start == prev else f"{chr(start)}-{chr(prev)}")
    return "[" + "".join(runs) + "]"


_DELETE_SET = frozenset({TATWEEL}) | TASHKEEL | EMOJI
_DELETE_RE = re.compile(_char_class_pattern(_DELETE_SET) + "+")

# inner body of the Arabic-letter character class, reusable in other patterns
ARABIC_CLASS_INNER = _char_class_pattern(ARABIC_LETTERS)[1:-1]
_ARABIC_RE = re.compile(f"[{ARABIC_CLASS_INNER}]")
_NON_ARABIC_NONWS_RE = re.compile(f"[^\\s{ARABIC_CLASS_INNER}]+")
_LATIN_RE = re.compile(r"[A-Za-z]")

# The ten named entities that dominate scraped web text.
_ENTITIES = (
    ("&amp;", "&"),
    ("&lt;", "<"),
    ("&gt;", ">"),
    ("&quot;", '"'),
    ("&apos;", "'"),
    ("&nbsp;", " "),
    ("&laquo;", "«"),
    ("&raquo;", "»"),
    ("&ndash;", "–"),
    ("&mdash;", "—"),
)

# A '<' with no '>' within this many following chars is treated as plain text.
_TAG_SPAN_CAP = 128


def _strip_tags(text: str) -> str:
    out: list[str] = []
    i = 0
    while True:
        lt = text.find("<", i)
        if lt == -1:
            out.append(text[i:])
            break
        gt = text.find(">", lt + 1, lt + 1 + _TAG_SPAN_CAP)
        if gt == -1:
            out.append(text[i : lt + 1])
            i = lt + 1
        else:
            out.append(text[i:lt])
            i = gt + 1
    return "".join(out)


def _normalize_once(text: str) -> str:
    if "&" in text:
        for entity, repl in _ENTITIES:
            text = text.replace(entity, repl)
    if "<" in text:
        text = _strip_tags(text)
    return _DELETE_RE.sub("", text)


def normalize_text(text: str) -> str:
    """Remove tashkeel, tatweel, emoji, and HTML markup from ``text``.

    All other characters are preserved in order. The result is a fixed
    point: entity decoding and tag stripping are reapplied until nothing
    changes, so the function is idempotent even when decoding exposes new
    markup. Every rewriting step strictly shrinks the text, so the loop
    terminates and the output is never longer than the input.
    """
    while True:
        new = _normalize_once(text)
        if new == text:
            return new
        text = new


def arabic_ratio(text: str) -> float:
    """Fraction of non-whitespace characters that are Arabic letters.

    Returns 0.0 when the text has no non-whitespace characters.
    """
    non_ws = 0
    for w in text.split():
        non_ws += len(w)
    if non_ws == 0:
        return 0.0
    non_arabic = 0
    for m in _NON_ARABIC_NONWS_RE.finditer(text):
        non_arabic += m.end() - m.start()
    return (non_ws - non_arabic) / non_ws


def contains_latin(text: str) -> bool:
    """True iff any character is an ASCII letter [A-Za-z]."""
    return _LATIN_RE.search(text) is not None


def has_arabic_letter(text: str) -> bool:
    """True iff the text contains at least one Arabic letter."""
    return _ARABIC_RE.search(text) is not None
