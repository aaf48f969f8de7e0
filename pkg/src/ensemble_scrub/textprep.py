"""Text normalization: markup stripping, lowercasing, letter-only tokens, stop words, stemming."""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

DEFAULT_STOPWORD_LIST = "en-v1"
_STOPWORD_FILES = {"en-v1": "stopwords_en_v1.txt"}

_MARKUP = re.compile(r"<[^<>]*>")


@dataclass(frozen=True)
class TokenPipelineConfig:
    stopword_list_id: str = DEFAULT_STOPWORD_LIST
    stemming_enabled: bool = True
    strip_markup: bool = True
    drop_single_letters: bool = True


@lru_cache(maxsize=None)
def load_stopwords(list_id: str = DEFAULT_STOPWORD_LIST) -> frozenset[str]:
    try:
        fname = _STOPWORD_FILES[list_id]
    except KeyError:
        raise KeyError(f"unknown stop-word list {list_id!r}; known: {sorted(_STOPWORD_FILES)}") from None
    text = resources.files("ensemble_scrub").joinpath("data", fname).read_text(encoding="utf-8")
    words = frozenset(w.strip() for w in text.splitlines() if w.strip())
    if not words:
        raise ValueError(f"stop-word list {list_id!r} is empty")
    return words


def normalize(text: str, config: TokenPipelineConfig = TokenPipelineConfig()) -> list[str]:
    """Turn raw document text into a list of cleaned tokens.

    Steps run in a fixed order: strip ``<...>`` markup, lowercase, map every
    non-letter to a space, split, drop stop words, drop 1-letter tokens, stem.
    """
    if config.strip_markup:
        text = _MARKUP.sub(" ", text)
    text = text.lower()
    text = "".join(ch if ch.isalpha() else " " for ch in text)
    stop = load_stopwords(config.stopword_list_id)
    tokens = [t for t in text.split() if t not in stop]
    if config.drop_single_letters:
        tokens = [t for t in tokens if len(t) > 1]
    if config.stemming_enabled:
        tokens = [stem(t) for t in tokens]
    return tokens


# --- Porter (1980) suffix stripping -------------------------------------------

_VOWELS = frozenset("aeiou")


def _is_consonant(word: str, i: int) -> bool:
    ch = word[i]
    if ch in _VOWELS:
        return False
    if ch == "y":
        return i == 0 or not _is_consonant(word, i - 1)
    return True


def _measure(stem_: str) -> int:
    """Number of VC sequences in ``[C](VC)^m[V]``."""
    m = 0
    prev_vowel = False
    for i in range(len(stem_)):
        cons = _is_consonant(stem_, i)
        if cons and prev_vowel:
            m += 1
        prev_vowel = not cons
    return m


def _has_vowel(stem_: str) -> bool:
    return any(not _is_consonant(stem_, i) for i in range(len(stem_)))


def _ends_double_consonant(word: str) -> bool:
    return len(word) >= 2 and word[-1] == word[-2] and _is_consonant(word, len(word) - 1)


def _ends_cvc(word: str) -> bool:
    if len(word) < 3:
        return False
    return (
        _is_consonant(word, len(word) - 3)
        and not _is_consonant(word, len(word) - 2)
        and _is_consonant(word, len(word) - 1)
        and word[-1] not in "wxy"
    )


def _apply_rules(word: str, rules, min_measure: int) -> str:
    # only the longest matching suffix is considered; no fallback to shorter ones
    for suffix, repl in rules:
        if word.endswith(suffix):
            base = word[: len(word) - len(suffix)]
            if _measure(base) > min_measure:
                return base + repl
            return word
    return word


_STEP2 = sorted([
    ("ational", "ate"), ("tional", "tion"), ("enci", "ence"), ("anci", "ance"),
    ("izer", "ize"), ("abli", "able"), ("alli", "al"), ("entli", "ent"),
    ("eli", "e"), ("ousli", "ous"), ("ization", "ize"), ("ation", "ate"),
    ("ator", "ate"), ("alism", "al"), ("iveness", "ive"), ("fulness", "ful"),
    ("ousness", "ous"), ("aliti", "al"), ("iviti", "ive"), ("biliti", "ble"),
], key=lambda r: -len(r[0]))

_STEP3 = sorted([
    ("icate", "ic"), ("ative", ""), ("alize", "al"), ("iciti", "ic"),
    ("ical", "ic"), ("ful", ""), ("ness", ""),
], key=lambda r: -len(r[0]))

_STEP4 = sorted([
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment",
    "ent", "ion", "ou", "ism", "ate", "iti", "ous", "ive", "ize",
], key=len, reverse=True)


def _step1a(w: str) -> str:
    if w.endswith("sses"):
        return w[:-2]
    if w.endswith("ies"):
        return w[:-2]
    if w.endswith("ss"):
        return w
    if w.endswith("s"):
        return w[:-1]
    return w


def _step1b(w: str) -> str:
    if w.endswith("eed"):
        return w[:-1] if _measure(w[:-3]) > 0 else w
    for suffix in ("ed", "ing"):
        if w.endswith(suffix):
            base = w[: -len(suffix)]
            if not _has_vowel(base):
                return w
            if base.endswith(("at", "bl", "iz")):
                return base + "e"
            if _ends_double_consonant(base) and base[-1] not in "lsz":
                return base[:-1]
            if _measure(base) == 1 and _ends_cvc(base):
                return base + "e"
            return base
    return w


def _step1c(w: str) -> str:
    if w.endswith("y") and _has_vowel(w[:-1]):
        return w[:-1] + "i"
    return w


def _step4(w: str) -> str:
    for suffix in _STEP4:
        if w.endswith(suffix):
            base = w[: -len(suffix)]
            if _measure(base) <= 1:
                return w
            if suffix == "ion" and not base.endswith(("s", "t")):
                return w
            return base
    return w


def _step5(w: str) -> str:
    if w.endswith("e"):
        base = w[:-1]
        m = _measure(base)
        if m > 1 or (m == 1 and not _ends_cvc(base)):
            w = base
    if w.endswith("ll") and _measure(w) > 1:
        w = w[:-1]
    return w


def porter_stem(token: str) -> str:
    """One pass of the Porter stemmer (original 1980 rules). Words of length <= 2 pass through."""
    if len(token) <= 2:
        return token
    w = _step1a(token)
    w = _step1b(w)
    w = _step1c(w)
    w = _apply_rules(w, _STEP2, 0)
    w = _apply_rules(w, _STEP3, 0)
    w = _step4(w)
    w = _step5(w)
    return w


@lru_cache(maxsize=65536)
def stem(token: str) -> str:
    """Porter stemming repeated until the word stops changing.

    A single pass is not idempotent on about 5% of English words
    ("because" -> "becaus" -> "becau"); iterating makes ``stem`` a projection.
    """
    for _ in range(_MAX_PASSES):
        nxt = porter_stem(token)
        if nxt == token:
            break
        token = nxt
    return token


_MAX_PASSES = 16
