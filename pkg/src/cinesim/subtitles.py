"""Subtitle ingestion: .srt parsing, text cleanup, tokenization and bag-of-words.

The pipeline is parse_srt -> tokenize_and_lemmatize -> build_bow.  Parsing
strips everything that is not spoken text (cue indices, timestamps, markup,
bracketed annotations, leading dashes); tokenization lowercases, splits on
non-letters, lemmatizes with a deterministic rule table and drops stopwords.
"""

from __future__ import annotations

import re
import warnings
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np
from scipy import sparse


class EmptyDocumentError(ValueError):
    """An .srt file yielded no usable cues."""


class EmptyVocabularyError(ValueError):
    """Frequency filtering removed every term."""


class MalformedTimestampWarning(UserWarning):
    """A cue was skipped because its timestamp line is corrupt."""


@dataclass(frozen=True)
class Cue:
    start_ms: int
    end_ms: int
    text: str


@dataclass
class SubtitleDocument:
    movie_id: str
    cues: list[Cue]

    @property
    def text(self) -> str:
        return "\n".join(cue.text for cue in self.cues)


@dataclass
class TokenStream:
    movie_id: str
    tokens: list[str]


@dataclass
class Vocabulary:
    term_to_index: dict[str, int]
    doc_freq: np.ndarray          # documents containing each term
    collection_freq: np.ndarray   # total occurrences of each term

    def __len__(self) -> int:
        return len(self.term_to_index)

    @property
    def terms(self) -> list[str]:
        out = [""] * len(self.term_to_index)
        for term, idx in self.term_to_index.items():
            out[idx] = term
        return out


@dataclass
class BowMatrix:
    counts: sparse.csr_matrix     # n_docs x n_terms, integer counts
    doc_ids: list[str]

    @property
    def n_docs(self) -> int:
        return self.counts.shape[0]

    @property
    def n_terms(self) -> int:
        return self.counts.shape[1]


# --------------------------------------------------------------------------
# .srt parsing
# --------------------------------------------------------------------------

_TIMESTAMP_RE = re.compile(
    r"^\s*(\d{1,2}):(\d{1,2}):(\d{1,2})[,.](\d{1,3})\s*-->"
    r"\s*(\d{1,2}):(\d{1,2}):(\d{1,2})[,.](\d{1,3})\s*$"
)
_TAG_RE = re.compile(r"</?[a-zA-Z][^>]*>")
_BRACKET_RE = re.compile(r"\[[^\]]*\]|\{[^}]*\}")
_LEADING_DASH_RE = re.compile(r"^\s*-+\s*")


def decode_subtitle_bytes(raw: bytes) -> str:
    """Decode as UTF-8 when valid, otherwise Latin-1 (which never fails)."""
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        text = raw.decode("latin-1")
    return text.lstrip("﻿")


def _timestamp_ms(h: str, m: str, s: str, ms: str) -> int:
    return ((int(h) * 60 + int(m)) * 60 + int(s)) * 1000 + int(ms.ljust(3, "0"))


def _clean_cue_line(line: str) -> str:
    line = _TAG_RE.sub("", line)
    line = _BRACKET_RE.sub("", line)
    line = _LEADING_DASH_RE.sub("", line)
    return line.strip()


def parse_srt(raw: bytes, movie_id: str = "") -> SubtitleDocument:
    """Parse SubRip bytes into a cleaned SubtitleDocument.

    Cue indices, timestamp lines, HTML-like tags, bracketed annotations and
    leading dashes are removed; the remaining cue text is kept verbatim.
    Cues with corrupt timestamps are skipped with a MalformedTimestampWarning.

    Raises EmptyDocumentError if no cue survives.
    """
    text = decode_subtitle_bytes(raw)
    lines = text.splitlines()

    cues: list[Cue] = []
    i = 0
    n = len(lines)
    while i < n:
        line = lines[i]
        if "-->" in line:
            match = _TIMESTAMP_RE.match(line)
            start = end = None
            if match:
                start = _timestamp_ms(*match.groups()[:4])
                end = _timestamp_ms(*match.groups()[4:])
            i += 1
            body: list[str] = []
            while i < n and lines[i].strip() and "-->" not in lines[i]:
                body.append(lines[i])
                i += 1
            # a trailing bare number is the next cue's index (missing blank line)
            if i < n and "-->" in lines[i] and body and body[-1].strip().isdigit():
                body.pop()
            if match is None or start > end:
                warnings.warn(
                    f"skipping cue with malformed timestamp line: {line.strip()!r}",
                    MalformedTimestampWarning,
                )
                continue
            cleaned = [_clean_cue_line(b) for b in body]
            cue_text = "\n".join(c for c in cleaned if c)
            if cue_text:
                cues.append(Cue(start, end, cue_text))
        else:
            i += 1

    if not cues:
        raise EmptyDocumentError(f"no usable cues in subtitle document {movie_id!r}")
    cues.sort(key=lambda c: c.start_ms)
    return SubtitleDocument(movie_id=movie_id, cues=cues)


def _format_ms(ms: int) -> str:
    s, milli = divmod(ms, 1000)
    m, sec = divmod(s, 60)
    h, minute = divmod(m, 60)
    return f"{h:02d}:{minute:02d}:{sec:02d},{milli:03d}"


def to_srt(doc: SubtitleDocument) -> str:
    """Serialize back to SubRip text; parse(to_srt(parse(x))) == parse(x)."""
    blocks = []
    for i, cue in enumerate(doc.cues, start=1):
        blocks.append(
            f"{i}\n{_format_ms(cue.start_ms)} --> {_format_ms(cue.end_ms)}\n{cue.text}\n"
        )
    return "\n".join(blocks)


# --------------------------------------------------------------------------
# Tokenization and lemmatization
# --------------------------------------------------------------------------

# letters only, apostrophe/hyphen allowed strictly between letters
_TOKEN_RE = re.compile(r"[a-z]+(?:['-][a-z]+)*")
_APOSTROPHE_SUFFIXES = ("'ll", "'re", "'ve", "'s", "'t", "'d", "'m")

_VOWELS = set("aeiou")
_VOWELS_Y = set("aeiouy")
# doubled finals kept as-is: fall, miss, buzz, stuff
_KEEP_DOUBLE = set("lszf")


def _data_text(name: str) -> str:
    return resources.files("cinesim.data").joinpath(name).read_text(encoding="utf-8")


def load_stopwords(*paths: str | Path) -> set[str]:
    """Merge one-term-per-line stopword files ('#' lines are comments)."""
    words: set[str] = set()
    for path in paths:
        for line in Path(path).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return words


def default_stopwords() -> set[str]:
    """The packaged common + movie-domain stopword lists, merged."""
    words: set[str] = set()
    for name in ("stopwords_common.txt", "stopwords_domain.txt"):
        for line in _data_text(name).splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                words.add(line.lower())
    return words


class RuleLemmatizer:
    """Deterministic suffix lemmatizer: plural -s/-es/-ies, -ing, -ed.

    An exception table (word -> lemma) is consulted before any rule; the
    packaged table covers common English irregulars and can be extended or
    replaced, e.g. with a WordNet-derived table.
    """

    def __init__(self, table: dict[str, str] | None = None):
        self.table = dict(_default_exception_table()) if table is None else dict(table)

    def __call__(self, token: str) -> str:
        hit = self.table.get(token)
        if hit is not None:
            return hit
        return _apply_suffix_rules(token)


def _default_exception_table() -> dict[str, str]:
    table = {}
    for line in _data_text("lemma_exceptions.txt").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        word, lemma = line.split("\t")
        table[word] = lemma
    return table


def _ends_cvc(stem: str) -> bool:
    # consonant-vowel-consonant, final consonant not w/x/y -> restore final 'e'
    if len(stem) < 3:
        return False
    a, b, c = stem[-3], stem[-2], stem[-1]
    return a not in _VOWELS and b in _VOWELS and c not in _VOWELS and c not in "wxy"


def _strip_participle(token: str, suffix: str) -> str:
    stem = token[: -len(suffix)]
    if not any(ch in _VOWELS_Y for ch in stem):
        return token                       # "thing", "bring"
    if len(stem) >= 2 and stem[-1] == stem[-2] and stem[-1] not in _VOWELS and stem[-1] not in _KEEP_DOUBLE:
        return stem[:-1]                   # running -> run, stopped -> stop
    if _ends_cvc(stem):
        return stem + "e"                  # making -> make, loved -> love
    return stem


def _apply_suffix_rules(token: str) -> str:
    if token.endswith("ies") and len(token) >= 5:
        return token[:-3] + "y"            # ladies -> lady
    if token.endswith("sses"):
        return token[:-2]                  # classes -> class
    if token.endswith(("ches", "shes", "xes", "zes", "oes")) and len(token) >= 4:
        return token[:-2]                  # watches -> watch, heroes -> hero
    if (
        token.endswith("s")
        and len(token) >= 4
        and not token.endswith(("ss", "us", "is", "'s"))
    ):
        return token[:-1]                  # dogs -> dog
    if token.endswith("ing") and len(token) >= 5:
        return _strip_participle(token, "ing")
    if token.endswith("ied") and len(token) >= 5:
        return token[:-3] + "y"            # carried -> carry
    if token.endswith("eed") and len(token) >= 6:
        return token[:-1]                  # agreed -> agree
    if token.endswith("ed") and len(token) >= 5:
        return _strip_participle(token, "ed")
    return token


def _strip_apostrophe_suffix(token: str) -> str:
    for suffix in _APOSTROPHE_SUFFIXES:
        if token.endswith(suffix) and len(token) > len(suffix):
            return token[: -len(suffix)]
    return token


def tokenize_and_lemmatize(
    doc: SubtitleDocument,
    stopwords: set[str],
    lemmatizer: RuleLemmatizer | None = None,
) -> TokenStream:
    """Lowercase, split, lemmatize and filter a document's cue text.

    Stopwords are checked against the raw token, the token with its
    apostrophe suffix ('s, 't, 'll, ...) stripped, and the final lemma;
    lemmas shorter than 2 characters are dropped.  An empty TokenStream
    is a valid result.
    """
    if lemmatizer is None:
        lemmatizer = RuleLemmatizer()
    tokens: list[str] = []
    for raw in _TOKEN_RE.findall(doc.text.lower()):
        if raw in stopwords:
            continue
        base = _strip_apostrophe_suffix(raw)
        if base in stopwords:
            continue
        lemma = lemmatizer(base)
        if lemma in stopwords or len(lemma) < 2:
            continue
        tokens.append(lemma)
    return TokenStream(movie_id=doc.movie_id, tokens=tokens)


# --------------------------------------------------------------------------
# Bag of words
# --------------------------------------------------------------------------

def build_bow(
    streams: list[TokenStream],
    min_collection_freq: int = 5,
    max_doc_ratio: float = 0.5,
) -> tuple[Vocabulary, BowMatrix]:
    """Count terms over the collection and build the document-term matrix.

    Terms occurring fewer than min_collection_freq times in total, or in
    more than max_doc_ratio * n_docs documents, are removed.  Row order
    follows the input stream order; term indices are lexicographic.
    """
    if not streams:
        raise ValueError("build_bow requires at least one token stream")
    if not 0 < max_doc_ratio <= 1:
        raise ValueError(f"max_doc_ratio must be in (0, 1], got {max_doc_ratio}")

    n_docs = len(streams)
    per_doc = [Counter(s.tokens) for s in streams]
    collection: Counter[str] = Counter()
    doc_freq: Counter[str] = Counter()
    for counts in per_doc:
        collection.update(counts)
        doc_freq.update(counts.keys())

    kept = sorted(
        term
        for term, cf in collection.items()
        if cf >= min_collection_freq and doc_freq[term] <= max_doc_ratio * n_docs
    )
    if not kept:
        raise EmptyVocabularyError(
            f"no term survived filtering (min_collection_freq={min_collection_freq}, "
            f"max_doc_ratio={max_doc_ratio})"
        )

    term_to_index = {term: i for i, term in enumerate(kept)}
    vocab = Vocabulary(
        term_to_index=term_to_index,
        doc_freq=np.array([doc_freq[t] for t in kept], dtype=np.int64),
        collection_freq=np.array([collection[t] for t in kept], dtype=np.int64),
    )

    rows, cols, vals = [], [], []
    for d, counts in enumerate(per_doc):
        for term, count in counts.items():
            idx = term_to_index.get(term)
            if idx is not None:
                rows.append(d)
                cols.append(idx)
                vals.append(count)
    counts_matrix = sparse.csr_matrix(
        (vals, (rows, cols)), shape=(n_docs, len(kept)), dtype=np.int64
    )
    bow = BowMatrix(counts=counts_matrix, doc_ids=[s.movie_id for s in streams])
    return vocab, bow
