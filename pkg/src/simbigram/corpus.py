"""Corpus ingestion, vocabulary construction and sparse bigram counting.

Sentences are the unit of counting: bigrams are adjacent token pairs
inside one sentence, and no pair is formed across a sentence boundary.
No begin/end pseudo-tokens are added and tokens are taken verbatim
(whitespace splitting only, no case folding).
"""

from __future__ import annotations

import io
import re
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp

from .exceptions import (
    CountsParseError,
    CountsValidationError,
    EmptyCorpusError,
    IngestionError,
)

__all__ = [
    "UNK",
    "Vocabulary",
    "CountTable",
    "build_vocabulary",
    "build_counts",
    "count_bigrams",
    "read_sentences",
    "tokenize",
    "write_counts",
    "read_counts",
    "dumps_counts",
    "loads_counts",
]

UNK = "<unk>"

_WS = re.compile(r"\s")


@dataclass(frozen=True)
class Vocabulary:
    """Bidirectional word <-> dense integer id map with an unknown-word sentinel."""

    words: tuple[str, ...]
    unk_id: int = 0
    ids: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        words = tuple(self.words)
        object.__setattr__(self, "words", words)
        ids = {w: i for i, w in enumerate(words)}
        if len(ids) != len(words):
            raise CountsValidationError("duplicate word in vocabulary")
        if not 0 <= self.unk_id < len(words):
            raise CountsValidationError(f"unk_id {self.unk_id} out of range")
        object.__setattr__(self, "ids", ids)

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self.ids

    def index(self, word: str) -> int:
        """Id of `word`, or ``unk_id`` when it is out of vocabulary."""
        return self.ids.get(word, self.unk_id)

    def word(self, i: int) -> str:
        return self.words[i]

    def encode(self, tokens: Iterable[str]) -> list[int]:
        return [self.ids.get(t, self.unk_id) for t in tokens]

    def decode(self, ids: Iterable[int]) -> list[str]:
        return [self.words[i] for i in ids]

    @property
    def unk(self) -> str:
        return self.words[self.unk_id]


@dataclass(frozen=True)
class CountTable:
    """Unigram counts, sparse bigram counts and the total bigram count N.

    ``bigram`` maps ``(w1, w2)`` id pairs to positive counts.  Tables are
    treated as immutable once built.
    """

    unigram: np.ndarray
    bigram: dict
    total_bigrams: int

    def __post_init__(self):
        uni = np.asarray(self.unigram, dtype=np.int64)
        uni.setflags(write=False)
        object.__setattr__(self, "unigram", uni)

    @property
    def size(self) -> int:
        return len(self.unigram)

    def get(self, w1: int, w2: int) -> int:
        return self.bigram.get((w1, w2), 0)

    def validate(self) -> "CountTable":
        """Check the table invariants; raise ``CountsValidationError`` on failure."""
        V = self.size
        if (self.unigram < 0).any():
            raise CountsValidationError("negative unigram count")
        total = 0
        left = np.zeros(V, dtype=np.int64)
        for (w1, w2), c in self.bigram.items():
            if not (0 <= w1 < V and 0 <= w2 < V):
                raise CountsValidationError(f"bigram ({w1}, {w2}) references unknown id")
            if c < 0:
                raise CountsValidationError(f"negative count for bigram ({w1}, {w2})")
            if c == 0:
                raise CountsValidationError(f"zero count stored for bigram ({w1}, {w2})")
            total += c
            left[w1] += c
        if total != self.total_bigrams:
            raise CountsValidationError(
                f"N={self.total_bigrams} disagrees with sum of bigram counts {total}"
            )
        bad = np.flatnonzero(left > self.unigram)
        if bad.size:
            raise CountsValidationError(
                f"bigram counts starting with id {bad[0]} exceed its unigram count"
            )
        return self

    def merge(self, other: "CountTable") -> "CountTable":
        """Sum two tables over the same vocabulary (used for sharded counting)."""
        if other.size != self.size:
            raise CountsValidationError("cannot merge tables over different vocabularies")
        bigram = dict(self.bigram)
        for key, c in other.bigram.items():
            bigram[key] = bigram.get(key, 0) + c
        return CountTable(
            self.unigram + other.unigram, dict(sorted(bigram.items())), self.total_bigrams + other.total_bigrams
        )

    def __eq__(self, other):
        if not isinstance(other, CountTable):
            return NotImplemented
        return (
            self.total_bigrams == other.total_bigrams
            and np.array_equal(self.unigram, other.unigram)
            and self.bigram == other.bigram
        )

    __hash__ = None

    @cached_property
    def matrix(self) -> sp.csr_matrix:
        """Bigram counts as a V x V CSR matrix (rows: w1, columns: w2)."""
        V = self.size
        if not self.bigram:
            return sp.csr_matrix((V, V), dtype=np.float64)
        keys = np.array(list(self.bigram.keys()), dtype=np.int64)
        vals = np.fromiter(self.bigram.values(), dtype=np.float64, count=len(self.bigram))
        m = sp.csr_matrix((vals, (keys[:, 0], keys[:, 1])), shape=(V, V))
        m.sort_indices()
        return m

    @cached_property
    def left_counts(self) -> np.ndarray:
        """Number of bigrams starting with each word (sum over w2 of c(w1, w2))."""
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    @cached_property
    def right_counts(self) -> np.ndarray:
        """Number of bigrams ending with each word."""
        return np.asarray(self.matrix.sum(axis=0)).ravel()


def tokenize(sentence) -> list[str]:
    if isinstance(sentence, str):
        return sentence.split()
    return [str(t) for t in sentence]


def _decode(data: bytes, base_offset: int = 0) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise IngestionError(base_offset + e.start) from None


def read_sentences(source) -> list[list[str]]:
    """Read one sentence per line from a path, bytes, or binary/text file object.

    Blank lines are skipped.  Undecodable input raises ``IngestionError``
    naming the byte offset of the first bad byte.
    """
    if isinstance(source, (bytes, bytearray)):
        text = _decode(bytes(source))
    elif isinstance(source, (str,)) or hasattr(source, "__fspath__"):
        with open(source, "rb") as f:
            text = _decode(f.read())
    else:
        data = source.read()
        text = _decode(data) if isinstance(data, bytes) else data
    return [toks for toks in (line.split() for line in text.splitlines()) if toks]


def _normalize(sentences) -> list[list[str]]:
    if isinstance(sentences, (str, bytes)):
        sentences = [sentences]
    out = []
    offset = 0
    for s in sentences:
        if isinstance(s, (bytes, bytearray)):
            text = _decode(bytes(s), offset)
            offset += len(s) + 1
            out.append(text.split())
        else:
            toks = tokenize(s)
            offset += len(" ".join(toks).encode("utf-8")) + 1
            out.append(toks)
    return out


def build_vocabulary(sentences: Sequence[Sequence[str]], min_word_count: int = 1) -> Vocabulary:
    """Closed vocabulary: ``<unk>`` at id 0, then kept words in first-seen order."""
    if min_word_count < 1:
        raise ValueError("min_word_count must be >= 1")
    freq = Counter(t for s in sentences for t in s)
    words = [UNK]
    seen = {UNK}
    for s in sentences:
        for t in s:
            if t not in seen and freq[t] >= min_word_count:
                seen.add(t)
                words.append(t)
    return Vocabulary(tuple(words), unk_id=0)


def count_bigrams(encoded: Iterable[Sequence[int]], vocab_size: int) -> CountTable:
    """Count unigrams and within-sentence bigrams of id sequences."""
    unigram = np.zeros(vocab_size, dtype=np.int64)
    pairs = Counter()
    for ids in encoded:
        if not len(ids):
            continue
        np.add.at(unigram, np.asarray(ids, dtype=np.int64), 1)
        pairs.update(zip(ids[:-1], ids[1:]))
    bigram = {(int(a), int(b)): int(c) for (a, b), c in sorted(pairs.items())}
    return CountTable(unigram, bigram, int(sum(bigram.values())))


def build_counts(sentences, min_word_count: int = 1) -> tuple[Vocabulary, CountTable]:
    """Build the vocabulary and count table from sentence-delimited text.

    Parameters
    ----------
    sentences : iterable
        Each element is one sentence: a whitespace-separated string, UTF-8
        bytes, or a sequence of token strings.
    min_word_count : int
        Words with corpus frequency below this map to ``<unk>``.
    """
    sents = [s for s in _normalize(sentences) if s]
    if not sents:
        raise EmptyCorpusError("empty corpus")
    vocab = build_vocabulary(sents, min_word_count)
    table = count_bigrams((vocab.encode(s) for s in sents), len(vocab))
    return vocab, table


# -- counts file ------------------------------------------------------------


def write_counts(fp, vocab: Vocabulary, table: CountTable) -> None:
    """Write ``N``/``U``/``B`` lines to a text stream."""
    if len(vocab) != table.size:
        raise CountsValidationError("vocabulary and count table sizes differ")
    for w in vocab.words:
        if not w or _WS.search(w):
            raise CountsValidationError(f"word {w!r} is empty or contains whitespace")
    fp.write(f"N {table.total_bigrams}\n")
    for w, c in zip(vocab.words, table.unigram):
        fp.write(f"U {w} {int(c)}\n")
    for (w1, w2), c in sorted(table.bigram.items()):
        fp.write(f"B {vocab.words[w1]} {vocab.words[w2]} {c}\n")


def dumps_counts(vocab: Vocabulary, table: CountTable) -> str:
    buf = io.StringIO()
    write_counts(buf, vocab, table)
    return buf.getvalue()


def _parse_int(tok, lineno):
    try:
        return int(tok)
    except ValueError:
        raise CountsParseError(lineno, f"expected integer count, got {tok!r}") from None


def read_counts(fp) -> tuple[Vocabulary, CountTable]:
    """Parse a counts file and validate the resulting table.

    Raises ``CountsParseError`` (with line number) on malformed lines and
    ``CountsValidationError`` when the counts break table invariants.
    """
    total = None
    words: list[str] = []
    unigram: list[int] = []
    ids: dict[str, int] = {}
    raw_bigrams: list[tuple[int, str, str, int]] = []
    for lineno, line in enumerate(fp, start=1):
        if isinstance(line, bytes):
            line = line.decode("utf-8")
        line = line.rstrip("\n")
        if not line.strip():
            continue
        parts = line.split(" ")
        tag = parts[0]
        if tag == "N" and len(parts) == 2:
            if total is not None:
                raise CountsParseError(lineno, "duplicate N header")
            total = _parse_int(parts[1], lineno)
        elif tag == "U" and len(parts) == 3:
            w = parts[1]
            if w in ids:
                raise CountsValidationError(f"duplicate unigram line for {w!r} (line {lineno})")
            ids[w] = len(words)
            words.append(w)
            unigram.append(_parse_int(parts[2], lineno))
        elif tag == "B" and len(parts) == 4:
            raw_bigrams.append((lineno, parts[1], parts[2], _parse_int(parts[3], lineno)))
        else:
            raise CountsParseError(lineno, f"malformed line {line!r}")
    if total is None:
        raise CountsParseError(0, "missing N header")
    if UNK not in ids:
        words.insert(0, UNK)
        unigram.insert(0, 0)
        ids = {w: i for i, w in enumerate(words)}
    bigram = {}
    for lineno, a, b, c in raw_bigrams:
        if a not in ids or b not in ids:
            raise CountsValidationError(f"bigram on line {lineno} uses a word with no U line")
        key = (ids[a], ids[b])
        if key in bigram:
            raise CountsValidationError(f"duplicate bigram line {lineno}")
        bigram[key] = c
    if any(c < 0 for c in unigram):
        raise CountsValidationError("negative unigram count")
    vocab = Vocabulary(tuple(words), unk_id=ids[UNK])
    table = CountTable(np.array(unigram, dtype=np.int64), dict(sorted(bigram.items())), total)
    table.validate()
    return vocab, table


def loads_counts(text: str) -> tuple[Vocabulary, CountTable]:
    return read_counts(io.StringIO(text))
