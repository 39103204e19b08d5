import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simbigram.corpus import (
    UNK,
    CountTable,
    Vocabulary,
    build_counts,
    count_bigrams,
    dumps_counts,
    loads_counts,
    read_sentences,
)
from simbigram.exceptions import (
    CountsParseError,
    CountsValidationError,
    EmptyCorpusError,
    IngestionError,
)


def named_bigrams(vocab, table):
    return {(vocab.word(a), vocab.word(b)): c for (a, b), c in table.bigram.items()}


def test_toy_counts(toy):
    vocab, table = toy
    assert named_bigrams(vocab, table) == {("a", "b"): 2, ("b", "a"): 1, ("b", "c"): 1, ("c", "b"): 1}
    assert table.total_bigrams == 5
    assert table.unigram[vocab.index("b")] == 3


def test_single_token_sentence():
    vocab, table = build_counts(["a"])
    assert table.total_bigrams == 0
    assert table.bigram == {}


def test_no_bigram_across_sentence_boundary():
    vocab, table = build_counts(["a b", "b a"])
    assert named_bigrams(vocab, table) == {("a", "b"): 1, ("b", "a"): 1}
    assert table.total_bigrams == 2
    assert table.get(vocab.index("b"), vocab.index("b")) == 0


@pytest.mark.parametrize("inp", [[], [""], ["   ", "\t"]])
def test_empty_corpus(inp):
    with pytest.raises(EmptyCorpusError):
        build_counts(inp)


def test_bad_utf8_names_offset():
    data = "ab cd\n".encode() + b"x\xffy\n"
    with pytest.raises(IngestionError) as exc:
        read_sentences(data)
    assert exc.value.offset == 7
    assert "7" in str(exc.value)
    with pytest.raises(IngestionError) as exc:
        build_counts([b"ok", b"\xfe"])
    assert exc.value.offset == 3


def test_tokens_verbatim():
    vocab, _ = build_counts(["The the THE"])
    assert {"The", "the", "THE"} <= set(vocab.words)


def test_min_word_count_maps_to_unk():
    vocab, table = build_counts(["a b a x y a b"], min_word_count=2)
    assert "x" not in vocab and "y" not in vocab
    assert table.unigram[vocab.unk_id] == 2
    assert table.get(vocab.index("x"), vocab.index("y")) == 1  # (unk, unk)
    assert table.total_bigrams == 6


def test_vocabulary_invariants(toy):
    vocab, _ = toy
    assert vocab.word(vocab.unk_id) == UNK
    assert all(vocab.index(w) == i for i, w in enumerate(vocab.words))
    assert vocab.index("never-seen") == vocab.unk_id
    with pytest.raises(CountsValidationError):
        Vocabulary(("a", "a"))


def test_counts_roundtrip(toy):
    vocab, table = toy
    text = dumps_counts(vocab, table)
    assert text.splitlines()[0] == "N 5"
    v2, t2 = loads_counts(text)
    assert v2 == vocab
    assert t2 == table


def test_counts_negative_rejected(toy):
    text = dumps_counts(*toy).replace("U a 2", "U a -2")
    with pytest.raises(CountsValidationError):
        loads_counts(text)


def test_counts_header_mismatch_rejected(toy):
    lines = dumps_counts(*toy).splitlines()
    lines = [("B a b 3" if ln == "B a b 2" else ln) for ln in lines]
    with pytest.raises(CountsValidationError, match="N=5"):
        loads_counts("\n".join(lines))


def test_counts_malformed_line_number(toy):
    lines = dumps_counts(*toy).splitlines()
    lines.insert(3, "U broken")
    with pytest.raises(CountsParseError) as exc:
        loads_counts("\n".join(lines))
    assert exc.value.lineno == 4


@pytest.mark.parametrize("bad", ["B a b 0", "B a zz 1", "U a 1"])
def test_counts_invariant_violations(toy, bad):
    text = dumps_counts(*toy) + bad + "\n"
    with pytest.raises((CountsValidationError, CountsParseError)):
        loads_counts(text)


def test_word_with_space_cannot_be_written():
    vocab = Vocabulary((UNK, "a b"))
    table = CountTable(np.array([0, 1]), {}, 0)
    with pytest.raises(CountsValidationError):
        dumps_counts(vocab, table)


def test_successor_sum_bounded_by_unigram(small_model):
    t = small_model.counts
    assert (t.left_counts <= t.unigram).all()


def test_sharded_counting_identical(small_corpus):
    vocab, whole = build_counts(small_corpus)
    enc = [vocab.encode(s) for s in small_corpus]
    half = len(enc) // 2
    merged = count_bigrams(enc[:half], len(vocab)).merge(count_bigrams(enc[half:], len(vocab)))
    assert merged == whole
    assert list(merged.bigram) == sorted(merged.bigram)


sentences = st.lists(st.lists(st.sampled_from("abcdef"), min_size=1, max_size=8),
                     min_size=1, max_size=12)


@given(sentences)
@settings(max_examples=60, deadline=None)
def test_total_is_sum_of_sentence_lengths(sents):
    vocab, table = build_counts(sents)
    assert table.total_bigrams == sum(len(s) - 1 for s in sents)
    assert sum(table.bigram.values()) == table.total_bigrams
    assert all(c > 0 for c in table.bigram.values())
    table.validate()


@given(sentences, st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_unk_replacement_preserves_n(sents, m):
    _, t1 = build_counts(sents)
    _, tm = build_counts(sents, min_word_count=m)
    assert tm.total_bigrams == t1.total_bigrams
    assert tm.unigram.sum() == t1.unigram.sum()


@given(sentences, st.integers(1, 3))
@settings(max_examples=60, deadline=None)
def test_roundtrip_property(sents, m):
    vocab, table = build_counts(sents, min_word_count=m)
    buf = io.StringIO()
    from simbigram.corpus import write_counts, read_counts
    write_counts(buf, vocab, table)
    buf.seek(0)
    v2, t2 = read_counts(buf)
    assert v2 == vocab and t2 == table
