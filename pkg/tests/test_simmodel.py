import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import BruteKatz, BruteSimilarity
from simbigram.backoff import BackoffModel
from simbigram.corpus import build_counts
from simbigram.exceptions import DegenerateDistributionError, DomainError, NoNeighborsError
from simbigram.simmodel import (
    Neighbor,
    NeighborSet,
    SimilarityModel,
    SimilarityParams,
    kl_distance,
    neighbor_set,
    p_r_similarity,
    p_sim,
    p_similarity_backoff,
)

from conftest import TOY


@pytest.fixture
def toy1():
    vocab, table = build_counts(TOY)
    return vocab, BackoffModel(table, vocab=vocab, min_bigram_count=1)


@pytest.mark.parametrize("kw", [dict(k=0), dict(k=1.5), dict(t=0), dict(beta=-1),
                                dict(gamma=1.5), dict(gamma=-0.1)])
def test_params_validation(kw):
    with pytest.raises(ValueError):
        SimilarityParams(**kw)


def test_bad_mode(small_model):
    with pytest.raises(ValueError):
        SimilarityModel(small_model, mode="approx")


def test_toy_kl_closed_form(toy1):
    vocab, m = toy1
    a, c = vocab.index("a"), vocab.index("c")
    # P(.|a) is a point mass on b; P(b|c) = 2/3
    assert kl_distance(a, c, m) == pytest.approx(math.log10(1.5), abs=1e-15)
    # P(.|a) has zeros where P(.|c) does not
    assert kl_distance(c, a, m) == math.inf


def test_toy_kl_default_threshold():
    vocab, table = build_counts(TOY)
    m = BackoffModel(table, vocab=vocab)
    # only (a, b) is seen; P(.|c) is the unigram distribution, P(b) = 1/2
    assert kl_distance(vocab.index("a"), vocab.index("c"), m) == pytest.approx(math.log10(2), abs=1e-15)
    # b and c both fall back entirely to the unigram distribution
    assert kl_distance(vocab.index("b"), vocab.index("c"), m) == 0.0


@pytest.mark.parametrize("mode", ["exact", "truncated"])
def test_self_distance_zero(small_model, mode):
    sim = SimilarityModel(small_model, mode)
    for w in range(1, small_model.size):
        assert sim.kl_distance(w, w) == 0.0


def test_zero_count_domain_error(small_model):
    sim = SimilarityModel(small_model)
    with pytest.raises(DomainError):
        sim.kl_distance(0, 1)
    with pytest.raises(DomainError):
        sim.kl_distance(1, 0)


def test_exact_distances_match_brute_force(small_corpus, small_model):
    brute = BruteSimilarity(BruteKatz(small_corpus, small_model.vocab.words), 5, 2.5, 4.0, 0.15)
    sim = SimilarityModel(small_model)
    words = small_model.vocab.words
    for i in range(1, small_model.size):
        for j in range(1, small_model.size):
            expect = max(brute.distance(words[i], words[j]), 0.0)
            assert sim.kl_distance(i, j) == pytest.approx(expect, rel=1e-9, abs=1e-12)


def test_truncated_sums_over_observed_successors(small_model):
    sim = SimilarityModel(small_model, "truncated")
    m = small_model.counts.matrix
    for w in (1, 2, 5):
        p = small_model.conditional_row(w)
        succ = m.indices[m.indptr[w]:m.indptr[w + 1]]
        for v in (3, 4, 6):
            q = small_model.conditional_row(v)
            raw = sum(p[s] * math.log10(p[s] / q[s]) for s in succ)
            assert sim.kl_distance(w, v) == pytest.approx(max(raw, 0.0), rel=1e-9, abs=1e-12)


def test_neighbors_match_brute_force(small_corpus, small_model):
    for k, t, beta in [(5, 2.5, 4.0), (3, 0.5, 0.0), (60, 10.0, 3.5)]:
        brute = BruteSimilarity(BruteKatz(small_corpus, small_model.vocab.words), k, t, beta, 0.15)
        params = SimilarityParams(k, t, beta, 0.15)
        sim = SimilarityModel(small_model)
        for w in range(1, small_model.size):
            got = sim.neighbor_set(w, params)
            want = brute.neighbors(small_model.vocab.word(w))
            assert [small_model.vocab.word(n.word) for n in got.neighbors] == [x[0] for x in want]
            np.testing.assert_allclose(got.weights, [x[2] for x in want], rtol=1e-9)


def test_toy_two_nearest():
    vocab, table = build_counts(TOY)
    m = BackoffModel(table, vocab=vocab)
    ns = neighbor_set(vocab.index("a"), SimilarityParams(k=2, t=100.0), m)
    # D(a||b) = D(a||c) = log10 2; tie broken by id
    assert [n.word for n in ns.neighbors] == [vocab.index("b"), vocab.index("c")]
    assert ns.weights.tolist() == [0.5, 0.5]


def test_neighbor_set_invariants(small_model):
    params = SimilarityParams(k=7, t=1.0, beta=4.0)
    sim = SimilarityModel(small_model)
    for w in range(1, small_model.size):
        ns = sim.neighbor_set(w, params)
        d = [n.distance for n in ns.neighbors]
        assert w not in ns.ids
        assert len(ns) <= 7
        assert all(x < 1.0 for x in d)
        assert d == sorted(d)
        if len(ns):
            assert (ns.weights > 0).all()
            assert ns.weights.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(np.diff(ns.weights) <= 0)


def test_beta_zero_equal_weights(small_model):
    ns = SimilarityModel(small_model).neighbor_set(3, SimilarityParams(k=5, t=5.0, beta=0.0))
    assert len(ns) > 1
    np.testing.assert_allclose(ns.weights, 1.0 / len(ns), rtol=0, atol=1e-15)


def test_strictly_decaying_weights(small_model):
    ns = SimilarityModel(small_model).neighbor_set(3, SimilarityParams(k=10, t=5.0, beta=4.0))
    for a, b in zip(ns.neighbors, ns.neighbors[1:]):
        if a.distance < b.distance:
            assert a.weight > b.weight


def test_neighbor_set_deterministic(small_corpus):
    params = SimilarityParams(k=5)
    sets = []
    for _ in range(2):
        vocab, table = build_counts(small_corpus)
        sets.append([SimilarityModel(BackoffModel(table)).neighbor_set(w, params)
                     for w in range(1, len(vocab))])
    assert sets[0] == sets[1]


def test_empty_neighbor_set(small_model):
    sim = SimilarityModel(small_model)
    ns = sim.neighbor_set(2, SimilarityParams(t=1e-12))
    assert len(ns) == 0
    with pytest.raises(NoNeighborsError):
        sim.p_sim(0, ns)
    sch = sim.scheme(SimilarityParams(t=1e-12, gamma=0.0))
    np.testing.assert_array_equal(sch.row(2), small_model.unigram_dist)


def test_singleton_neighbor(small_model):
    ns = NeighborSet(1, (Neighbor(4, 0.3, 1.0),))
    for w2 in range(small_model.size):
        assert p_sim(w2, ns, small_model) == small_model.p_backoff(4, w2)


def test_equal_weights_arithmetic_mean(small_model):
    ns = NeighborSet(1, (Neighbor(3, 0.1, 0.5), Neighbor(5, 0.1, 0.5)))
    expect = (small_model.conditional_row(3) + small_model.conditional_row(5)) / 2
    np.testing.assert_allclose(SimilarityModel(small_model).sim_row(ns), expect, rtol=1e-15)


def test_gamma_endpoints(small_model):
    sim = SimilarityModel(small_model)
    one = sim.scheme(SimilarityParams(gamma=1.0))
    for w in range(small_model.size):
        np.testing.assert_array_equal(one.row(w), small_model.unigram_dist)
    zero = sim.scheme(SimilarityParams(k=1, t=10.0, gamma=0.0))
    for w in range(1, 6):
        (nb,) = sim.neighbor_set(w, zero.params).neighbors
        np.testing.assert_array_equal(zero.row(w), small_model.conditional_row(nb.word))


def test_p_r_matches_composed_oracle(small_corpus, small_model):
    brute = BruteSimilarity(BruteKatz(small_corpus, small_model.vocab.words), 10, 2.5, 4.0, 0.15)
    params = SimilarityParams(10, 2.5, 4.0, 0.15)
    words = small_model.vocab.words
    for i in range(small_model.size):
        if small_model.count(i) == 0:
            continue
        for j in range(small_model.size):
            assert p_r_similarity(j, i, params, small_model) == pytest.approx(
                brute.p_r(words[i], words[j]), rel=1e-9, abs=1e-15)


def test_full_estimator_matches_oracle(small_corpus, small_model):
    bk = BruteKatz(small_corpus, small_model.vocab.words)
    brute = BruteSimilarity(bk, 10, 2.5, 4.0, 0.15)
    pr = lambda a, b: brute.p_r(a, b)  # noqa: E731
    params = SimilarityParams(10, 2.5, 4.0, 0.15)
    words = small_model.vocab.words
    for i in range(1, 8):
        for j in range(small_model.size):
            assert p_similarity_backoff(i, j, params, small_model) == pytest.approx(
                bk.prob(words[i], words[j], pr), rel=1e-9, abs=1e-15)


def test_seen_branch_shared(small_model):
    params = SimilarityParams()
    for (w1, w2), c in small_model.counts.bigram.items():
        if small_model.is_seen(w1, w2):
            assert p_similarity_backoff(w1, w2, params, small_model) == small_model.p_backoff(w1, w2)


@pytest.mark.parametrize("mode", ["exact", "truncated"])
def test_sim_rows_normalized(small_model, mode):
    sim = SimilarityModel(small_model, mode)
    for params in (SimilarityParams(), SimilarityParams(k=3, t=0.8, beta=0.0, gamma=0.0)):
        sch = sim.scheme(params)
        for w in range(small_model.size):
            assert math.fsum(sch.row(w)) == pytest.approx(1.0, abs=1e-9)
            assert math.fsum(small_model.conditional_row(w, sch)) == pytest.approx(1.0, abs=1e-9)


def test_toy_full_estimator_normalized(toy1):
    _, m = toy1
    params = SimilarityParams(gamma=0.15)
    for w1 in range(m.size):
        assert math.fsum(p_similarity_backoff(w1, w2, params, m)
                         for w2 in range(m.size)) == pytest.approx(1.0, abs=1e-6)


def test_gamma_one_collapse(small_model):
    sch = SimilarityModel(small_model).scheme(SimilarityParams(gamma=1.0))
    for w in range(small_model.size):
        np.testing.assert_array_equal(small_model.conditional_row(w, sch),
                                      small_model.conditional_row(w))


def test_scheme_cache_keys_distinct(small_model):
    sim = SimilarityModel(small_model)
    keys = {sim.scheme(SimilarityParams(gamma=g)).cache_key for g in (0.1, 0.2)}
    keys.add(SimilarityModel(small_model, "truncated").scheme(SimilarityParams(gamma=0.1)).cache_key)
    keys.add(small_model.katz.cache_key)
    assert len(keys) == 4


corpora = st.lists(st.lists(st.sampled_from("abcdefgh"), min_size=2, max_size=10),
                   min_size=2, max_size=25)


@given(corpora, st.integers(1, 3), st.floats(0.1, 5.0), st.floats(0.0, 6.0))
@settings(max_examples=60, deadline=None)
def test_exact_kl_nonnegative_and_identity(sents, mbc, t, beta):
    _, table = build_counts(sents)
    m = BackoffModel(table, min_bigram_count=mbc)
    try:
        m.katz_matrix()
    except DegenerateDistributionError:
        assume(False)  # every positive-probability word already follows some w1
    sim = SimilarityModel(m)
    words = [w for w in range(m.size) if m.count(w) > 0]
    for w in words:
        for v in words:
            d = sim.kl_distance(w, v)
            assert d >= 0.0
            if np.array_equal(m.conditional_row(w), m.conditional_row(v)):
                assert d == 0.0
        ns = sim.neighbor_set(w, SimilarityParams(k=3, t=t, beta=beta))
        if len(ns):
            assert ns.weights.sum() == pytest.approx(1.0, abs=1e-9)
