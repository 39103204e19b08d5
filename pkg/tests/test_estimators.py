import math

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import GridSearchCV, KFold, cross_val_score

from simbigram import CooccurrenceBigramLM, KatzBigramLM, SimilarityBigramLM
from simbigram.backoff import BackoffLM, BackoffModel
from simbigram.corpus import build_counts
from simbigram.evaluation import perplexity
from simbigram.exceptions import EmptyCorpusError
from simbigram.synth import make_class_corpus

ESTIMATORS = [KatzBigramLM, SimilarityBigramLM, CooccurrenceBigramLM]


@pytest.fixture(scope="module")
def corpus():
    return make_class_corpus(seed=1, train_sentences=600, tune_sentences=80, test_sentences=80)


@pytest.mark.parametrize("cls", ESTIMATORS)
def test_params_roundtrip(cls):
    est = cls(min_bigram_count=3)
    params = est.get_params()
    assert params["min_bigram_count"] == 3
    twin = clone(est)
    assert twin.get_params() == params
    assert twin.set_params(min_word_count=2).min_word_count == 2


@pytest.mark.parametrize("cls", ESTIMATORS)
def test_not_fitted(cls):
    with pytest.raises(NotFittedError):
        cls().prob("a", "b")


@pytest.mark.parametrize("cls", ESTIMATORS)
def test_empty_input(cls):
    with pytest.raises(EmptyCorpusError):
        cls().fit(["", "  "])
    with pytest.raises(TypeError):
        cls().fit(None)


@pytest.mark.parametrize("cls", ESTIMATORS)
def test_fit_score_consistent(cls, corpus):
    est = cls().fit(corpus.train)
    pp = est.perplexity(corpus.test)
    assert est.score(corpus.test) == pytest.approx(-math.log(pp), rel=1e-12)
    n = est.report(corpus.test).total_bigrams_scored
    assert est.score_samples(corpus.test).sum() / n == pytest.approx(est.score(corpus.test), rel=1e-9)


def test_katz_matches_library(corpus):
    est = KatzBigramLM().fit(corpus.train)
    vocab, table = build_counts(corpus.train)
    lm = BackoffLM(BackoffModel(table, vocab=vocab))
    assert est.perplexity(corpus.test) == perplexity(lm, corpus.test).overall_perplexity
    w1, w2 = corpus.train[0][:2]
    assert est.prob(w1, w2) == lm.prob(vocab.index(w1), vocab.index(w2))


def test_similarity_gamma_one_equals_katz(corpus):
    katz = KatzBigramLM().fit(corpus.train)
    sim = SimilarityBigramLM(gamma=1.0).fit(corpus.train)
    assert sim.perplexity(corpus.test) == katz.perplexity(corpus.test)


def test_similarity_neighbors(corpus):
    est = SimilarityBigramLM(k=5).fit(corpus.train)
    word = corpus.train[0][0]
    nb = est.neighbors(word)
    assert 0 < len(nb) <= 5
    assert word not in [w for w, _, _ in nb]
    assert sum(w for _, _, w in nb) == pytest.approx(1.0)


def test_cooc_interpolated(corpus):
    est = CooccurrenceBigramLM(lambdas=(0.6, 0.3, 0.1)).fit(corpus.train)
    assert est.perplexity(corpus.test) > 1.0


def test_string_input_forms():
    a = KatzBigramLM().fit("a b a b c b")
    b = KatzBigramLM().fit([["a", "b", "a", "b", "c", "b"]])
    c = KatzBigramLM().fit([b"a b a b c b"])
    assert a.counts_ == b.counts_ == c.counts_


def test_sklearn_model_selection(corpus):
    X = corpus.train[:300]
    scores = cross_val_score(SimilarityBigramLM(k=10, min_word_count=2), X,
                             cv=KFold(3, shuffle=True, random_state=0))
    assert scores.shape == (3,) and np.isfinite(scores).all()
    gs = GridSearchCV(SimilarityBigramLM(k=10, min_word_count=2), {"gamma": [0.1, 1.0]},
                      cv=KFold(3, shuffle=True, random_state=0))
    gs.fit(X)
    assert gs.best_params_["gamma"] in (0.1, 1.0)
