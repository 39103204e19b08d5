"""scikit-learn style estimators over the back-off bigram models.

``fit`` takes sentences (strings or token lists); ``score`` returns the
mean natural-log probability per scored bigram (the negative log
perplexity), so higher is better and the estimators work with sklearn's
model-selection tools.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_fitted, check_sentences
from .backoff import BackoffLM, BackoffModel
from .coocsmooth import CooccurrenceScheme, InterpolatedCooccurrenceLM
from .corpus import CountTable, Vocabulary, build_counts
from .evaluation import PerplexityReport, perplexity
from .simmodel import SimilarityModel, SimilarityParams

__all__ = ["KatzBigramLM", "SimilarityBigramLM", "CooccurrenceBigramLM"]


class _BigramLM(BaseEstimator):

    def fit(self, X, y=None):
        vocab, counts = build_counts(check_sentences(X), self.min_word_count)
        return self.fit_counts(vocab, counts)

    def fit_counts(self, vocab: Vocabulary, counts: CountTable):
        """Fit from an existing vocabulary and count table (e.g. a counts file)."""
        self.vocabulary_ = vocab
        self.counts_ = counts
        self.model_ = BackoffModel(
            counts,
            min_bigram_count=self.min_bigram_count,
            discount_ceiling=self.discount_ceiling,
            vocab=vocab,
        )
        self.lm_ = self._make_lm(self.model_)
        return self

    def _make_lm(self, model):
        raise NotImplementedError

    def prob(self, w1: str, w2: str) -> float:
        """P(w2 | w1) for surface words (out-of-vocabulary words map to <unk>)."""
        check_fitted(self)
        v = self.vocabulary_
        return self.lm_.prob(v.index(w1), v.index(w2))

    def report(self, X) -> PerplexityReport:
        check_fitted(self)
        return perplexity(self.lm_, check_sentences(X))

    def perplexity(self, X) -> float:
        return self.report(X).overall_perplexity

    def score_samples(self, X) -> np.ndarray:
        """Total natural-log probability of each sentence's bigrams."""
        check_fitted(self)
        out = []
        for toks in check_sentences(X):
            ids = self.vocabulary_.encode(toks)
            out.append(math.fsum(math.log(self.lm_.prob(a, b)) for a, b in zip(ids, ids[1:])))
        return np.array(out)

    def score(self, X, y=None) -> float:
        return -math.log(self.perplexity(X))


class KatzBigramLM(_BigramLM):
    """Katz back-off bigram model (Good-Turing discounting, unigram redistribution)."""

    def __init__(self, min_word_count=1, min_bigram_count=2, discount_ceiling=5):
        self.min_word_count = min_word_count
        self.min_bigram_count = min_bigram_count
        self.discount_ceiling = discount_ceiling

    def _make_lm(self, model):
        return BackoffLM(model, name="katz")


class SimilarityBigramLM(_BigramLM):
    """Back-off bigram model whose unseen mass follows KL-nearest conditioning words.

    Parameters
    ----------
    k, t, beta, gamma : neighbor count, base-10 KL threshold, weight decay
        and unigram interpolation weight.
    kl_mode : {"exact", "truncated"}
    """

    def __init__(self, k=60, t=2.5, beta=4.0, gamma=0.15, kl_mode="exact",
                 min_word_count=1, min_bigram_count=2, discount_ceiling=5):
        self.k = k
        self.t = t
        self.beta = beta
        self.gamma = gamma
        self.kl_mode = kl_mode
        self.min_word_count = min_word_count
        self.min_bigram_count = min_bigram_count
        self.discount_ceiling = discount_ceiling

    def _make_lm(self, model):
        params = SimilarityParams(self.k, self.t, self.beta, self.gamma)
        self.similarity_ = SimilarityModel(model, self.kl_mode)
        return BackoffLM(model, self.similarity_.scheme(params), name="sim")

    def neighbors(self, word: str):
        """Neighbor list of `word` as (word, distance, weight) triples."""
        check_fitted(self)
        ns = self.lm_.scheme.sim.neighbor_set(self.vocabulary_.index(word), self.lm_.scheme.params)
        return [(self.vocabulary_.word(n.word), n.distance, n.weight) for n in ns.neighbors]


class CooccurrenceBigramLM(_BigramLM):
    """Cooccurrence smoothing, either as back-off redistribution or fully interpolated.

    With ``lambdas=None`` the smoothed estimate (mixed with the unigram by
    `gamma`) redistributes the back-off mass; with three weights
    ``(l1, l2, l3)`` the model is ``l1 MLE + l2 smoothed + l3 unigram``.
    """

    def __init__(self, gamma=0.0, lambdas=None, min_word_count=1, min_bigram_count=2,
                 discount_ceiling=5):
        self.gamma = gamma
        self.lambdas = lambdas
        self.min_word_count = min_word_count
        self.min_bigram_count = min_bigram_count
        self.discount_ceiling = discount_ceiling

    def _make_lm(self, model):
        if self.lambdas is not None:
            return InterpolatedCooccurrenceLM(model, self.lambdas)
        return BackoffLM(model, CooccurrenceScheme.from_model(model, self.gamma), name="cooc")
