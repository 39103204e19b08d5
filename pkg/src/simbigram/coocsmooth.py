"""Cooccurrence smoothing: confusion probabilities and the smoothed bigram estimate.

All component probabilities are maximum-likelihood estimates taken from
the bigram joint ``c(w1, w2) / N``: the conditioning-word marginal is the
number of bigrams a word starts, the conditioned-word marginal the
number it ends.
"""

from __future__ import annotations

import numpy as np

from .backoff import BackoffModel, RedistributionScheme
from .corpus import CountTable
from .exceptions import ConfigError, DomainError

__all__ = [
    "CooccurrenceModel",
    "CooccurrenceScheme",
    "InterpolatedCooccurrenceLM",
    "confusion_prob",
    "p_cooc",
    "parse_lambdas",
]


class CooccurrenceModel:
    """Confusion rows ``P_C(. | w1)`` and smoothed rows ``P_S(. | w1)`` from counts."""

    def __init__(self, counts: CountTable):
        self.counts = counts
        self.matrix = counts.matrix
        self.left = counts.left_counts
        self.right = counts.right_counts
        with np.errstate(divide="ignore"):
            self._inv_right = np.where(self.right > 0, 1.0 / self.right, 0.0)
            self._inv_left = np.where(self.left > 0, 1.0 / self.left, 0.0)
        self._confusion = {}
        self._smoothed = {}

    def has_context(self, w1: int) -> bool:
        return self.left[w1] > 0

    def _check(self, w1):
        if self.left[w1] <= 0:
            raise DomainError(f"word {w1} never precedes another word; P(w1) is zero")

    def confusion_row(self, w1: int) -> np.ndarray:
        r = self._confusion.get(w1)
        if r is not None:
            return r
        self._check(w1)
        # sum_w2 c(w1,w2) c(w1',w2) / (c_right(w2) c_left(w1)), for every w1'
        x = self.matrix.getrow(w1).toarray().ravel() * self._inv_right
        r = self.matrix @ x / self.left[w1]
        r.setflags(write=False)
        self._confusion[w1] = r
        return r

    def confusion_prob(self, w1_prime: int, w1: int) -> float:
        return float(self.confusion_row(w1)[w1_prime])

    def row(self, w1: int) -> np.ndarray:
        """``P_S(. | w1) = sum_w1' P(. | w1') P_C(w1' | w1)``."""
        r = self._smoothed.get(w1)
        if r is not None:
            return r
        pc = self.confusion_row(w1)
        r = self.matrix.T @ (pc * self._inv_left)
        r.setflags(write=False)
        self._smoothed[w1] = r
        return r

    def p_cooc(self, w2: int, w1: int) -> float:
        return float(self.row(w1)[w2])

    def mle_row(self, w1: int) -> np.ndarray:
        self._check(w1)
        return self.matrix.getrow(w1).toarray().ravel() / self.left[w1]


def confusion_prob(w1_prime: int, w1: int, counts: CountTable) -> float:
    return CooccurrenceModel(counts).confusion_prob(w1_prime, w1)


def p_cooc(w2: int, w1: int, counts: CountTable) -> float:
    return CooccurrenceModel(counts).p_cooc(w2, w1)


class CooccurrenceScheme(RedistributionScheme):
    """Cooccurrence-smoothed estimate as the back-off redistribution.

    Words that never start a bigram have no confusion row and fall back to
    the unigram distribution.  `gamma` optionally mixes in the unigram
    distribution as for the similarity scheme (0 keeps pure ``P_S``).
    """

    def __init__(self, cooc: CooccurrenceModel, unigram_dist: np.ndarray, gamma: float = 0.0):
        if not 0 <= gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        self.cooc = cooc
        self.unigram_dist = unigram_dist
        self.gamma = gamma
        self.cache_key = ("cooc", gamma)
        self._rows = {}

    def row(self, w1):
        r = self._rows.get(w1)
        if r is None:
            if not self.cooc.has_context(w1):
                r = self.unigram_dist
            elif self.gamma == 0:
                r = self.cooc.row(w1)
            else:
                r = self.gamma * self.unigram_dist + (1 - self.gamma) * self.cooc.row(w1)
            self._rows[w1] = r
        return r

    @classmethod
    def from_model(cls, base: BackoffModel, gamma: float = 0.0) -> "CooccurrenceScheme":
        return cls(CooccurrenceModel(base.counts), base.unigram_dist, gamma)


def parse_lambdas(value) -> tuple[float, float, float]:
    """Parse ``"a,b,c"`` (or a 3-sequence) into interpolation weights summing to 1."""
    if isinstance(value, str):
        try:
            vals = tuple(float(x) for x in value.split(","))
        except ValueError:
            raise ConfigError(f"cannot parse lambdas {value!r}") from None
    else:
        vals = tuple(float(x) for x in value)
    if len(vals) != 3:
        raise ConfigError("exactly three lambdas are required")
    if any(v < 0 for v in vals) or abs(sum(vals) - 1.0) > 1e-9:
        raise ConfigError(f"lambdas must be nonnegative and sum to 1, got {vals}")
    return vals


class InterpolatedCooccurrenceLM:
    """Full interpolation ``l1 P_ML(w2|w1) + l2 P_S(w2|w1) + l3 P(w2)`` for every bigram.

    Weights are supplied by the caller; no EM fitting.  For a word that
    never starts a bigram the first two components are replaced by the
    unigram distribution.
    """

    def __init__(self, base: BackoffModel, lambdas=(0.5, 0.3, 0.2)):
        self.model = base
        self.lambdas = parse_lambdas(lambdas)
        self.cooc = CooccurrenceModel(base.counts)
        self.name = "cooc-interp"

    @property
    def vocabulary(self):
        return self.model.vocab

    def row(self, w1: int) -> np.ndarray:
        l1, l2, l3 = self.lambdas
        uni = self.model.unigram_dist
        if not self.cooc.has_context(w1):
            return (l1 + l2) * uni + l3 * uni
        return l1 * self.cooc.mle_row(w1) + l2 * self.cooc.row(w1) + l3 * uni

    def prob(self, w1: int, w2: int) -> float:
        l1, l2, l3 = self.lambdas
        u = self.model.unigram_dist[w2]
        if not self.cooc.has_context(w1):
            return float((l1 + l2) * u + l3 * u)
        mle = self.model.counts.get(w1, w2) / self.cooc.left[w1]
        return float(l1 * mle + l2 * self.cooc.p_cooc(w2, w1) + l3 * u)

    def unigram_prob(self, w: int) -> float:
        return self.model.p_unigram(w)

    def is_seen(self, w1: int, w2: int) -> bool:
        return self.model.is_seen(w1, w2)
