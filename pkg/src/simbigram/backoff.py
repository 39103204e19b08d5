"""Katz back-off with Good-Turing discounting and pluggable redistribution.

The estimator routes a bigram either to the discounted direct estimate
(seen pairs) or to ``alpha(w1) * P_r(w2 | w1)`` (unseen pairs), where
``P_r`` is any :class:`RedistributionScheme`.  The unigram scheme gives
the classic Katz model.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .corpus import CountTable, Vocabulary
from .exceptions import DegenerateDistributionError, DomainError, NotSeenError

__all__ = [
    "FreqOfFreq",
    "counts_of_counts",
    "discounted_count",
    "RedistributionScheme",
    "UnigramScheme",
    "BackoffModel",
    "BackoffLM",
]

# Normalizer denominators at or below this are treated as zero; the
# seen-sum form leaves rounding residue of order 1e-16 when no unseen
# successor has any redistribution mass.
DENOMINATOR_TOL = 1e-12


@dataclass(frozen=True)
class FreqOfFreq:
    """Counts-of-counts: ``n[c]`` is the number of bigram types seen exactly c times."""

    n: dict

    def __getitem__(self, c: int) -> int:
        return self.n.get(c, 0)

    def total(self) -> int:
        return sum(c * nc for c, nc in self.n.items())


def counts_of_counts(counts: CountTable) -> FreqOfFreq:
    return FreqOfFreq(dict(sorted(Counter(counts.bigram.values()).items())))


def discounted_count(c: int, fof: FreqOfFreq, discount_ceiling=5, fallback: bool = True) -> float:
    """Good-Turing discounted count ``(c+1) n_{c+1} / n_c``.

    Counts at or above `discount_ceiling` are left undiscounted (pass
    ``math.inf`` or None for no ceiling).  With `fallback` on, a zero
    ``n_c``/``n_{c+1}`` or a discounted value above ``c`` yields ``c``
    instead; with it off the raw formula is returned.
    """
    if c <= 0:
        raise DomainError(f"discounted count needs c >= 1, got {c}")
    if discount_ceiling is not None and c >= discount_ceiling:
        return float(c)
    nc, nc1 = fof[c], fof[c + 1]
    if nc == 0:
        if fallback:
            return float(c)
        raise DomainError(f"n_{c} is zero")
    cstar = (c + 1) * nc1 / nc
    if fallback and (nc1 == 0 or cstar > c):
        return float(c)
    return cstar


class RedistributionScheme:
    """Distribution ``P_r(w2 | w1)`` used for the unseen branch of back-off.

    Subclasses implement :meth:`row`; ``cache_key`` identifies the scheme
    in the model's normalizer cache.
    """

    cache_key: tuple = ()

    def row(self, w1: int) -> np.ndarray:
        raise NotImplementedError

    def prob(self, w1: int, w2: int) -> float:
        return float(self.row(w1)[w2])

    def mass(self, w1: int, w2s: np.ndarray) -> float:
        """Total probability of the words `w2s` given `w1`."""
        return float(self.row(w1)[w2s].sum())


class UnigramScheme(RedistributionScheme):
    """Katz redistribution: ``P_r(w2 | w1) = P(w2)``."""

    cache_key = ("katz",)

    def __init__(self, unigram_dist: np.ndarray):
        self.unigram_dist = unigram_dist

    def row(self, w1):
        return self.unigram_dist

    def prob(self, w1, w2):
        return float(self.unigram_dist[w2])

    def mass(self, w1, w2s):
        return float(self.unigram_dist[w2s].sum())


class BackoffModel:
    """Good-Turing discounted bigram model with per-word leftover mass.

    Parameters
    ----------
    counts : CountTable
    min_bigram_count : int, default 2
        Bigrams with fewer occurrences are treated as unseen; their counts
        still contribute to ``c(w1)`` and N.
    discount_ceiling : int or None, default 5
        Counts at or above this are not discounted; None means no ceiling.
    gt_fallback : bool, default True
        Use ``c* = c`` where the Good-Turing ratio is undefined or inflating.
    vocab : Vocabulary, optional
    """

    def __init__(
        self,
        counts: CountTable,
        *,
        min_bigram_count: int = 2,
        discount_ceiling=5,
        gt_fallback: bool = True,
        vocab: Vocabulary | None = None,
    ):
        if min_bigram_count < 1:
            raise ValueError("min_bigram_count must be >= 1")
        if discount_ceiling is not None and discount_ceiling < 1:
            raise ValueError("discount_ceiling must be >= 1")
        if vocab is not None and len(vocab) != counts.size:
            raise ValueError("vocabulary and count table sizes differ")
        self.counts = counts
        self.vocab = vocab
        self.min_bigram_count = min_bigram_count
        self.discount_ceiling = discount_ceiling
        self.gt_fallback = gt_fallback
        self.fof = counts_of_counts(counts)
        self.size = V = counts.size

        uni = counts.unigram.astype(np.float64)
        total = uni.sum()
        if total <= 0:
            raise DomainError("count table has no tokens")
        self.unigram_dist = uni / total
        self.unigram_dist.setflags(write=False)

        self._cstar = {
            c: discounted_count(c, self.fof, discount_ceiling, gt_fallback) for c in self.fof.n
        }
        # Seen successors per conditioning word, ids ascending.
        m = counts.matrix
        succ_ids, succ_pd, seen_cstar = [], [], np.zeros(V)
        for w1 in range(V):
            lo, hi = m.indptr[w1], m.indptr[w1 + 1]
            cols = m.indices[lo:hi]
            cs = m.data[lo:hi].astype(np.int64)
            keep = cs >= min_bigram_count
            cols, cs = cols[keep], cs[keep]
            cst = np.array([self._cstar[int(c)] for c in cs], dtype=np.float64)
            succ_ids.append(cols.astype(np.int64))
            succ_pd.append(cst / counts.unigram[w1] if cs.size else cst)
            seen_cstar[w1] = cst.sum()
        self._succ_ids = succ_ids
        self._succ_pd = succ_pd

        cw = counts.unigram.astype(np.float64)
        bt = np.ones(V)
        pos = cw > 0
        bt[pos] = (cw[pos] - seen_cstar[pos]) / cw[pos]
        self.beta_tilde = np.clip(bt, 0.0, 1.0)
        self.beta_tilde.setflags(write=False)

        self.katz = UnigramScheme(self.unigram_dist)
        self._alpha_cache: dict = {}
        self._row_cache: dict = {}
        self._katz_matrix = None
        self._pd_csc = None

    # -- structure ---------------------------------------------------------

    def count(self, w1: int) -> int:
        return int(self.counts.unigram[w1])

    def is_seen(self, w1: int, w2: int) -> bool:
        return self.counts.get(w1, w2) >= self.min_bigram_count

    def seen_successors(self, w1: int) -> tuple[np.ndarray, np.ndarray]:
        """Ids of seen successors of `w1` and their discounted probabilities."""
        return self._succ_ids[w1], self._succ_pd[w1]

    def seen_mask(self, w1: int) -> np.ndarray:
        mask = np.zeros(self.size, dtype=bool)
        mask[self._succ_ids[w1]] = True
        return mask

    def discounted(self, c: int) -> float:
        if c in self._cstar:
            return self._cstar[c]
        return discounted_count(c, self.fof, self.discount_ceiling, self.gt_fallback)

    # -- estimates ---------------------------------------------------------

    def p_unigram(self, w2: int) -> float:
        return float(self.unigram_dist[w2])

    def p_d(self, w1: int, w2: int) -> float:
        """Discounted direct estimate ``c*(w1, w2) / c(w1)`` for a seen pair."""
        cw1 = self.count(w1)
        if cw1 == 0:
            raise DomainError(f"conditioning word {w1} has zero count")
        c = self.counts.get(w1, w2)
        if c < self.min_bigram_count:
            raise NotSeenError(f"({w1}, {w2}) is not a seen bigram")
        return self._cstar[c] / cw1

    def leftover_and_alpha(self, w1: int, scheme: RedistributionScheme | None = None,
                           formulation: str = "seen") -> tuple[float, float]:
        """Leftover mass and normalizer for `w1` under `scheme`.

        ``formulation="seen"`` divides by one minus the scheme's mass on
        seen successors; ``"unseen"`` sums the scheme over every unseen
        successor instead (exhaustive, used as a cross-check).
        """
        scheme = self.katz if scheme is None else scheme
        if self.count(w1) <= 0:
            raise DomainError(f"conditioning word {w1} has zero count")
        bt = float(self.beta_tilde[w1])
        if formulation == "seen":
            key = (scheme.cache_key, w1)
            alpha = self._alpha_cache.get(key)
            if alpha is not None:
                return bt, alpha
            denom = 1.0 - scheme.mass(w1, self._succ_ids[w1])
        elif formulation == "unseen":
            row = scheme.row(w1)
            denom = float(row[~self.seen_mask(w1)].sum())
        else:
            raise ValueError(f"unknown formulation {formulation!r}")
        if bt == 0.0:
            alpha = 0.0
        elif denom <= DENOMINATOR_TOL:
            raise DegenerateDistributionError(
                f"redistribution puts all mass on seen successors of word {w1}"
            )
        else:
            alpha = bt / denom
        if formulation == "seen":
            self._alpha_cache[key] = alpha
        return bt, alpha

    def alpha(self, w1: int, scheme: RedistributionScheme | None = None) -> float:
        return self.leftover_and_alpha(w1, scheme)[1]

    def p_backoff(self, w1: int, w2: int, scheme: RedistributionScheme | None = None) -> float:
        scheme = self.katz if scheme is None else scheme
        if self.counts.unigram[w1] == 0:
            return float(self.unigram_dist[w2])
        c = self.counts.get(w1, w2)
        if c >= self.min_bigram_count:
            return self._cstar[c] / self.count(w1)
        alpha = self.alpha(w1, scheme)
        if alpha == 0.0:
            return 0.0
        return alpha * scheme.prob(w1, w2)

    def conditional_row(self, w1: int, scheme: RedistributionScheme | None = None) -> np.ndarray:
        """``P(. | w1)`` over the whole vocabulary."""
        scheme = self.katz if scheme is None else scheme
        is_katz = scheme is self.katz
        if is_katz and w1 in self._row_cache:
            return self._row_cache[w1]
        if self.counts.unigram[w1] == 0:
            row = self.unigram_dist.copy()
        else:
            alpha = self.alpha(w1, scheme)
            row = alpha * np.asarray(scheme.row(w1), dtype=np.float64)
            ids, pd = self._succ_ids[w1], self._succ_pd[w1]
            row[ids] = pd
        row.setflags(write=False)
        if is_katz:
            self._row_cache[w1] = row
        return row

    def katz_alpha_vector(self) -> np.ndarray:
        """Katz normalizers for all words; 1.0 for zero-count words (pure unigram rows)."""
        return np.array([
            self.alpha(w) if self.counts.unigram[w] > 0 else 1.0 for w in range(self.size)
        ])

    def katz_columns(self, cols) -> np.ndarray:
        """Baseline conditionals ``P(cols | w)`` for every w, shape (V, len(cols)).

        Entries agree bit-for-bit with :meth:`conditional_row`.
        """
        cols = np.asarray(cols, dtype=np.int64)
        if self._pd_csc is None:
            rows = np.concatenate([np.full(len(ids), w, dtype=np.int64)
                                   for w, ids in enumerate(self._succ_ids)])
            m = sp.csc_matrix(
                (np.concatenate(self._succ_pd), (rows, np.concatenate(self._succ_ids))),
                shape=(self.size, self.size),
            )
            m.sort_indices()
            self._pd_csc = (m, self.katz_alpha_vector())
        m, alpha = self._pd_csc
        out = np.multiply.outer(alpha, self.unigram_dist[cols])
        for i, c in enumerate(cols):
            lo, hi = m.indptr[c], m.indptr[c + 1]
            out[m.indices[lo:hi], i] = m.data[lo:hi]
        return out

    def katz_matrix(self) -> np.ndarray:
        """Dense V x V matrix of baseline Katz conditionals (cached)."""
        if self._katz_matrix is None:
            m = np.vstack([self.conditional_row(w) for w in range(self.size)])
            m.setflags(write=False)
            self._katz_matrix = m
        return self._katz_matrix


class BackoffLM:
    """Evaluator pairing a :class:`BackoffModel` with a redistribution scheme."""

    def __init__(self, model: BackoffModel, scheme: RedistributionScheme | None = None, name=None):
        self.model = model
        self.scheme = model.katz if scheme is None else scheme
        self.name = name or "+".join(map(str, self.scheme.cache_key))

    @property
    def vocabulary(self):
        return self.model.vocab

    def prob(self, w1: int, w2: int) -> float:
        return self.model.p_backoff(w1, w2, self.scheme)

    def unigram_prob(self, w: int) -> float:
        return self.model.p_unigram(w)

    def is_seen(self, w1: int, w2: int) -> bool:
        return self.model.is_seen(w1, w2)

    def row(self, w1: int) -> np.ndarray:
        return self.model.conditional_row(w1, self.scheme)

    def __repr__(self):
        return f"BackoffLM({self.name})"
