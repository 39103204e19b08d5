"""Similarity-based redistribution for unseen bigrams.

Conditioning words are compared by the KL distance between their
baseline (Katz) successor distributions.  For each word the closest
others within a distance threshold form its neighbor set; their
conditionals are averaged with weights ``10 ** (-beta * D)`` and the
average is interpolated with the unigram distribution to give ``P_r``.

Distances and weights use base-10 logarithms and exponentials.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .backoff import BackoffModel, RedistributionScheme
from .exceptions import DomainError, NoNeighborsError

__all__ = [
    "SimilarityParams",
    "Neighbor",
    "NeighborSet",
    "SimilarityModel",
    "SimilarityScheme",
    "kl_distance",
    "neighbor_set",
    "p_sim",
    "p_r_similarity",
    "p_similarity_backoff",
]

KL_MODES = ("exact", "truncated")


@dataclass(frozen=True)
class SimilarityParams:
    """Neighbor count `k`, distance threshold `t`, weight decay `beta`, unigram weight `gamma`."""

    k: int = 60
    t: float = 2.5
    beta: float = 4.0
    gamma: float = 0.15

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"k must be a positive integer, got {self.k}")
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if not 0 <= self.gamma <= 1:
            raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")


class Neighbor(NamedTuple):
    word: int
    distance: float
    weight: float


@dataclass(frozen=True)
class NeighborSet:
    center: int
    neighbors: tuple

    def __len__(self):
        return len(self.neighbors)

    @property
    def ids(self) -> np.ndarray:
        return np.array([n.word for n in self.neighbors], dtype=np.int64)

    @property
    def weights(self) -> np.ndarray:
        return np.array([n.weight for n in self.neighbors], dtype=np.float64)


def _kl_terms(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise sum of ``p * log10(p / q)`` over the columns; q is 2-D."""
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = np.log10(p)[None, :] - np.log10(q)
    return diff @ p


class SimilarityModel:
    """Distance and neighbor computations over a baseline back-off model.

    One instance can serve many parameter settings: distance rows and
    neighbor sets are cached per conditioning word.

    Parameters
    ----------
    base : BackoffModel
        Supplies the baseline conditional estimates.
    mode : {"exact", "truncated"}
        ``exact`` sums over the whole vocabulary; ``truncated`` sums over
        the observed successors of the first word only and clamps at 0.
    """

    def __init__(self, base: BackoffModel, mode: str = "exact"):
        if mode not in KL_MODES:
            raise ValueError(f"mode must be one of {KL_MODES}, got {mode!r}")
        self.base = base
        self.mode = mode
        self.candidates = base.counts.unigram > 0
        self._dist = {}
        self._neighbors = {}

    def distances(self, w1: int) -> np.ndarray:
        """``D(w1 || w)`` for every word w; ``inf`` for words without counts."""
        d = self._dist.get(w1)
        if d is not None:
            return d
        if not self.candidates[w1]:
            raise DomainError(f"conditioning word {w1} has zero count")
        p_row = self.base.conditional_row(w1)
        if self.mode == "exact":
            support = np.flatnonzero(p_row > 0)
            q = self.base.katz_matrix()[:, support]
        else:
            m = self.base.counts.matrix
            support = m.indices[m.indptr[w1]:m.indptr[w1 + 1]]
            support = support[p_row[support] > 0]
            q = self.base.katz_columns(support)
        p = p_row[support]
        d = _kl_terms(p, q)
        # Gibbs' inequality makes exact-mode values nonnegative; the clamp
        # removes rounding noise there and truncation artefacts otherwise.
        d = np.maximum(d, 0.0)
        d[~self.candidates] = np.inf
        d[w1] = 0.0
        d.setflags(write=False)
        self._dist[w1] = d
        return d

    def kl_distance(self, w1: int, w1_prime: int) -> float:
        if not self.candidates[w1_prime]:
            raise DomainError(f"conditioning word {w1_prime} has zero count")
        return float(self.distances(w1)[w1_prime])

    def neighbor_set(self, w1: int, params: SimilarityParams) -> NeighborSet:
        key = (w1, params.k, params.t, params.beta)
        ns = self._neighbors.get(key)
        if ns is not None:
            return ns
        d = self.distances(w1)
        ids = np.flatnonzero(d < params.t)
        ids = ids[ids != w1]
        order = np.lexsort((ids, d[ids]))
        ids = ids[order][: params.k]
        dist = d[ids]
        if ids.size:
            # Shifting by the smallest distance leaves normalized weights unchanged
            # and keeps large beta * D from underflowing.
            w = np.power(10.0, -params.beta * (dist - dist[0]))
            w = w / w.sum()
        else:
            w = dist
        ns = NeighborSet(
            w1, tuple(Neighbor(int(i), float(x), float(y)) for i, x, y in zip(ids, dist, w))
        )
        self._neighbors[key] = ns
        return ns

    def sim_row(self, ns: NeighborSet) -> np.ndarray:
        """Weighted average of the neighbors' baseline conditionals."""
        if not len(ns):
            raise NoNeighborsError(f"word {ns.center} has no neighbors")
        rows = np.vstack([self.base.conditional_row(n.word) for n in ns.neighbors])
        return ns.weights @ rows

    def p_sim(self, w2: int, ns: NeighborSet) -> float:
        return float(self.sim_row(ns)[w2])

    def scheme(self, params: SimilarityParams) -> "SimilarityScheme":
        return SimilarityScheme(self, params)


class SimilarityScheme(RedistributionScheme):
    """``P_r(w2|w1) = gamma P(w2) + (1 - gamma) P_SIM(w2|w1)``.

    Falls back to ``P(w2)`` when `w1` has no neighbors or no counts.
    """

    def __init__(self, sim: SimilarityModel, params: SimilarityParams):
        self.sim = sim
        self.params = params
        self.cache_key = ("sim", params.k, params.t, params.beta, params.gamma, sim.mode)
        self._rows = {}

    def row(self, w1: int) -> np.ndarray:
        r = self._rows.get(w1)
        if r is not None:
            return r
        uni = self.sim.base.unigram_dist
        if not self.sim.candidates[w1]:
            r = uni
        else:
            ns = self.sim.neighbor_set(w1, self.params)
            if not len(ns):
                r = uni
            else:
                g = self.params.gamma
                r = g * uni + (1.0 - g) * self.sim.sim_row(ns)
                r.setflags(write=False)
        self._rows[w1] = r
        return r


_engines: "weakref.WeakKeyDictionary[BackoffModel, dict]" = weakref.WeakKeyDictionary()


def _engine(base: BackoffModel, mode: str = "exact") -> SimilarityModel:
    per_base = _engines.setdefault(base, {})
    if mode not in per_base:
        per_base[mode] = SimilarityModel(base, mode)
    return per_base[mode]


def kl_distance(w1: int, w1_prime: int, base: BackoffModel, mode: str = "exact") -> float:
    """Base-10 KL distance between the baseline conditionals of two words."""
    return _engine(base, mode).kl_distance(w1, w1_prime)


def neighbor_set(w1: int, params: SimilarityParams, base: BackoffModel,
                 mode: str = "exact") -> NeighborSet:
    return _engine(base, mode).neighbor_set(w1, params)


def p_sim(w2: int, ns: NeighborSet, base: BackoffModel) -> float:
    return _engine(base).p_sim(w2, ns)


def p_r_similarity(w2: int, w1: int, params: SimilarityParams, base: BackoffModel,
                   mode: str = "exact") -> float:
    return _engine(base, mode).scheme(params).prob(w1, w2)


def p_similarity_backoff(w1: int, w2: int, params: SimilarityParams, base: BackoffModel,
                         mode: str = "exact") -> float:
    """Full back-off estimate with the similarity scheme on the unseen branch."""
    return base.p_backoff(w1, w2, _engine(base, mode).scheme(params))
