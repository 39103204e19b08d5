"""Perplexity with a seen/unseen split, model comparison and parameter grid search.

Perplexity uses natural logarithms.  A test bigram counts as unseen when
the evaluator routes it to the redistribution branch, i.e. its training
count is below the model's ``min_bigram_count``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .backoff import BackoffLM, BackoffModel
from .exceptions import ConfigError, ZeroProbabilityError
from .simmodel import SimilarityModel, SimilarityParams

__all__ = [
    "PerplexityReport",
    "Comparison",
    "GridRow",
    "GridResult",
    "encode_sentences",
    "perplexity",
    "compare",
    "reduction",
    "grid_search",
    "DEFAULT_GRID",
]

DEFAULT_GRID = {
    "k": (10, 20, 30, 40, 50, 60),
    "t": (1.5, 2.5),
    "beta": (3.5, 4.0, 4.5),
    "gamma": (0.1, 0.15, 0.2, 0.25, 0.3),
}


@dataclass(frozen=True)
class PerplexityReport:
    total_bigrams_scored: int
    unseen_bigrams: int
    unseen_fraction: float
    overall_perplexity: float
    seen_perplexity: float
    unseen_perplexity: float
    name: str = ""

    FIELDS = (
        "name", "total_bigrams_scored", "unseen_bigrams", "unseen_fraction",
        "overall_perplexity", "seen_perplexity", "unseen_perplexity",
    )

    def as_row(self) -> dict:
        return {f: getattr(self, f) for f in self.FIELDS}


def encode_sentences(sentences, vocab) -> list[list[int]]:
    """Map sentences (strings, token lists or id lists) to id lists."""
    if isinstance(sentences, str):
        sentences = [sentences]
    out = []
    for s in sentences:
        toks = s.split() if isinstance(s, str) else list(s)
        if toks and all(isinstance(t, (int, np.integer)) for t in toks):
            out.append([int(t) for t in toks])
        elif vocab is None:
            raise ConfigError("string tokens need an evaluator with a vocabulary")
        else:
            out.append(vocab.encode(toks))
    return out


def _pp(logsum: float, n: int) -> float:
    return math.exp(-logsum / n) if n else math.nan


def perplexity(evaluator, sentences, name: str | None = None) -> PerplexityReport:
    """Perplexity of `evaluator` on within-sentence bigrams of `sentences`.

    The evaluator needs ``prob(w1, w2)``, ``is_seen(w1, w2)`` and a
    ``vocabulary`` attribute (only used to encode string tokens).
    Sub-perplexities of an empty partition are NaN.
    """
    vocab = getattr(evaluator, "vocabulary", None)
    seen_terms, unseen_terms, all_terms = [], [], []
    for ids in encode_sentences(sentences, vocab):
        for w1, w2 in zip(ids[:-1], ids[1:]):
            p = evaluator.prob(w1, w2)
            if not p > 0:
                raise ZeroProbabilityError(
                    *(vocab.decode((w1, w2)) if vocab is not None else (w1, w2))
                )
            lp = math.log(p)
            all_terms.append(lp)
            (seen_terms if evaluator.is_seen(w1, w2) else unseen_terms).append(lp)
    n = len(all_terms)
    if n == 0:
        raise ConfigError("no bigrams to score")
    return PerplexityReport(
        total_bigrams_scored=n,
        unseen_bigrams=len(unseen_terms),
        unseen_fraction=len(unseen_terms) / n,
        overall_perplexity=_pp(math.fsum(all_terms), n),
        seen_perplexity=_pp(math.fsum(seen_terms), len(seen_terms)),
        unseen_perplexity=_pp(math.fsum(unseen_terms), len(unseen_terms)),
        name=name if name is not None else getattr(evaluator, "name", ""),
    )


def reduction(pp_a: float, pp_b: float) -> float:
    """Percent perplexity reduction going from model A to model B."""
    return 100.0 * (1.0 - pp_b / pp_a)


@dataclass(frozen=True)
class Comparison:
    reports: tuple
    # (i, j) -> {"overall": ..., "unseen": ...}, reduction from model i to model j
    reductions: dict = field(default_factory=dict)


def compare(evaluators: Sequence, sentences) -> Comparison:
    if len(evaluators) < 2:
        raise ConfigError("compare needs at least two models")
    vocabs = [getattr(e, "vocabulary", None) for e in evaluators]
    if any(v != vocabs[0] for v in vocabs[1:]):
        raise ConfigError("models do not share one vocabulary")
    reports = tuple(perplexity(e, sentences) for e in evaluators)
    reds = {}
    for i, j in itertools.permutations(range(len(reports)), 2):
        a, b = reports[i], reports[j]
        reds[(i, j)] = {
            "overall": reduction(a.overall_perplexity, b.overall_perplexity),
            "unseen": reduction(a.unseen_perplexity, b.unseen_perplexity),
        }
    return Comparison(reports, reds)


class GridRow(NamedTuple):
    k: int
    t: float
    beta: float
    gamma: float
    training_reduction: float
    test_reduction: float


@dataclass(frozen=True)
class GridResult:
    """Best setting per k, sorted by tuning-set ("training") reduction, descending."""

    rows: tuple
    baseline_tuning: PerplexityReport
    baseline_test: PerplexityReport
    points: tuple = ()  # every (SimilarityParams, tuning reduction) evaluated

    @property
    def best(self) -> GridRow:
        return self.rows[0]


def grid_search(base: BackoffModel, tuning, test, grid: dict | None = None,
                mode: str = "exact") -> GridResult:
    """Exhaustive search over (k, t, beta, gamma) minimizing unseen-bigram perplexity.

    Reductions are relative to the Katz model on the same counts.  For each
    k the setting with the largest tuning reduction is kept (first in grid
    order on ties) and scored on `test`.
    """
    grid = {**DEFAULT_GRID, **(grid or {})}
    for key in ("k", "t", "beta", "gamma"):
        if not len(grid[key]):
            raise ConfigError(f"empty grid for {key}")
    tuning = encode_sentences(tuning, base.vocab)
    test = encode_sentences(test, base.vocab)
    if not any(len(s) > 1 for s in tuning):
        raise ConfigError("empty tuning set")

    katz = BackoffLM(base)
    base_tune = perplexity(katz, tuning)
    base_test = perplexity(katz, test)
    if base_tune.unseen_bigrams == 0:
        raise ConfigError("tuning set has no unseen bigrams")
    sim = SimilarityModel(base, mode)

    points = []
    best: dict = {}
    for k, t, beta, gamma in itertools.product(grid["k"], grid["t"], grid["beta"], grid["gamma"]):
        params = SimilarityParams(k, t, beta, gamma)
        rep = perplexity(BackoffLM(base, sim.scheme(params)), tuning)
        red = reduction(base_tune.unseen_perplexity, rep.unseen_perplexity)
        points.append((params, red))
        if k not in best or red > best[k][1]:
            best[k] = (params, red)

    rows = []
    for params, red in best.values():
        rep = perplexity(BackoffLM(base, sim.scheme(params)), test)
        rows.append(GridRow(params.k, params.t, params.beta, params.gamma, red,
                            reduction(base_test.unseen_perplexity, rep.unseen_perplexity)))
    rows.sort(key=lambda r: -r.training_reduction)
    return GridResult(tuple(rows), base_tune, base_test, tuple(points))
