"""Synthetic data: class-structured planted bigram models, corpora and lattices.

Words are grouped into classes whose members share one successor
distribution, which is the situation where averaging over similar
conditioning words should beat the unigram redistribution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import UNK, Vocabulary
from .lattice import Arc, Lattice

__all__ = [
    "PlantedBigramModel",
    "make_planted_model",
    "ClassCorpus",
    "make_class_corpus",
    "make_lattices",
    "random_corpus",
]


@dataclass
class PlantedBigramModel:
    """A known bigram distribution over ``words`` (id 0 is an unused ``<unk>``)."""

    words: tuple
    word_class: np.ndarray   # class index per word, -1 for <unk>
    transition: np.ndarray   # V x V, rows sum to 1 (row 0 unused)
    initial: np.ndarray      # first-word distribution
    support: np.ndarray      # boolean V x V, structured (non-floor) transitions

    @property
    def vocabulary(self) -> Vocabulary:
        return Vocabulary(self.words, unk_id=0)

    def sample_sentence(self, rng: np.random.Generator, length: int) -> list[int]:
        V = len(self.words)
        w = int(rng.choice(V, p=self.initial))
        out = [w]
        for _ in range(length - 1):
            w = int(rng.choice(V, p=self.transition[w]))
            out.append(w)
        return out

    # evaluator interface, for decoding with the true distribution
    name = "planted"

    def prob(self, w1: int, w2: int) -> float:
        return float(self.transition[w1, w2])

    def unigram_prob(self, w: int) -> float:
        return float(self.initial[w])


def make_planted_model(rng: np.random.Generator, n_classes: int = 4, words_per_class: int = 25,
                       successor_classes: int = 2, floor: float = 0.01,
                       zipf: float = 1.0) -> PlantedBigramModel:
    """Random class bigram model.

    Each class moves to `successor_classes` other classes with random
    weights; within a class, words are drawn from a Zipf-like
    distribution.  A `floor` fraction of mass is spread uniformly over all
    real words so every transition has positive probability.
    """
    V = 1 + n_classes * words_per_class
    words = (UNK,) + tuple(f"c{c}w{i:02d}" for c in range(n_classes) for i in range(words_per_class))
    word_class = np.array([-1] + [c for c in range(n_classes) for _ in range(words_per_class)])

    within = np.zeros(V)
    for c in range(n_classes):
        ranks = rng.permutation(words_per_class) + 1
        w = ranks ** -zipf
        within[word_class == c] = w / w.sum()

    class_trans = np.zeros((n_classes, n_classes))
    for c in range(n_classes):
        targets = rng.choice(n_classes, size=successor_classes, replace=False)
        class_trans[c, targets] = rng.dirichlet(np.ones(successor_classes) * 2.0)

    real = word_class >= 0
    transition = np.zeros((V, V))
    structured = np.zeros((V, V))
    for c in range(n_classes):
        row = class_trans[c][word_class.clip(0)] * within * real
        structured[word_class == c] = row
    uniform = real / real.sum()
    transition[real] = (1 - floor) * structured[real] + floor * uniform
    transition[0] = uniform
    initial = uniform.copy()
    return PlantedBigramModel(words, word_class, transition, initial, structured > 0)


@dataclass
class ClassCorpus:
    model: PlantedBigramModel
    train: list      # token lists
    tune: list
    test: list
    held_out: set    # (w1, w2) id pairs removed from training


def _to_tokens(model, ids):
    return [model.words[i] for i in ids]


def make_class_corpus(seed: int = 0, n_classes: int = 4, words_per_class: int = 25,
                      train_sentences: int = 4000, tune_sentences: int = 400,
                      test_sentences: int = 400, holdout_fraction: float = 0.2,
                      length: tuple = (8, 16), **model_kw) -> ClassCorpus:
    """Sample train/tune/test text from a planted class model.

    A `holdout_fraction` of the structured bigram types is kept out of
    training: training sentences are cut wherever a held-out pair would
    occur, so that pair is never counted.  Tuning and test text come from
    the full model.
    """
    rng = np.random.default_rng(seed)
    model = make_planted_model(rng, n_classes, words_per_class, **model_kw)
    pairs = np.argwhere(model.support)
    n_hold = int(round(holdout_fraction * len(pairs)))
    pick = rng.choice(len(pairs), size=n_hold, replace=False)
    held = {(int(a), int(b)) for a, b in pairs[pick]}

    def sample(n):
        return [model.sample_sentence(rng, int(rng.integers(length[0], length[1] + 1)))
                for _ in range(n)]

    train = []
    for ids in sample(train_sentences):
        piece = [ids[0]]
        for a, b in zip(ids[:-1], ids[1:]):
            if (a, b) in held:
                train.append(piece)
                piece = []
            piece.append(b)
        train.append(piece)
    return ClassCorpus(
        model,
        [_to_tokens(model, s) for s in train],
        [_to_tokens(model, s) for s in sample(tune_sentences)],
        [_to_tokens(model, s) for s in sample(test_sentences)],
        held,
    )


def make_lattices(model: PlantedBigramModel, rng: np.random.Generator, count: int = 200,
                  length: tuple = (6, 10), margin: float = 0.5,
                  base_score: float = 1.0, vocab: Vocabulary | None = None) -> list[Lattice]:
    """Sausage lattices around sentences sampled from `model`.

    Every position gets the true word and one corrupted alternative drawn
    uniformly from the other real words; the corrupted arc's acoustic
    score is lower (better) by `margin`.  With `vocab`, word ids are
    mapped into that vocabulary (e.g. one built from training text).
    """
    real = np.flatnonzero(model.word_class >= 0)
    ids = (np.arange(len(model.words)) if vocab is None
           else np.array([vocab.index(w) for w in model.words]))
    lattices = []
    for _ in range(count):
        ref = model.sample_sentence(rng, int(rng.integers(length[0], length[1] + 1)))
        arcs = []
        for i, w in enumerate(ref):
            alt = int(rng.choice(real[real != w]))
            arcs.append(Arc(i, i + 1, int(ids[w]), base_score + margin))
            arcs.append(Arc(i, i + 1, int(ids[alt]), base_score))
        lattices.append(Lattice(len(ref) + 1, 0, len(ref), tuple(arcs),
                                tuple(int(ids[w]) for w in ref)))
    return lattices


def random_corpus(rng: np.random.Generator, vocab_size: int = 500, n_sentences: int = 2000,
                  length: tuple = (5, 20), zipf: float = 1.1) -> list[list[str]]:
    """Unstructured Zipf-distributed text over ``vocab_size`` word types."""
    ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
    p = ranks ** -zipf
    p /= p.sum()
    words = [f"w{i}" for i in range(vocab_size)]
    out = []
    for _ in range(n_sentences):
        n = int(rng.integers(length[0], length[1] + 1))
        out.append([words[i] for i in rng.choice(vocab_size, size=n, p=p)])
    return out
