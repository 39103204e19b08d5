"""Random lattices and integer-cost language models for decoder tests."""

import math

import numpy as np

from simbigram.lattice import Arc, Lattice


def count_paths(lattice):
    ways = [0] * lattice.node_count
    ways[lattice.start] = 1
    for v in lattice.topological_order:
        for a in lattice.out_arcs[v]:
            ways[a.dst] += ways[v]
    return ways[lattice.end]


def random_lattice(rng, vocab_size, max_nodes=8, max_paths=200, integer_scores=False):
    """A random DAG over nodes 0..n-1 with a backbone chain, so every node is on a path."""
    while True:
        n = int(rng.integers(2, max_nodes + 1))
        arcs = []

        def score():
            return float(rng.integers(0, 3)) if integer_scores else float(rng.uniform(0, 5))

        for i in range(n - 1):
            arcs.append(Arc(i, i + 1, int(rng.integers(1, vocab_size)), score()))
        for _ in range(int(rng.integers(0, 2 * n))):
            i = int(rng.integers(0, n - 1))
            j = int(rng.integers(i + 1, n))
            arcs.append(Arc(i, j, int(rng.integers(1, vocab_size)), score()))
        lat = Lattice(n, 0, n - 1, tuple(arcs))
        if count_paths(lat) <= max_paths:
            return lat


class IntegerCostLM:
    """Evaluator whose -ln P values are small integers, so path sums are exact."""

    def __init__(self, rng, V):
        self.cost = rng.integers(0, 4, size=(V, V))
        self.ucost = rng.integers(0, 4, size=V)

    def prob(self, w1, w2):
        return math.exp(-int(self.cost[w1, w2]))

    def unigram_prob(self, w):
        return math.exp(-int(self.ucost[w]))


class RowLM:
    """Evaluator over an explicit conditional matrix."""

    def __init__(self, matrix, unigram):
        self.matrix = np.asarray(matrix)
        self.unigram = np.asarray(unigram)

    def prob(self, w1, w2):
        return float(self.matrix[w1, w2])

    def unigram_prob(self, w):
        return float(self.unigram[w])
