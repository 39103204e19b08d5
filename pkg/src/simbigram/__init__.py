"""Bigram language models with similarity-based estimates for unseen bigrams."""

__version__ = "0.1.0"

from .backoff import BackoffLM, BackoffModel, UnigramScheme, counts_of_counts, discounted_count
from .coocsmooth import CooccurrenceModel, CooccurrenceScheme, InterpolatedCooccurrenceLM
from .corpus import CountTable, Vocabulary, build_counts, read_counts, write_counts
from .estimators import CooccurrenceBigramLM, KatzBigramLM, SimilarityBigramLM
from .evaluation import compare, grid_search, perplexity
from .lattice import Lattice, best_path, disagreement_report, parse_lattice
from .simmodel import SimilarityModel, SimilarityParams, SimilarityScheme

__all__ = [
    "BackoffLM",
    "BackoffModel",
    "UnigramScheme",
    "counts_of_counts",
    "discounted_count",
    "CooccurrenceModel",
    "CooccurrenceScheme",
    "InterpolatedCooccurrenceLM",
    "CountTable",
    "Vocabulary",
    "build_counts",
    "read_counts",
    "write_counts",
    "KatzBigramLM",
    "SimilarityBigramLM",
    "CooccurrenceBigramLM",
    "compare",
    "grid_search",
    "perplexity",
    "Lattice",
    "best_path",
    "disagreement_report",
    "parse_lattice",
    "SimilarityModel",
    "SimilarityParams",
    "SimilarityScheme",
]
