import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from simbigram.backoff import BackoffModel  # noqa: E402
from simbigram.corpus import build_counts  # noqa: E402
from simbigram.synth import random_corpus  # noqa: E402

TOY = ["a b a b c b"]


@pytest.fixture
def toy():
    return build_counts(TOY)


@pytest.fixture(scope="session")
def small_corpus():
    """~30-word random corpus, small enough for exhaustive oracles."""
    return random_corpus(np.random.default_rng(7), vocab_size=30, n_sentences=150,
                         length=(3, 10), zipf=0.8)


@pytest.fixture(scope="session")
def small_model(small_corpus):
    vocab, counts = build_counts(small_corpus)
    return BackoffModel(counts, vocab=vocab)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
