"""Input checks shared by the estimators."""

from __future__ import annotations

from sklearn.exceptions import NotFittedError

from .exceptions import EmptyCorpusError


def check_sentences(X, allow_empty: bool = False) -> list[list[str]]:
    """Coerce `X` to a list of token lists.

    Accepts one string (one sentence), an iterable of whitespace-separated
    strings, or an iterable of token sequences.
    """
    if X is None:
        raise TypeError("expected text, got None")
    if isinstance(X, bytes):
        X = X.decode("utf-8")
    if isinstance(X, str):
        X = X.splitlines() or [X]
    out = []
    for s in X:
        if isinstance(s, bytes):
            s = s.decode("utf-8")
        toks = s.split() if isinstance(s, str) else [str(t) for t in s]
        if toks:
            out.append(toks)
    if not out and not allow_empty:
        raise EmptyCorpusError("empty corpus")
    return out


def check_fitted(estimator):
    if not hasattr(estimator, "model_"):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet. "
            "Call 'fit' with appropriate arguments before using this estimator."
        )
