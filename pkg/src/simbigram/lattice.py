"""Word lattices: parsing, LM rescoring by best path, and model disagreement counts.

Lattice file format (one lattice per file)::

    LATTICE <node_count> <start> <end>
    A <from> <to> <word> <acoustic_score>
    ...
    REF <word> <word> ...

Acoustic scores are nonnegative negative log likelihoods.  Lattices carry
no sentence-start history, so the first arc of a path is scored with the
unigram probability of its word.
"""

from __future__ import annotations

import io
import math
import warnings
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, NamedTuple, Sequence

from .corpus import Vocabulary
from .exceptions import ConfigError, CycleError, LatticeError

__all__ = [
    "Arc",
    "Lattice",
    "PathResult",
    "DisagreementReport",
    "parse_lattice",
    "format_lattice",
    "best_path",
    "edit_distance",
    "aligned_correct",
    "count_disagreements",
    "sign_test",
    "disagreement_report",
]


class Arc(NamedTuple):
    src: int
    dst: int
    word: int
    acoustic: float


@dataclass(frozen=True)
class Lattice:
    node_count: int
    start: int
    end: int
    arcs: tuple
    reference: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "arcs", tuple(Arc(*a) for a in self.arcs))
        if self.reference is not None:
            object.__setattr__(self, "reference", tuple(self.reference))
        self._validate()

    def _validate(self):
        n = self.node_count
        if n < 1 or not (0 <= self.start < n and 0 <= self.end < n):
            raise LatticeError("start/end node out of range")
        for a in self.arcs:
            if not (0 <= a.src < n and 0 <= a.dst < n):
                raise LatticeError(f"arc {a} references a node outside 0..{n - 1}")
            if not a.acoustic >= 0 or math.isinf(a.acoustic):
                raise LatticeError(f"arc {a} has an invalid acoustic score")
        if any(a.dst == self.start for a in self.arcs):
            raise LatticeError("start node has incoming arcs")
        if any(a.src == self.end for a in self.arcs):
            raise LatticeError("end node has outgoing arcs")
        order = self.topological_order  # raises CycleError
        fwd = {self.start}
        for v in order:
            if v in fwd:
                fwd.update(a.dst for a in self.out_arcs[v])
        bwd = {self.end}
        for v in reversed(order):
            if any(a.dst in bwd for a in self.out_arcs[v]):
                bwd.add(v)
        stranded = [v for v in range(n) if v not in fwd or v not in bwd]
        if stranded:
            raise LatticeError(f"node {stranded[0]} is not on any start-to-end path")

    @cached_property
    def out_arcs(self) -> list:
        out = [[] for _ in range(self.node_count)]
        for a in self.arcs:
            out[a.src].append(a)
        return out

    @cached_property
    def topological_order(self) -> list:
        indeg = [0] * self.node_count
        for a in self.arcs:
            indeg[a.dst] += 1
        queue = deque(v for v in range(self.node_count) if indeg[v] == 0)
        order = []
        while queue:
            v = queue.popleft()
            order.append(v)
            for a in self.out_arcs[v]:
                indeg[a.dst] -= 1
                if indeg[a.dst] == 0:
                    queue.append(a.dst)
        if len(order) != self.node_count:
            raise CycleError("lattice is not a DAG")
        return order


def _map_word(word: str, vocab: Vocabulary | None, lineno: int):
    if vocab is None:
        raise ConfigError("a vocabulary is needed to map lattice words")
    if word not in vocab:
        warnings.warn(f"line {lineno}: unknown word {word!r} mapped to {vocab.unk}",
                      stacklevel=3)
    return vocab.index(word)


def parse_lattice(source, vocab: Vocabulary) -> Lattice:
    """Parse a lattice from text, bytes or a text stream."""
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    if isinstance(source, str):
        source = io.StringIO(source)
    header = None
    arcs, ref = [], None
    for lineno, line in enumerate(source, start=1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        tag = parts[0]
        try:
            if tag == "LATTICE" and len(parts) == 4:
                if header is not None:
                    raise LatticeError(f"line {lineno}: more than one lattice in file")
                header = tuple(int(x) for x in parts[1:])
            elif tag == "A" and len(parts) == 5:
                arcs.append(Arc(int(parts[1]), int(parts[2]),
                                _map_word(parts[3], vocab, lineno), float(parts[4])))
            elif tag == "REF":
                if ref is not None:
                    raise LatticeError(f"line {lineno}: duplicate REF line")
                ref = tuple(_map_word(w, vocab, lineno) for w in parts[1:])
            else:
                raise LatticeError(f"line {lineno}: malformed line {line.strip()!r}")
        except ValueError as e:
            if isinstance(e, LatticeError):
                raise
            raise LatticeError(f"line {lineno}: {e}") from None
    if header is None:
        raise LatticeError("missing LATTICE header")
    return Lattice(header[0], header[1], header[2], tuple(arcs), ref)


def format_lattice(lattice: Lattice, vocab: Vocabulary) -> str:
    lines = [f"LATTICE {lattice.node_count} {lattice.start} {lattice.end}"]
    lines += [f"A {a.src} {a.dst} {vocab.word(a.word)} {a.acoustic!r}" for a in lattice.arcs]
    if lattice.reference is not None:
        lines.append(" ".join(["REF", *vocab.decode(lattice.reference)]))
    return "\n".join(lines) + "\n"


class PathResult(NamedTuple):
    words: tuple
    score: float     # acoustic + lm_weight * lm, accumulated arc by arc
    acoustic: float
    lm: float        # unweighted sum of -ln P


def _lm_cost(lm, prev, word) -> float:
    p = lm.unigram_prob(word) if prev is None else lm.prob(prev, word)
    return -math.log(p) if p > 0 else math.inf


def best_path(lattice: Lattice, lm, lm_weight: float = 1.0) -> PathResult:
    """Minimum-cost start-to-end path under acoustic plus weighted LM scores.

    Dynamic program over (node, previous word) states.  Equal-cost paths
    are resolved toward the lexicographically smallest word-id sequence.
    """
    # state: node -> {last_word: [score, {length: (seq, acoustic, lm)}]}
    states = [dict() for _ in range(lattice.node_count)]
    states[lattice.start][None] = [0.0, {0: ((), 0.0, 0.0)}]
    for v in lattice.topological_order:
        for last, (score, cands) in states[v].items():
            for arc in lattice.out_arcs[v]:
                cost = _lm_cost(lm, last, arc.word)
                new = score + (arc.acoustic + lm_weight * cost)
                ext = {n + 1: (seq + (arc.word,), ac + arc.acoustic, lmc + cost)
                       for n, (seq, ac, lmc) in cands.items()}
                slot = states[arc.dst].get(arc.word)
                if slot is None or new < slot[0]:
                    states[arc.dst][arc.word] = [new, ext]
                elif new == slot[0]:
                    for n, c in ext.items():
                        if n not in slot[1] or c[0] < slot[1][n][0]:
                            slot[1][n] = c
        if v != lattice.end:
            states[v] = None  # free finished states
    final = states[lattice.end]
    best_score = min(s for s, _ in final.values())
    seq, ac, lmc = min((c for s, cands in final.values() if s == best_score
                        for c in cands.values()), key=lambda c: c[0])
    return PathResult(seq, best_score, ac, lmc)


def edit_distance(a: Sequence, b: Sequence) -> int:
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        cur = [i] + [0] * len(b)
        for j, y in enumerate(b, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y))
        prev = cur
    return prev[-1]


def aligned_correct(hyp: Sequence, ref: Sequence) -> list[bool]:
    """For each reference position, whether a minimum-edit alignment matches it exactly.

    Backtrace prefers match/substitution, then deletion, then insertion.
    """
    n, m = len(hyp), len(ref)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        d[i][0] = i
    for j in range(m + 1):
        d[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (hyp[i - 1] != ref[j - 1]))
    correct = [False] * m
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 and d[i][j] == d[i - 1][j - 1] + (hyp[i - 1] != ref[j - 1]):
            correct[j - 1] = hyp[i - 1] == ref[j - 1]
            i, j = i - 1, j - 1
        elif j > 0 and d[i][j] == d[i][j - 1] + 1:
            j -= 1  # reference word deleted
        else:
            i -= 1  # hypothesis word inserted
    return correct


def count_disagreements(hyp_a: Sequence, hyp_b: Sequence, ref: Sequence) -> tuple[int, int]:
    """Reference positions where exactly one hypothesis is correct, split by winner."""
    ca, cb = aligned_correct(hyp_a, ref), aligned_correct(hyp_b, ref)
    a = sum(1 for x, y in zip(ca, cb) if x and not y)
    b = sum(1 for x, y in zip(ca, cb) if y and not x)
    return a, b


def sign_test(a: int, b: int) -> float:
    """Two-sided exact sign test p-value for an a-vs-b split."""
    n = a + b
    if n == 0:
        return 1.0
    tail = sum(math.comb(n, i) for i in range(min(a, b) + 1))
    return min(1.0, 2 * tail / 2 ** n)


@dataclass(frozen=True)
class DisagreementReport:
    disagreements: int
    model_a_correct: int
    model_b_correct: int
    sign_test_p: float


def disagreement_report(lattices: Iterable, model_a, model_b, lm_weight: float = 1.0,
                        references: Iterable | None = None) -> DisagreementReport:
    """Decode every lattice with both models and count word disagreements.

    References come from `references` when given, else from each lattice's
    ``reference`` field.
    """
    lattices = list(lattices)
    refs = list(references) if references is not None else [lat.reference for lat in lattices]
    if len(refs) != len(lattices):
        raise ConfigError("one reference is needed per lattice")
    a_total = b_total = 0
    for i, (lat, ref) in enumerate(zip(lattices, refs)):
        if ref is None:
            raise ConfigError(f"lattice {i} has no reference transcript")
        ha = best_path(lat, model_a, lm_weight).words
        hb = best_path(lat, model_b, lm_weight).words
        a, b = count_disagreements(ha, hb, ref)
        a_total += a
        b_total += b
    return DisagreementReport(a_total + b_total, a_total, b_total, sign_test(a_total, b_total))
