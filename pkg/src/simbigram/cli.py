"""Command-line front end.

Exit codes: 0 success, 1 usage or configuration error, 2 I/O error.
Settings come from flags, then an optional JSON ``--config`` file, then
built-in defaults (the similarity defaults are k=60, t=2.5, beta=4,
gamma=0.15).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backoff import BackoffLM, BackoffModel
from .coocsmooth import CooccurrenceScheme, InterpolatedCooccurrenceLM, parse_lambdas
from .corpus import build_counts, read_counts, read_sentences, write_counts
from .evaluation import DEFAULT_GRID, grid_search, perplexity
from .exceptions import ConfigError, IngestionError, SimBigramError
from .lattice import disagreement_report, format_lattice, parse_lattice
from .simmodel import KL_MODES, SimilarityModel, SimilarityParams
from .synth import make_class_corpus, make_lattices

DEFAULTS = {
    "scheme": "katz",
    "min_word_count": 1,
    "min_bigram_count": 2,
    "discount_ceiling": 5,
    "k": 60,
    "t": 2.5,
    "beta": 4.0,
    "gamma": 0.15,
    "kl_mode": "exact",
    "lambdas": None,
    "lm_weight": 1.0,
    "seed": 0,
    "format": "text",
    "k_grid": ",".join(map(str, DEFAULT_GRID["k"])),
    "t_grid": ",".join(map(str, DEFAULT_GRID["t"])),
    "beta_grid": ",".join(map(str, DEFAULT_GRID["beta"])),
    "gamma_grid": ",".join(map(str, DEFAULT_GRID["gamma"])),
    "model_a": "sim",
    "lattices": 200,
    "margin": 0.5,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _ceiling(s):
    if str(s).lower() in ("none", "inf"):
        return None
    return int(s)


def _floats(s):
    return tuple(float(x) for x in str(s).split(","))


def _ints(s):
    return tuple(int(x) for x in str(s).split(","))


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="JSON file with option values")
    common.add_argument("--format", choices=("text", "csv"))

    model = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    model.add_argument("--counts", help="counts file")
    model.add_argument("--scheme", choices=("katz", "sim", "cooc"))
    model.add_argument("--min-bigram-count", type=int)
    model.add_argument("--discount-ceiling", type=_ceiling)
    model.add_argument("--k", type=int)
    model.add_argument("--t", type=float)
    model.add_argument("--beta", type=float)
    model.add_argument("--gamma", type=float)
    model.add_argument("--kl-mode", choices=KL_MODES)
    model.add_argument("--lambdas", help="a,b,c weights for interpolated cooccurrence smoothing")
    model.add_argument("--lm-weight", type=float)

    p = _Parser(prog="simbigram", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("train", parents=[common], argument_default=argparse.SUPPRESS,
                       help="count a training corpus")
    s.add_argument("--train", required=True, help="training text, one sentence per line")
    s.add_argument("--counts", required=True, help="output counts file")
    s.add_argument("--min-word-count", type=int)

    s = sub.add_parser("eval", parents=[common, model], argument_default=argparse.SUPPRESS,
                       help="perplexity report")
    s.add_argument("--test", required=True)

    s = sub.add_parser("tune", parents=[common, model], argument_default=argparse.SUPPRESS,
                       help="grid search over similarity parameters")
    s.add_argument("--tune", required=True)
    s.add_argument("--test", required=True)
    s.add_argument("--k-grid")
    s.add_argument("--t-grid")
    s.add_argument("--beta-grid")
    s.add_argument("--gamma-grid")

    s = sub.add_parser("neighbors", parents=[common, model], argument_default=argparse.SUPPRESS,
                       help="list the neighbor set of a word")
    s.add_argument("--word", required=True)

    s = sub.add_parser("prob", parents=[common, model], argument_default=argparse.SUPPRESS,
                       help="P(w2 | w1) under every scheme")
    s.add_argument("w1")
    s.add_argument("w2")

    s = sub.add_parser("rescore", parents=[common, model], argument_default=argparse.SUPPRESS,
                       help="lattice disagreement report, --model-a vs katz")
    s.add_argument("--lattice-dir", required=True)
    s.add_argument("--model-a", choices=("sim", "cooc"))

    s = sub.add_parser("gen", parents=[common], argument_default=argparse.SUPPRESS,
                       help="write a synthetic corpus and lattice set")
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int, help="random seed (default 0)")
    s.add_argument("--lattices", type=int)
    s.add_argument("--margin", type=float)
    return p


def resolve_config(ns: argparse.Namespace) -> dict:
    """Merge defaults, the JSON config file and explicit flags (in rising priority)."""
    given = vars(ns)
    cfg = dict(DEFAULTS)
    if "config" in given:
        try:
            with open(given["config"]) as f:
                file_cfg = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad config file: {e}") from None
        if not isinstance(file_cfg, dict):
            raise ConfigError("config file must hold a JSON object")
        cfg.update({k.replace("-", "_"): v for k, v in file_cfg.items()})
    cfg.update(given)
    if isinstance(cfg.get("discount_ceiling"), str):
        cfg["discount_ceiling"] = _ceiling(cfg["discount_ceiling"])
    _validate(cfg)
    return cfg


def _validate(cfg):
    try:
        SimilarityParams(cfg["k"], cfg["t"], cfg["beta"], cfg["gamma"])
    except (ValueError, TypeError) as e:
        raise ConfigError(str(e)) from None
    if cfg["scheme"] not in ("katz", "sim", "cooc"):
        raise ConfigError(f"unknown scheme {cfg['scheme']!r}")
    if cfg["min_bigram_count"] < 1 or cfg["min_word_count"] < 1:
        raise ConfigError("count thresholds must be >= 1")
    if cfg["lambdas"] is not None:
        cfg["lambdas"] = parse_lambdas(cfg["lambdas"])
    if cfg["format"] not in ("text", "csv"):
        raise ConfigError("format must be text or csv")


def _check_paths(cfg, *keys):
    for key in keys:
        path = cfg.get(key)
        if path is None:
            raise ConfigError(f"--{key.replace('_', '-')} is required")
        if not os.path.exists(path):
            raise FileNotFoundError(f"{path}: no such file or directory")


def _load_model(cfg):
    with open(cfg["counts"], encoding="utf-8") as f:
        vocab, counts = read_counts(f)
    return BackoffModel(counts, min_bigram_count=cfg["min_bigram_count"],
                        discount_ceiling=cfg["discount_ceiling"], vocab=vocab)


def make_evaluator(cfg, base: BackoffModel, scheme: str | None = None):
    scheme = scheme or cfg["scheme"]
    if scheme == "katz":
        return BackoffLM(base, name="katz")
    if scheme == "sim":
        params = SimilarityParams(cfg["k"], cfg["t"], cfg["beta"], cfg["gamma"])
        return BackoffLM(base, SimilarityModel(base, cfg["kl_mode"]).scheme(params), name="sim")
    if cfg["lambdas"] is not None:
        return InterpolatedCooccurrenceLM(base, cfg["lambdas"])
    return BackoffLM(base, CooccurrenceScheme.from_model(base), name="cooc")


def _emit(rows: list[dict], fmt: str, out):
    if not rows:
        return
    cols = list(rows[0])
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(cols)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in cols])
        return
    cells = [cols] + [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(cols))]
    for row in cells:
        out.write("  ".join(v.rjust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6g}" if abs(v) < 1e-3 and v != 0 else f"{v:.6f}".rstrip("0").rstrip(".")
    return str(v)


# -- commands ------------------------------------------------------------------


def cmd_train(cfg, out):
    sents = read_sentences(cfg["train"])
    vocab, counts = build_counts(sents, cfg["min_word_count"])
    with open(cfg["counts"], "w", encoding="utf-8", newline="\n") as f:
        write_counts(f, vocab, counts)
    n1 = sum(1 for c in counts.bigram.values() if c == 1)
    out.write(f"vocab_size {len(vocab)}\nN {counts.total_bigrams}\nn1 {n1}\n")


def cmd_eval(cfg, out):
    _check_paths(cfg, "counts", "test")
    base = _load_model(cfg)
    rep = perplexity(make_evaluator(cfg, base), read_sentences(cfg["test"]))
    _emit([rep.as_row()], cfg["format"], out)


def cmd_tune(cfg, out):
    _check_paths(cfg, "counts", "tune", "test")
    base = _load_model(cfg)
    grid = {"k": _ints(cfg["k_grid"]), "t": _floats(cfg["t_grid"]),
            "beta": _floats(cfg["beta_grid"]), "gamma": _floats(cfg["gamma_grid"])}
    res = grid_search(base, read_sentences(cfg["tune"]), read_sentences(cfg["test"]), grid,
                      mode=cfg["kl_mode"])
    _emit([r._asdict() for r in res.rows], cfg["format"], out)


def cmd_neighbors(cfg, out):
    _check_paths(cfg, "counts")
    base = _load_model(cfg)
    word = cfg["word"]
    if word not in base.vocab:
        raise ConfigError(f"word {word!r} is not in the vocabulary")
    params = SimilarityParams(cfg["k"], cfg["t"], cfg["beta"], cfg["gamma"])
    ns = SimilarityModel(base, cfg["kl_mode"]).neighbor_set(base.vocab.index(word), params)
    if cfg["format"] == "csv":
        _emit([{"rank": i, "word": base.vocab.word(n.word), "distance": f"{n.distance:.6f}",
                "weight": f"{n.weight:.6f}"} for i, n in enumerate(ns.neighbors, 1)], "csv", out)
        return
    for i, n in enumerate(ns.neighbors, 1):
        out.write(f"{i} {base.vocab.word(n.word)} {n.distance:.6f} {n.weight:.6f}\n")


def cmd_prob(cfg, out):
    _check_paths(cfg, "counts")
    base = _load_model(cfg)
    w1, w2 = base.vocab.index(cfg["w1"]), base.vocab.index(cfg["w2"])
    row = {"w1": cfg["w1"], "w2": cfg["w2"], "seen": base.is_seen(w1, w2)}
    for scheme in ("katz", "sim", "cooc"):
        row[scheme] = repr(make_evaluator(cfg, base, scheme).prob(w1, w2))
    _emit([row], cfg["format"], out)


def load_lattices(directory, vocab):
    paths = sorted(Path(directory).glob("*.lat"))
    if not paths:
        raise FileNotFoundError(f"{directory}: no .lat files")
    lats = []
    for path in paths:
        with open(path, encoding="utf-8") as f:
            lats.append(parse_lattice(f, vocab))
    return lats


def cmd_rescore(cfg, out):
    _check_paths(cfg, "counts", "lattice_dir")
    base = _load_model(cfg)
    lats = load_lattices(cfg["lattice_dir"], base.vocab)
    rep = disagreement_report(lats, make_evaluator(cfg, base, cfg["model_a"]),
                              make_evaluator(cfg, base, "katz"), cfg["lm_weight"])
    _emit([{"model_a": cfg["model_a"], "model_b": "katz", "lattices": len(lats),
            "disagreements": rep.disagreements, "model_a_correct": rep.model_a_correct,
            "model_b_correct": rep.model_b_correct, "sign_test_p": rep.sign_test_p}],
          cfg["format"], out)


def cmd_gen(cfg, out):
    root = Path(cfg["out"])
    cc = make_class_corpus(seed=cfg["seed"])
    (root / "lattices").mkdir(parents=True, exist_ok=True)
    for name in ("train", "tune", "test"):
        with open(root / f"{name}.txt", "w", encoding="utf-8", newline="\n") as f:
            f.writelines(" ".join(s) + "\n" for s in getattr(cc, name))
    vocab = cc.model.vocabulary
    rng = np.random.default_rng([cfg["seed"], 1])
    lats = make_lattices(cc.model, rng, count=cfg["lattices"], margin=cfg["margin"])
    width = len(str(max(len(lats) - 1, 0)))
    for i, lat in enumerate(lats):
        with open(root / "lattices" / f"lat_{i:0{width}d}.lat", "w", encoding="utf-8",
                  newline="\n") as f:
            f.write(format_lattice(lat, vocab))
    out.write(f"wrote {root} (train {len(cc.train)} sentences, {len(lats)} lattices, "
              f"seed {cfg['seed']})\n")


COMMANDS = {
    "train": cmd_train,
    "eval": cmd_eval,
    "tune": cmd_tune,
    "neighbors": cmd_neighbors,
    "prob": cmd_prob,
    "rescore": cmd_rescore,
    "gen": cmd_gen,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        command = ns.command
        del ns.command
        cfg = resolve_config(ns)
        buf = io.StringIO()
        COMMANDS[command](cfg, buf)
        out.write(buf.getvalue())
        return 0
    except UsageError as e:
        err.write(f"{e}\n")
        return 1
    except (OSError, IngestionError) as e:
        err.write(f"error: {e}\n")
        return 2
    except (SimBigramError, ValueError, KeyError) as e:
        err.write(f"error: {e}\n")
        return 1


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
