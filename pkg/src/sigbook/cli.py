"""Command-line driver: ``sigbook generate | featurize | train | evaluate``.

Every subcommand accepts ``--config FILE`` holding ``key = value`` lines
(keys are long option names, with ``-`` or ``_``); flags given on the
command line take precedence. All randomness is derived from ``--seed``
through named sub-generators.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings

import numpy as np

from . import evaluation as ev
from ._rng import derive_rng
from .errors import ConvergenceWarning, DomainError, EmptyBucketError, SigbookError, ValidationError
from .lasso import TrainConfig, predict, save_model, top_coefficients, train
from .market_features import (
    INPUT_CHANNELS,
    featurize_streams,
    parse_order_book_csv,
    read_feature_csv,
    slice_bucket,
    write_feature_csv,
    write_order_book_csv,
)
from .synthetic import PROFILES, GeneratorConfig, generate_dataset

log = logging.getLogger("sigbook")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _window(text: str) -> tuple:
    parts = text.split(",")
    try:
        start, end = (float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START,END, got {text!r}") from None
    if not start < end:
        raise argparse.ArgumentTypeError(f"bucket start must be below end, got {text!r}")
    return start, end


def _ratio(text: str) -> float:
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"split ratio must lie in (0, 1), got {text}")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _add_training(p):
    p.add_argument("--seed", type=int, help="master seed (required)")
    p.add_argument("--split", type=_ratio, default=0.75, help="learning-set fraction")
    p.add_argument("--alpha", type=float, help="fixed penalty; skips cross-validation")
    p.add_argument("--folds", type=_positive, default=5)
    p.add_argument("--grid-size", type=_positive, default=30)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sigbook", description="Signature features and LASSO classification of order-book streams.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    g = sub.add_parser("generate", help="write a labelled synthetic raw stream CSV")
    g.add_argument("--config")
    g.add_argument("--class-a", choices=PROFILES, help="profile of streams labelled 0")
    g.add_argument("--class-b", choices=PROFILES, help="profile of streams labelled 1")
    g.add_argument("--count", type=int, default=100, help="streams per class")
    g.add_argument("--n-points", type=int, default=60)
    g.add_argument("--noise-level", type=float, default=0.3)
    g.add_argument("--price-vol", type=float, default=0.02)
    g.add_argument("--seed", type=int)
    g.add_argument("-o", "--output")

    f = sub.add_parser("featurize", help="raw stream CSV to signature feature CSV")
    f.add_argument("--config")
    f.add_argument("input", nargs="?")
    f.add_argument("-o", "--output")
    f.add_argument("--depth", type=_positive, default=4)
    f.add_argument("--bucket", type=_window, help="START,END time window applied before featurizing")
    f.add_argument("--workers", type=_positive, default=1)

    t = sub.add_parser("train", help="fit a LASSO model on a seeded learning/test split")
    t.add_argument("--config")
    t.add_argument("input", nargs="?")
    t.add_argument("-o", "--output", help="output directory")
    _add_training(t)

    e = sub.add_parser("evaluate", help="randomised-label baseline or learning curve")
    e.add_argument("--config")
    e.add_argument("input", nargs="?")
    e.add_argument("-o", "--output", help="output directory")
    e.add_argument("--mode", choices=("baseline", "learning-curve"), default="baseline")
    e.add_argument("--trials", type=_positive, default=50)
    e.add_argument("--splits", type=int, default=0,
                   help="baseline mode: also run this many true-label splits for the percentile table")
    e.add_argument("--sizes", type=_int_list, help="learning-set sizes, comma separated")
    e.add_argument("--workers", type=_positive, default=1)
    _add_training(e)
    return parser


def read_config(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    with fh:
        for n, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise UsageError(f"{path}: line {n}: expected key = value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def parse_args(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError(parser.format_usage().strip())
    if args.config:
        sub = parser._subparsers._group_actions[0].choices[args.command]
        dests = {a.dest for a in sub._actions}
        cfg = read_config(args.config)
        unknown = sorted(set(cfg) - dests - {"config"})
        if unknown:
            raise UsageError(f"unknown config keys for {args.command}: {', '.join(unknown)}")
        sub.set_defaults(**cfg)
        args = parser.parse_args(argv)
    return args


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise UsageError(f"{args.command}: --{name.replace('_', '-')} is required")


def _train_config(args) -> TrainConfig:
    return TrainConfig(alpha=args.alpha, folds=args.folds, grid_size=args.grid_size, seed=args.seed)


def _load_labelled(path):
    fm = read_feature_csv(path)
    if len(fm) == 0:
        raise ValidationError(f"{path}: no feature rows")
    y = fm.y
    if np.unique(y).size < 2:
        raise ValidationError(f"{path}: labels contain a single class")
    return fm, y


def _outdir(path) -> str:
    os.makedirs(path, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Subcommands


def cmd_generate(args) -> int:
    _require(args, "class_a", "class_b", "seed", "output")
    seeds = [int(derive_rng(args.seed, "synthesis", label).integers(2**31)) for label in (0, 1)]
    try:
        cfgs = [GeneratorConfig(cls, args.n_points, args.noise_level, args.price_vol, s, args.count)
                for cls, s in zip((args.class_a, args.class_b), seeds)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    streams = generate_dataset(*cfgs)
    write_order_book_csv(args.output, streams)
    print(f"wrote {len(streams)} streams ({args.count} {args.class_a}, {args.count} {args.class_b}) to {args.output}")
    return EXIT_OK


def cmd_featurize(args) -> int:
    _require(args, "input", "output")
    streams = parse_order_book_csv(args.input, errors="skip")
    if args.bucket is not None:
        kept = []
        for s in streams:
            try:
                kept.append(slice_bucket(s, *args.bucket))
            except EmptyBucketError as exc:
                log.warning("skipping %s", exc)
        streams = kept
    if not streams:
        raise ValidationError(f"{args.input}: no valid streams")
    records = featurize_streams(streams, depth=args.depth, workers=args.workers)
    write_feature_csv(args.output, records, width=len(INPUT_CHANNELS), depth=args.depth)
    print(f"wrote {len(records)} feature rows x {len(records[0].features)} features to {args.output}")
    return EXIT_OK


def _print_indicators(rep: ev.ClassificationReport):
    print(f"{'':24s}{'learning':>10s}{'out-of-sample':>15s}")
    print(f"{'KS distance':24s}{rep.ks_learning:10.4f}{rep.ks_oos:15.4f}")
    print(f"{'AUC':24s}{rep.auc_learning:10.4f}{rep.auc_oos:15.4f}")
    print(f"{'correct ratio':24s}{rep.correct_ratio_learning:10.4f}{rep.correct_ratio:15.4f}")


def cmd_train(args) -> int:
    _require(args, "input", "output", "seed")
    fm, y = _load_labelled(args.input)
    learn, test = ev.stratified_split(y, args.split, derive_rng(args.seed, "split"))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        model, rep, (s_l, s_t) = ev.run_split(fm.X, y, learn, test, _train_config(args), names=fm.names)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if not (np.isfinite(s_l).all() and np.isfinite(s_t).all()):
        raise FloatingPointError("non-finite regression scores")
    if model.nonzero() == 0:
        print(f"warning: alpha={model.alpha:g} sets every coefficient to zero", file=sys.stderr)

    out = _outdir(args.output)
    save_model(os.path.join(out, "model.txt"), model)
    ev.write_report(os.path.join(out, "report.txt"), rep)
    ev.write_scores_csv(os.path.join(out, "scores_learning.csv"), s_l, y[learn])
    ev.write_scores_csv(os.path.join(out, "scores_oos.csv"), s_t, y[test])
    ev.write_roc_csv(os.path.join(out, "roc_learning.csv"), rep.roc_learning)
    ev.write_roc_csv(os.path.join(out, "roc_oos.csv"), rep.roc_points)

    print(f"learning rows {learn.size}, out-of-sample rows {test.size}, alpha {model.alpha:.6g}, "
          f"{model.nonzero()} non-zero coefficients")
    _print_indicators(rep)
    print("\ntop coefficients")
    for word, beta in top_coefficients(model, 15):
        print(f"  {word:12s}{beta: .6e}")
    return EXIT_OK


def _write_text(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_evaluate(args) -> int:
    _require(args, "input", "output", "seed")
    fm, y = _load_labelled(args.input)
    out = _outdir(args.output)
    cfg = _train_config(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        if args.mode == "baseline":
            text = _run_baseline(args, fm, y, cfg, out)
        else:
            text = _run_learning_curve(args, fm, y, cfg, out)
    print(text, end="")
    return EXIT_OK


def _run_baseline(args, fm, y, cfg, out) -> str:
    base = ev.randomized_label_baseline(fm.X, y, args.trials, args.seed, args.split, cfg, args.workers)
    ref = {k: base[k] for k in ev.INDICATORS}
    lines = [f"trials={args.trials}"] + [f"ref_{k}={v!r}" for k, v in ref.items()]
    _write_text(os.path.join(out, "baseline.txt"), "\n".join(lines) + "\n")
    if args.splits > 0:
        reports = ev.repeated_splits(fm.X, y, args.splits, args.seed, args.split, cfg, args.workers)
        title = f"Percentiles over {args.splits} random learning/test splits; Ref = 95% percentile of {args.trials} shuffled-label trials"
    else:
        reports = base["reports"]
        title = f"Percentiles over {args.trials} shuffled-label trials; Ref = 95% percentile"
    table = title + "\n" + ev.format_percentile_table(reports, ref)
    _write_text(os.path.join(out, "percentiles.txt"), table)
    return table


def _run_learning_curve(args, fm, y, cfg, out) -> str:
    _require(args, "sizes")
    learn, test = ev.stratified_split(y, args.split, derive_rng(args.seed, "split"))
    too_big = [s for s in args.sizes if s > learn.size]
    if too_big:
        raise ValidationError(f"learning-set sizes {too_big} exceed the pool of {learn.size} rows")
    curve = ev.learning_curve(fm.X, y, args.sizes, args.trials, test, args.seed, cfg, args.workers)
    rows = ["size,indicator,min,q25,median,q75,max"]
    text = [f"Indicator distributions over {args.trials} random learning sets per size, {test.size} fixed test rows"]
    for size, res in curve.items():
        text.append(f"\nlearning-set size {size}")
        text.append(f"  {'':32s}{'Min':>8s}{'25%':>8s}{'50%':>8s}{'75%':>8s}{'Max':>8s}")
        for name in ev.INDICATORS:
            s = res["summary"][name]
            vals = (s["min"], s["q25"], s["median"], s["q75"], s["max"])
            rows.append(",".join([str(size), name] + [repr(v) for v in vals]))
            text.append(f"  {name:32s}" + "".join(f"{v:8.3f}" for v in vals))
    with open(os.path.join(out, "learning_curve.csv"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(rows) + "\n")
    body = "\n".join(text) + "\n"
    _write_text(os.path.join(out, "learning_curve.txt"), body)
    return body


COMMANDS = {"generate": cmd_generate, "featurize": cmd_featurize, "train": cmd_train, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, FloatingPointError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (SigbookError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
