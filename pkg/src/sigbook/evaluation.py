"""Classification indicators and resampling protocols.

Indicators computed on regression scores: two-sample Kolmogorov-Smirnov
distance (and the score level where it is attained), the confusion counts
when that level is used as decision boundary, and ROC / AUC. Protocols:
repeated random learning/test splits, randomised-label reference runs and
learning curves over learning-set size.
"""
from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

from ._rng import derive_rng
from .errors import ValidationError
from .lasso import TrainConfig, predict, train

__all__ = [
    "ClassificationReport",
    "ks_distance",
    "confusion_at_threshold",
    "roc_auc",
    "percentile",
    "stratified_split",
    "evaluate_model",
    "run_split",
    "repeated_splits",
    "randomized_label_baseline",
    "learning_curve",
    "summarize",
    "PERCENTILE_COLUMNS",
    "write_report",
    "write_roc_csv",
    "write_scores_csv",
    "format_percentile_table",
]

INDICATORS = ("ks", "auc", "correct_ratio")


def _split_by_label(scores, labels):
    scores = np.asarray(scores, dtype=float).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if scores.shape != labels.shape:
        raise ValueError(f"{scores.shape[0]} scores for {labels.shape[0]} labels")
    return scores[labels == 0], scores[labels == 1]


def ks_distance(scores0, scores1) -> tuple:
    """Largest gap between the two empirical CDFs, and the smallest score attaining it.

    Both CDFs are right-continuous (``F(t) = #{x <= t} / n``) and the gap is
    evaluated at every pooled sample value. Counts are compared as integers
    so ties in the maximum are detected exactly.
    """
    a = np.sort(np.asarray(scores0, dtype=float).reshape(-1))
    b = np.sort(np.asarray(scores1, dtype=float).reshape(-1))
    if a.size == 0 or b.size == 0:
        raise ValueError("both samples must be non-empty")
    pooled = np.unique(np.concatenate([a, b]))
    ca = np.searchsorted(a, pooled, side="right")
    cb = np.searchsorted(b, pooled, side="right")
    gap = np.abs(ca * b.size - cb * a.size)
    k = int(np.argmax(gap))
    return float(gap[k] / (a.size * b.size)), float(pooled[k])


@dataclass
class Confusion:
    tp: int
    fp: int
    tn: int
    fn: int
    correct_ratio: float
    orientation: int


def orientation_of(scores, labels) -> int:
    """+1 if class 1 scores higher on average, else -1."""
    s0, s1 = _split_by_label(scores, labels)
    if s0.size and s1.size and s1.mean() < s0.mean():
        return -1
    return 1


def confusion_at_threshold(scores, labels, threshold: float, orientation: int | None = None) -> Confusion:
    """Confusion counts for the rule ``score > threshold`` predicts 1.

    With ``orientation=-1`` the rule is complemented (``score <= threshold``
    predicts 1). When omitted, the orientation is chosen from the class means
    of the given data.
    """
    scores = np.asarray(scores, dtype=float).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    if orientation is None:
        orientation = orientation_of(scores, labels)
    pred = scores > threshold
    if orientation < 0:
        pred = ~pred
    truth = labels == 1
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    tn = int(np.sum(~pred & ~truth))
    fn = int(np.sum(~pred & truth))
    total = tp + fp + tn + fn
    return Confusion(tp, fp, tn, fn, (tp + tn) / total if total else float("nan"), int(orientation))


def roc_auc(scores, labels) -> tuple:
    """ROC points and the Mann-Whitney AUC ``P(s1 > s0) + P(s1 == s0) / 2``.

    ROC points run from (0, 0) to (1, 1), one per distinct score, with the
    rule ``score >= t`` predicts 1 for decreasing ``t``. The trapezoidal area
    under these points equals the returned AUC.
    """
    scores = np.asarray(scores, dtype=float).reshape(-1)
    labels = np.asarray(labels).reshape(-1)
    pos = labels == 1
    n1, n0 = int(pos.sum()), int((~pos).sum())
    if n1 == 0 or n0 == 0:
        raise ValidationError("ROC needs both classes")
    ranks = rankdata(scores)
    auc = (ranks[pos].sum() - n1 * (n1 + 1) / 2.0) / (n0 * n1)

    order = np.argsort(-scores, kind="stable")
    s, p = scores[order], pos[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), s.size - 1]
    tps = np.cumsum(p)[last]
    fps = np.cumsum(~p)[last]
    points = [(0.0, 0.0)] + [(fp / n0, tp / n1) for fp, tp in zip(fps.tolist(), tps.tolist())]
    return points, float(auc)


def percentile(values, q) -> float:
    """Percentile with linear interpolation between closest order statistics."""
    return float(np.percentile(np.asarray(values, dtype=float), q, method="linear"))


def stratified_split(labels, ratio: float, rng) -> tuple:
    """Learning/test indices taking ``round(ratio * n_c)`` learning rows from each class."""
    if not 0 < ratio < 1:
        raise ValueError("split ratio must lie in (0, 1)")
    labels = np.asarray(labels)
    learn, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        k = int(round(ratio * idx.size))
        learn.append(idx[:k])
        test.append(idx[k:])
    return np.sort(np.concatenate(learn)), np.sort(np.concatenate(test))


@dataclass
class ClassificationReport:
    ks_learning: float
    ks_oos: float
    threshold: float
    orientation: int
    tp: int
    fp: int
    tn: int
    fn: int
    correct_ratio: float
    correct_ratio_learning: float
    auc_learning: float
    auc_oos: float
    alpha: float = float("nan")
    nonzero: int = 0
    roc_learning: list = field(default_factory=list, repr=False)
    roc_points: list = field(default_factory=list, repr=False)

    def indicators(self) -> dict:
        """Learning-set and out-of-sample values of the three headline indicators."""
        return {
            ("ks", "LS"): self.ks_learning, ("ks", "OS"): self.ks_oos,
            ("auc", "LS"): self.auc_learning, ("auc", "OS"): self.auc_oos,
            ("correct_ratio", "LS"): self.correct_ratio_learning,
            ("correct_ratio", "OS"): self.correct_ratio,
        }


def evaluate_model(train_scores, train_labels, test_scores, test_labels) -> ClassificationReport:
    """Indicators with the decision boundary fixed on the learning set.

    The threshold is the KS-attaining score on the learning set and the
    orientation comes from the learning-set class means; the confusion
    counts refer to the out-of-sample set.
    """
    l0, l1 = _split_by_label(train_scores, train_labels)
    t0, t1 = _split_by_label(test_scores, test_labels)
    ks_l, thr = ks_distance(l0, l1)
    ks_o, _ = ks_distance(t0, t1)
    orient = orientation_of(train_scores, train_labels)
    conf = confusion_at_threshold(test_scores, test_labels, thr, orient)
    conf_l = confusion_at_threshold(train_scores, train_labels, thr, orient)
    roc_l, auc_l = roc_auc(train_scores, train_labels)
    roc_o, auc_o = roc_auc(test_scores, test_labels)
    return ClassificationReport(ks_l, ks_o, thr, orient, conf.tp, conf.fp, conf.tn, conf.fn,
                                conf.correct_ratio, conf_l.correct_ratio, auc_l, auc_o,
                                roc_learning=roc_l, roc_points=roc_o)


def run_split(X, y, learn, test, config: TrainConfig | None = None, names=None):
    """Train on ``learn`` rows, evaluate on ``test`` rows; returns (model, report, scores)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    model = train(X[learn], y[learn], names=names, config=config)
    s_l = predict(model, X[learn])
    s_t = predict(model, X[test])
    rep = evaluate_model(s_l, y[learn], s_t, y[test])
    rep.alpha = model.alpha
    rep.nonzero = model.nonzero()
    return model, rep, (s_l, s_t)


def _trial(args):
    X, y, learn, test, config = args
    return run_split(X, y, learn, test, config)[1]


def _run_trials(jobs, workers: int) -> list:
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_trial, jobs))
    return [_trial(j) for j in jobs]


def repeated_splits(X, y, trials: int, seed: int, ratio: float = 0.75,
                    config: TrainConfig | None = None, workers: int = 1) -> list:
    """Reports for ``trials`` independent stratified learning/test splits."""
    y = np.asarray(y)
    jobs = []
    for t in range(trials):
        learn, test = stratified_split(y, ratio, derive_rng(seed, "split", t))
        jobs.append((X, y, learn, test, config))
    return _run_trials(jobs, workers)


def randomized_label_baseline(X, y, trials: int, seed: int, ratio: float = 0.75,
                              config: TrainConfig | None = None, workers: int = 1) -> dict:
    """95th percentiles of out-of-sample indicators when labels are shuffled.

    The learning/test split is drawn once from ``seed`` (stratified on the
    true labels) and kept for all trials; trial ``t`` permutes the labels
    with its own generator ``(seed, "labels", t)``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    y = np.asarray(y)
    learn, test = stratified_split(y, ratio, derive_rng(seed, "split"))
    jobs = []
    for t in range(trials):
        shuffled = y[derive_rng(seed, "labels", t).permutation(y.size)]
        jobs.append((X, shuffled, learn, test, config))
    reports = _run_trials(jobs, workers)
    return {
        "ks": percentile([r.ks_oos for r in reports], 95),
        "auc": percentile([r.auc_oos for r in reports], 95),
        "correct_ratio": percentile([r.correct_ratio for r in reports], 95),
        "reports": reports,
    }


def summarize(values) -> dict:
    """Minimum, quartiles and maximum."""
    v = np.asarray(values, dtype=float)
    return {"min": float(v.min()), "q25": percentile(v, 25), "median": percentile(v, 50),
            "q75": percentile(v, 75), "max": float(v.max())}


def learning_curve(X, y, sizes, trials: int, fixed_test, seed: int,
                   config: TrainConfig | None = None, workers: int = 1) -> dict:
    """Indicator distributions for random learning sets of each size.

    Learning sets are drawn without replacement from the rows outside
    ``fixed_test``; every trained model is scored on the same
    ``fixed_test`` rows. Returns ``{size: {"reports": [...], "summary":
    {indicator: summarize(...)}}}``.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y)
    test = np.unique(np.asarray(fixed_test, dtype=int))
    pool = np.setdiff1d(np.arange(y.size), test)
    out = {}
    for size in sizes:
        size = int(size)
        if size > pool.size:
            raise ValueError(f"learning-set size {size} exceeds pool of {pool.size} rows")
        jobs = []
        for t in range(trials):
            rng = derive_rng(seed, "curve", size, t)
            for _ in range(1000):
                learn = np.sort(rng.choice(pool, size=size, replace=False))
                counts = np.bincount(y[learn], minlength=2)
                if counts.min() >= 2:
                    break
            else:
                raise ValidationError(f"could not draw a learning set of size {size} with both classes")
            jobs.append((X, y, learn, test, config))
        reports = _run_trials(jobs, workers)
        summary = {}
        for name, getter in (("ks", lambda r: r.ks_oos), ("auc", lambda r: r.auc_oos),
                             ("correct_ratio", lambda r: r.correct_ratio)):
            summary[name] = summarize([getter(r) for r in reports])
        out[size] = {"reports": reports, "summary": summary}
    return out


# ---------------------------------------------------------------------------
# Output files

PERCENTILE_COLUMNS = (("Min", 0), ("5%", 5), ("10%", 10), ("25%", 25), ("50%", 50),
                      ("75%", 75), ("90%", 90), ("95%", 95), ("Max", 100))
_TITLES = {"ks": "Kolmogorov-Smirnov distance", "auc": "Area under ROC curve",
           "correct_ratio": "Ratio of correct classification"}


def write_report(path, report: ClassificationReport) -> None:
    """Flat ``key=value`` lines for every scalar field of the report."""
    data = asdict(report)
    data.pop("roc_learning")
    data.pop("roc_points")
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in data.items():
            fh.write(f"{key}={value!r}\n")


def write_roc_csv(path, points) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fpr", "tpr"])
        w.writerows((repr(float(a)), repr(float(b))) for a, b in points)


def write_scores_csv(path, scores, labels) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["score", "label"])
        w.writerows((repr(float(s)), int(lab)) for s, lab in zip(scores, labels))


def format_percentile_table(reports, ref: dict | None = None) -> str:
    """Plain-text percentile table of LS/OS indicators with an optional Ref column."""
    head = [""] + [c for c, _ in PERCENTILE_COLUMNS] + ["Ref"]
    rows = [head]
    for name in INDICATORS:
        rows.append([_TITLES[name]] + [""] * (len(head) - 1))
        for part in ("LS", "OS"):
            vals = [r.indicators()[(name, part)] for r in reports]
            cells = [f"{percentile(vals, q):.3f}" for _, q in PERCENTILE_COLUMNS]
            refcell = f"{ref[name]:.3f}" if (ref is not None and part == "OS") else ""
            rows.append([f"  {part}"] + cells + [refcell])
    widths = [max(len(r[i]) for r in rows if r[1] != "" or i == 0) for i in range(len(head))]
    lines = []
    for r in rows:
        if r[1] == "" and r[0] and not r[0].startswith(" "):
            lines.append(r[0])
        else:
            lines.append("  ".join(cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(r, widths))))
    return "\n".join(lines) + "\n"
