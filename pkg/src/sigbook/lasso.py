"""L1-penalised least squares on signature features.

The fitted objective is the plain residual sum of squares plus the penalty,

    sum_k (b + sum_I beta_I Z_I(k) - y(k))**2 + alpha * sum_I |beta_I|

with an unpenalised intercept ``b``. The residual sum is not divided by
the number of rows, so ``alpha`` here equals ``2 * n_rows`` times the
``alpha`` of scikit-learn's :class:`~sklearn.linear_model.Lasso`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ._rng import derive_rng
from .errors import ConvergenceWarning, DimensionError, ValidationError
from .tensor_algebra import parse_multi_index

__all__ = [
    "StandardizationStats",
    "LassoFit",
    "CVResult",
    "LassoModel",
    "TrainConfig",
    "standardize_fit",
    "standardize_apply",
    "soft_threshold",
    "objective",
    "alpha_max",
    "alpha_grid",
    "coordinate_descent",
    "lasso_path",
    "cross_validate_alpha",
    "train",
    "predict",
    "top_coefficients",
    "save_model",
    "load_model",
]

DROP_STD = 1e-12
TOL = 1e-8
MAX_SWEEPS = 10_000


@dataclass
class StandardizationStats:
    mean: np.ndarray
    std: np.ndarray
    dropped: np.ndarray

    @property
    def retained(self) -> np.ndarray:
        keep = np.ones(self.mean.shape[0], dtype=bool)
        keep[self.dropped] = False
        return np.flatnonzero(keep)


def standardize_fit(X) -> StandardizationStats:
    """Column means and population standard deviations of the learning set.

    Columns with standard deviation below ``1e-12`` are listed as dropped.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("standardization needs a 2-d matrix with at least 2 rows")
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    dropped = np.flatnonzero(~(std >= DROP_STD))
    return StandardizationStats(mean, std, dropped)


def standardize_apply(stats: StandardizationStats, X) -> np.ndarray:
    """Standardised retained columns of ``X`` (dropped columns removed)."""
    X = np.asarray(X, dtype=float)
    keep = stats.retained
    return (X[:, keep] - stats.mean[keep]) / stats.std[keep]


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def objective(X, y, beta, intercept, alpha) -> float:
    r = np.asarray(X) @ beta + intercept - np.asarray(y, dtype=float)
    return float(r @ r + alpha * np.abs(beta).sum())


@njit(cache=True, fastmath=True)
def _sweep(Z, r, beta, col_sq, half_alpha, active_only):
    max_delta = 0.0
    n, p = Z.shape
    for j in range(p):
        bj = beta[j]
        if active_only and bj == 0.0:
            continue
        cj = col_sq[j]
        if cj == 0.0:
            continue
        rho = cj * bj
        for i in range(n):
            rho += Z[i, j] * r[i]
        if rho > half_alpha:
            new = (rho - half_alpha) / cj
        elif rho < -half_alpha:
            new = (rho + half_alpha) / cj
        else:
            new = 0.0
        delta = new - bj
        if delta != 0.0:
            for i in range(n):
                r[i] -= Z[i, j] * delta
            beta[j] = new
            if abs(delta) > max_delta:
                max_delta = abs(delta)
    return max_delta


@njit(cache=True, fastmath=True)
def _l1(beta):
    a = 0.0
    for j in range(beta.shape[0]):
        a += abs(beta[j])
    return a


@njit(cache=True, fastmath=True)
def _active_phase(Z, r, beta, col_sq, alpha, tol, sweeps, max_sweeps, history):
    # Sweeps over the current non-zero set using the Gram matrix of those
    # columns: each update costs O(|active|) instead of O(n_rows).
    half_alpha = 0.5 * alpha
    active = np.flatnonzero(beta)
    a = active.shape[0]
    if a == 0:
        return sweeps
    Za = np.ascontiguousarray(Z[:, active])
    G = Za.T @ Za
    g = Za.T @ r
    b = beta[active].copy()
    b_start = b.copy()
    rss = 0.0
    for i in range(r.shape[0]):
        rss += r[i] * r[i]
    while sweeps < max_sweeps:
        max_delta = 0.0
        for q in range(a):
            bj = b[q]
            if bj == 0.0:
                continue
            cj = col_sq[active[q]]
            rho = g[q] + cj * bj
            if rho > half_alpha:
                new = (rho - half_alpha) / cj
            elif rho < -half_alpha:
                new = (rho + half_alpha) / cj
            else:
                new = 0.0
            delta = new - bj
            if delta != 0.0:
                rss += delta * (delta * cj - 2.0 * g[q])
                for k in range(a):
                    g[k] -= G[q, k] * delta
                b[q] = new
                if abs(delta) > max_delta:
                    max_delta = abs(delta)
        history[sweeps] = rss + alpha * _l1(b)
        sweeps += 1
        if max_delta < tol:
            break
    moved = b - b_start
    r -= Za @ moved
    for q in range(a):
        beta[active[q]] = b[q]
    return sweeps


@njit(cache=True, fastmath=True)
def _cd(Z, r, beta, col_sq, alpha, tol, max_sweeps, history):
    # Full cyclic sweeps alternate with runs of sweeps restricted to the
    # non-zero coefficients; convergence is only declared after a full sweep.
    half_alpha = 0.5 * alpha
    sweeps = 0
    while sweeps < max_sweeps:
        delta = _sweep(Z, r, beta, col_sq, half_alpha, False)
        history[sweeps] = r @ r + alpha * _l1(beta)
        sweeps += 1
        if delta < tol:
            return sweeps, True
        sweeps = _active_phase(Z, r, beta, col_sq, alpha, tol, sweeps, max_sweeps, history)
    return sweeps, False


@dataclass
class LassoFit:
    beta: np.ndarray
    intercept: float
    alpha: float
    sweeps: int
    converged: bool
    history: np.ndarray = field(repr=False)


def _check_xy(X, y):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float).reshape(-1)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionError(f"X has shape {X.shape} but y has {y.shape[0]} entries")
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise ValueError("X and y must be finite")
    return X, y


def coordinate_descent(X, y, alpha: float, tol: float = TOL, max_sweeps: int = MAX_SWEEPS,
                       beta0=None, warn: bool = True) -> LassoFit:
    """Minimise the penalised residual sum of squares by cyclic coordinate descent.

    Columns and ``y`` are centred internally, so the intercept is
    ``mean(y) - mean(X) @ beta`` (``mean(y)`` for centred ``X``). Iteration
    stops when no coefficient moves by ``tol`` or more during a full sweep,
    or after ``max_sweeps`` sweeps, in which case a
    :class:`ConvergenceWarning` is issued.
    """
    X, y = _check_xy(X, y)
    if alpha < 0:
        raise ValueError("alpha must be non-negative")
    xm = X.mean(axis=0)
    ym = y.mean()
    Z = np.asfortranarray(X - xm)
    beta = np.zeros(X.shape[1]) if beta0 is None else np.array(beta0, dtype=float)
    if X.shape[1] == 0 or alpha >= 2.0 * np.max(np.abs(Z.T @ (y - ym))):
        # kill condition: zero satisfies the optimality conditions exactly
        zero = np.zeros(X.shape[1])
        return LassoFit(zero, float(ym), float(alpha), 0, True, np.array([float((y - ym) @ (y - ym))]))
    r = (y - ym) - Z @ beta
    col_sq = np.einsum("ij,ij->j", Z, Z)
    history = np.empty(max_sweeps)
    sweeps, converged = _cd(Z, r, beta, col_sq, float(alpha), float(tol), int(max_sweeps), history)
    if not converged and warn:
        warnings.warn(f"coordinate descent did not converge in {max_sweeps} sweeps (alpha={alpha:g})",
                      ConvergenceWarning, stacklevel=2)
    return LassoFit(beta, float(ym - xm @ beta), float(alpha), int(sweeps), bool(converged),
                    history[:sweeps].copy())


def alpha_max(X, y) -> float:
    """Smallest ``alpha`` whose solution is identically zero: ``2 max_j |x_j.(y - ybar)|``."""
    X, y = _check_xy(X, y)
    Z = X - X.mean(axis=0)
    return float(2.0 * np.max(np.abs(Z.T @ (y - y.mean())))) if X.shape[1] else 0.0


def alpha_grid(X, y, size: int = 30, min_ratio: float = 1e-4) -> np.ndarray:
    """``size`` log-spaced values from ``min_ratio * alpha_max`` to ``alpha_max``, ascending."""
    top = alpha_max(X, y)
    if top == 0.0:
        return np.zeros(1)
    return np.geomspace(min_ratio * top, top, size)


def lasso_path(X, y, alphas, tol: float = TOL, max_sweeps: int = MAX_SWEEPS) -> list:
    """Fits for each alpha, warm-started from the next larger alpha.

    Returned in the order of ``alphas``.
    """
    alphas = np.asarray(alphas, dtype=float)
    order = np.argsort(-alphas, kind="stable")
    fits = [None] * len(alphas)
    beta = None
    for k in order:
        fit = coordinate_descent(X, y, alphas[k], tol=tol, max_sweeps=max_sweeps, beta0=beta, warn=False)
        beta = fit.beta
        fits[k] = fit
    bad = [f.alpha for f in fits if not f.converged]
    if bad:
        warnings.warn(f"coordinate descent did not converge for alpha in {bad}", ConvergenceWarning,
                      stacklevel=2)
    return fits


@dataclass
class CVResult:
    alphas: np.ndarray
    errors: np.ndarray
    nonzero: np.ndarray
    best_alpha: float

    @property
    def table(self) -> list:
        return list(zip(self.alphas.tolist(), self.errors.tolist()))


def canonical_order(X, y) -> np.ndarray:
    """Row permutation that depends only on row contents, not on input order.

    Rows are sorted lexicographically by ``(y, x_1, x_2, ...)``. Positive
    rescaling of a column preserves the order, so folds drawn after this
    sort are unaffected by feature units.
    """
    X, y = _check_xy(X, y)
    keys = [X[:, j] for j in range(X.shape[1] - 1, -1, -1)] + [y]
    return np.lexsort(keys).astype(int)


def fold_indices(n: int, k: int, seed: int) -> list:
    """Contiguous folds of a seeded permutation of ``range(n)``."""
    if k < 2:
        raise ValueError("need at least 2 folds")
    if k > n:
        raise ValueError(f"{k} folds for {n} rows")
    perm = derive_rng(seed, "folds").permutation(n)
    return np.array_split(perm, k)


def cross_validate_alpha(X, y, grid, k: int = 5, seed: int = 0, tol: float = TOL,
                         max_sweeps: int = MAX_SWEEPS) -> CVResult:
    """Pick alpha by k-fold mean held-out squared error (ties go to the larger alpha).

    Rows are first put in :func:`canonical_order`, so the result does not
    depend on the order of the input rows.
    """
    X, y = _check_xy(X, y)
    grid = np.asarray(grid, dtype=float).reshape(-1)
    if grid.size < 1:
        raise ValueError("empty alpha grid")
    order = canonical_order(X, y)
    X, y = X[order], y[order]
    folds = fold_indices(X.shape[0], k, seed)
    errors = np.zeros((k, grid.size))
    nonzero = np.zeros((k, grid.size))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        for f, test in enumerate(folds):
            train = np.setdiff1d(np.arange(X.shape[0]), test)
            fits = lasso_path(X[train], y[train], grid, tol=tol, max_sweeps=max_sweeps)
            for g, fit in enumerate(fits):
                resid = X[test] @ fit.beta + fit.intercept - y[test]
                errors[f, g] = np.mean(resid**2)
                nonzero[f, g] = np.count_nonzero(fit.beta)
    mean_err = errors.mean(axis=0)
    best = mean_err.min()
    best_alpha = float(grid[mean_err == best].max())
    return CVResult(grid, mean_err, nonzero.mean(axis=0), best_alpha)


@dataclass
class TrainConfig:
    alpha: float | None = None
    folds: int = 5
    grid_size: int = 30
    grid_min_ratio: float = 1e-4
    seed: int = 0
    tol: float = TOL
    max_sweeps: int = MAX_SWEEPS


@dataclass
class LassoModel:
    """Fitted model: coefficients act on standardised retained features."""

    names: list
    beta: np.ndarray
    intercept: float
    alpha: float
    stats: StandardizationStats
    cv: CVResult | None = None
    converged: bool = True

    @property
    def n_features(self) -> int:
        return len(self.names)

    def nonzero(self) -> int:
        return int(np.count_nonzero(self.beta))


def _default_names(p: int) -> list:
    return [f"x{j}" for j in range(p)]


def train(X, y, names=None, config: TrainConfig | None = None) -> LassoModel:
    """Standardise on the learning set, choose alpha by CV (unless given), fit.

    ``beta`` in the returned model has one entry per input column; dropped
    columns carry 0.
    """
    config = config or TrainConfig()
    X, y = _check_xy(X, y)
    names = list(names) if names is not None else _default_names(X.shape[1])
    if len(names) != X.shape[1]:
        raise DimensionError(f"{len(names)} names for {X.shape[1]} columns")
    classes, counts = np.unique(y, return_counts=True)
    if classes.size != 2 or counts.min() < 2:
        raise ValidationError(f"learning set needs at least 2 rows of each of two classes, got {dict(zip(classes.tolist(), counts.tolist()))}")
    order = canonical_order(X, y)
    X, y = X[order], y[order]
    stats = standardize_fit(X)
    Z = standardize_apply(stats, X)
    cv = None
    if config.alpha is None:
        grid = alpha_grid(Z, y, config.grid_size, config.grid_min_ratio)
        cv = cross_validate_alpha(Z, y, grid, k=config.folds, seed=config.seed, tol=config.tol,
                                  max_sweeps=config.max_sweeps)
        alpha = cv.best_alpha
    else:
        alpha = float(config.alpha)
    fit = coordinate_descent(Z, y, alpha, tol=config.tol, max_sweeps=config.max_sweeps)
    beta = np.zeros(X.shape[1])
    beta[stats.retained] = fit.beta
    return LassoModel(names, beta, fit.intercept, alpha, stats, cv, fit.converged)


def predict(model: LassoModel, X) -> np.ndarray:
    """Intercept plus coefficients times standardised features; not clipped."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise DimensionError(f"expected {model.n_features} features, got {X.shape[1]}")
    keep = model.stats.retained
    return standardize_apply(model.stats, X) @ model.beta[keep] + model.intercept


def _short(name: str) -> str:
    return name[len("sig_"):] if name.startswith("sig_") else name


def top_coefficients(model: LassoModel, n: int = 15) -> list:
    """Up to ``n`` non-zero coefficients by decreasing magnitude, as ``(word, beta)``."""
    nz = np.flatnonzero(model.beta)
    nz = nz[np.argsort(-np.abs(model.beta[nz]), kind="stable")]
    return [(_short(model.names[j]), float(model.beta[j])) for j in nz[:n]]


def save_model(path, model: LassoModel) -> None:
    """Line-oriented text: ``alpha=``, ``intercept=``, ``dropped=`` then ``word,mean,std,beta``."""
    dropped = ",".join(_short(model.names[j]) for j in model.stats.dropped)
    lines = [f"alpha={model.alpha!r}", f"intercept={model.intercept!r}", f"dropped={dropped}"]
    for j in model.stats.retained:
        lines.append(f"{_short(model.names[j])},{float(model.stats.mean[j])!r},"
                     f"{float(model.stats.std[j])!r},{float(model.beta[j])!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _word_key(short: str):
    try:
        w = parse_multi_index(short)
    except ValueError:
        return (1, 0, (), short)
    return (0, len(w), w, short)


def load_model(path) -> LassoModel:
    with open(path, encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    head = {}
    for ln in lines[:3]:
        key, _, value = ln.partition("=")
        head[key] = value
    if set(head) != {"alpha", "intercept", "dropped"}:
        raise ValueError(f"{path}: missing model header lines")
    dropped = [d for d in head["dropped"].split(",") if d]
    rows = {}
    for ln in lines[3:]:
        word, m, s, b = ln.split(",")
        rows[word] = (float(m), float(s), float(b))
    shorts = sorted(list(rows) + dropped, key=_word_key)
    prefix = "sig_" if all(_word_key(w)[0] == 0 for w in shorts) else ""
    p = len(shorts)
    mean, std, beta = np.zeros(p), np.zeros(p), np.zeros(p)
    dropped_idx = []
    for j, w in enumerate(shorts):
        if w in rows:
            mean[j], std[j], beta[j] = rows[w]
        else:
            dropped_idx.append(j)
    stats = StandardizationStats(mean, std, np.array(dropped_idx, dtype=int))
    return LassoModel([prefix + w for w in shorts], beta, float(head["intercept"]), float(head["alpha"]), stats)
