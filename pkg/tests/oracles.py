"""Independent reference implementations used only by the tests."""
from fractions import Fraction
from itertools import product

import numpy as np
from numpy.polynomial import Polynomial


def iterated_integrals(points, depth):
    """Signature coefficients of the piecewise-linear path, from the definition.

    On each segment ``X(s) = X_k + s * dX``, ``s`` in [0, 1], so the running
    integral of a word ``I = (J, i)`` is ``S^I(start) + dX_i * int_0^s S^J``.
    Each running integral is an exact polynomial in ``s``. Returns a dict
    keyed by 1-based word tuples (the empty word included).
    """
    points = np.asarray(points, dtype=float)
    d = points.shape[1]
    words = [()]
    for k in range(1, depth + 1):
        words += [tuple(w) for w in product(range(1, d + 1), repeat=k)]
    value = {w: 0.0 for w in words}
    value[()] = 1.0
    for a, b in zip(points[:-1], points[1:]):
        dx = b - a
        poly = {(): Polynomial([1.0])}
        for w in words[1:]:
            run = poly[w[:-1]].integ(lbnd=0.0) * dx[w[-1] - 1]
            poly[w] = run + value[w]
        for w in words[1:]:
            value[w] = float(poly[w](1.0))
    return value


def ks_bruteforce(a, b):
    """Exact max ECDF gap as a Fraction, and the smallest pooled value attaining it."""
    a, b = list(a), list(b)
    best, where = Fraction(-1), None
    for t in sorted(set(a) | set(b)):
        fa = Fraction(sum(x <= t for x in a), len(a))
        fb = Fraction(sum(x <= t for x in b), len(b))
        gap = abs(fa - fb)
        if gap > best:
            best, where = gap, t
    return best, where


def auc_bruteforce(scores0, scores1):
    wins = sum((s1 > s0) + Fraction(1, 2) * (s1 == s0) for s0 in scores0 for s1 in scores1)
    return Fraction(wins) / (len(scores0) * len(scores1))


def lasso_grid_oracle(Z, y, alpha, lo=-1.0, hi=1.0, steps=101):
    """Minimum of ``sum((Zb + mean(y) - y)^2) + alpha * |b|_1`` over a dense coefficient grid.

    ``Z`` must have centred columns so the optimal intercept is ``mean(y)``.
    """
    yc = y - y.mean()
    G = Z.T @ Z
    g = Z.T @ yc
    c = yc @ yc
    axis = np.linspace(lo, hi, steps)
    best = np.inf
    p = Z.shape[1]
    grids = np.meshgrid(*([axis] * p), indexing="ij")
    B = np.stack([m.ravel() for m in grids], axis=1)
    for start in range(0, B.shape[0], 200_000):
        chunk = B[start:start + 200_000]
        vals = c - 2 * chunk @ g + np.einsum("ij,jk,ik->i", chunk, G, chunk) + alpha * np.abs(chunk).sum(axis=1)
        best = min(best, float(vals.min()))
    return best
