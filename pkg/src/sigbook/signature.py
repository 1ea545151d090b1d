"""Signatures of discrete streams and their low-order interpretations.

A stream is identified with the piecewise-linear path through its points,
so its signature is the ordered product of the exponentials of its
increments. Timestamps never enter the computation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InvalidStreamError
from .tensor_algebra import AlgebraParams, TruncatedTensor, _mul_exp_inplace

__all__ = [
    "Stream",
    "as_stream",
    "stream_signature",
    "batch_signature",
    "area",
    "second_order_area",
    "insert_collinear_points",
]


@dataclass(frozen=True, eq=False)
class Stream:
    """Time-stamped points in R^d.

    ``points`` has shape ``(N + 1, d)``; ``times`` is strictly increasing
    with the same length. When ``times`` is omitted the integers
    ``0..N`` are used.
    """

    points: np.ndarray
    times: np.ndarray = None

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2:
            raise InvalidStreamError(f"points must be 2-dimensional, got shape {pts.shape}")
        if pts.shape[0] < 2:
            raise InvalidStreamError(f"a stream needs at least 2 points, got {pts.shape[0]}")
        if pts.shape[1] < 1:
            raise InvalidStreamError("points must have at least one channel")
        if self.times is None:
            times = np.arange(pts.shape[0], dtype=float)
        else:
            times = np.array(self.times, dtype=float).reshape(-1)
            if times.shape[0] != pts.shape[0]:
                raise InvalidStreamError(
                    f"{times.shape[0]} timestamps for {pts.shape[0]} points"
                )
            if np.any(np.diff(times) <= 0):
                raise InvalidStreamError("timestamps must be strictly increasing")
        pts.setflags(write=False)
        times.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "times", times)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    def reversed(self) -> "Stream":
        """Same points traversed backwards (times keep their order)."""
        return Stream(self.points[::-1], self.times)

    def split(self, index: int) -> tuple:
        """Two streams sharing the point at ``index``."""
        if not 0 < index < len(self) - 1:
            raise InvalidStreamError(f"split index {index} must be interior")
        return (
            Stream(self.points[: index + 1], self.times[: index + 1]),
            Stream(self.points[index:], self.times[index:]),
        )


def as_stream(s) -> Stream:
    return s if isinstance(s, Stream) else Stream(s)


def stream_signature(s, depth: int) -> TruncatedTensor:
    """Depth-``depth`` signature of the piecewise-linear interpolant of ``s``.

    ``s`` may be a :class:`Stream` or an ``(N + 1, d)`` array of points.
    """
    s = as_stream(s)
    params = AlgebraParams(s.dim, depth)
    o = params.offsets
    levels = [np.zeros(o[k + 1] - o[k]) for k in range(depth + 1)]
    levels[0][0] = 1.0
    for v in np.diff(s.points, axis=0):
        _mul_exp_inplace(levels, v, depth)
    return TruncatedTensor(params, np.concatenate(levels))


def batch_signature(points, depth: int) -> np.ndarray:
    """Signatures of ``B`` equal-length streams given as a ``(B, N + 1, d)`` array.

    Returns the dense coefficients, shape ``(B, size)``. Each row is
    bitwise identical to ``stream_signature(points[b], depth).coeffs``.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 3 or pts.shape[1] < 2:
        raise InvalidStreamError(f"expected shape (B, N + 1 >= 2, d), got {pts.shape}")
    params = AlgebraParams(pts.shape[2], depth)
    o = params.offsets
    batch = pts.shape[0]
    levels = [np.zeros((batch, o[k + 1] - o[k])) for k in range(depth + 1)]
    levels[0][:, 0] = 1.0
    incs = np.diff(pts, axis=1)
    for step in range(incs.shape[1]):
        _mul_exp_inplace(levels, incs[:, step], depth)
    return np.concatenate(levels, axis=1)


def _check_pair(t: TruncatedTensor, i: int, j: int, min_depth: int) -> None:
    if i == j:
        raise DomainError(f"channels must differ, got i = j = {i}")
    for c in (i, j):
        if not 1 <= c <= t.width:
            raise DomainError(f"channel {c} outside 1..{t.width}")
    if t.depth < min_depth:
        raise DomainError(f"need depth >= {min_depth}, tensor has depth {t.depth}")


def area(t: TruncatedTensor, i: int, j: int) -> float:
    """Signed (Lévy) area ``(S[i,j] - S[j,i]) / 2`` of channels ``i``, ``j``.

    Positive when the curve in the (i, j) plane runs below its chord, e.g.
    one step right then one step up gives +1/2.
    """
    _check_pair(t, i, j, 2)
    return 0.5 * (t[(i, j)] - t[(j, i)])


def second_order_area(t: TruncatedTensor, i: int, j: int) -> float:
    """Area between channel ``i`` and the running area ``A^{i,j}``.

    Equals ``(S[i,i,j] - S[i,j,i]) / 2``.
    """
    _check_pair(t, i, j, 3)
    return 0.5 * (t[(i, i, j)] - t[(i, j, i)])


def insert_collinear_points(s, count: int, seed: int) -> Stream:
    """Subdivide randomly chosen segments without changing the traced path.

    Each of the ``count`` new points sits at a uniform random fraction along
    a uniformly chosen segment of the current stream; timestamps are
    interpolated the same way.
    """
    s = as_stream(s)
    rng = np.random.default_rng(seed)
    points = [row for row in s.points]
    times = list(s.times)
    for _ in range(count):
        k = int(rng.integers(len(points) - 1))
        frac = rng.uniform(0.0, 1.0)
        new_pt = points[k] + frac * (points[k + 1] - points[k])
        new_t = times[k] + frac * (times[k + 1] - times[k])
        if not times[k] < new_t < times[k + 1]:
            new_t = 0.5 * (times[k] + times[k + 1])
        points.insert(k + 1, new_pt)
        times.insert(k + 1, new_t)
    return Stream(np.array(points), np.array(times))
