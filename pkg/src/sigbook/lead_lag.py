"""Lead, lag and partial lead-lag transforms of streams.

Both transforms double every interior point, so their piecewise-linear
paths are reparameterisations of the original one and have the same
signature. Pairing lead channels with lagged copies makes the antisymmetric
degree-2 terms equal to (cross-)quadratic variations::

    S[a, b'] - S[b', a] == sum_k dx^a_k * dx^b_k

where ``b'`` is the lagged copy of channel ``b``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, LeadLagSpecError
from .signature import Stream, as_stream

__all__ = [
    "LeadLagSpec",
    "lead_transform",
    "lag_transform",
    "partial_lead_lag",
    "lead_lag_transform",
    "cross_variation",
]


@dataclass(frozen=True)
class LeadLagSpec:
    """Channels (1-based) whose lagged copies are appended after the lead channels."""

    lag_channels: tuple = ()

    def __post_init__(self):
        chans = tuple(int(c) for c in self.lag_channels)
        if len(set(chans)) != len(chans):
            raise LeadLagSpecError(f"duplicate lag channels in {chans}")
        object.__setattr__(self, "lag_channels", chans)

    def validate(self, dim: int) -> None:
        for c in self.lag_channels:
            if not 1 <= c <= dim:
                raise LeadLagSpecError(f"lag channel {c} outside 1..{dim}")

    def output_dim(self, dim: int) -> int:
        return dim + len(self.lag_channels)


def _lead_points(x: np.ndarray) -> np.ndarray:
    # j = 2i and j = 2i - 1 both take x_i: [x0, x1, x1, x2, x2, ...]
    return np.concatenate([x[:1], np.repeat(x[1:], 2, axis=0)])


def _lag_points(x: np.ndarray) -> np.ndarray:
    # j = 2i and j = 2i + 1 both take x_i: [x0, x0, x1, x1, ..., xN]
    return np.concatenate([np.repeat(x[:-1], 2, axis=0), x[-1:]])


def _synthetic_times(n_points: int) -> np.ndarray:
    return np.arange(2 * n_points - 1, dtype=float)


def lead_transform(s) -> Stream:
    """Lead-transformed stream of ``2N + 1`` points on times ``0..2N``."""
    s = as_stream(s)
    return Stream(_lead_points(s.points), _synthetic_times(len(s)))


def lag_transform(s) -> Stream:
    """Lag-transformed stream of ``2N + 1`` points on times ``0..2N``."""
    s = as_stream(s)
    return Stream(_lag_points(s.points), _synthetic_times(len(s)))


def partial_lead_lag(s, spec) -> Stream:
    """Lead transform of all channels followed by lag transforms of selected ones.

    ``spec`` is a :class:`LeadLagSpec` or an iterable of 1-based channels.
    """
    s = as_stream(s)
    if not isinstance(spec, LeadLagSpec):
        spec = LeadLagSpec(tuple(spec))
    spec.validate(s.dim)
    lead = _lead_points(s.points)
    if spec.lag_channels:
        idx = [c - 1 for c in spec.lag_channels]
        lag = _lag_points(s.points[:, idx])
        lead = np.hstack([lead, lag])
    return Stream(lead, _synthetic_times(len(s)))


def lead_lag_transform(s) -> Stream:
    """Full lead-lag stream in R^{2d}."""
    s = as_stream(s)
    return partial_lead_lag(s, LeadLagSpec(tuple(range(1, s.dim + 1))))


def cross_variation(s, i: int, j: int) -> float:
    """Realised cross-variation ``sum_k dx^i_k dx^j_k`` of channels ``i``, ``j``."""
    s = as_stream(s)
    for c in (i, j):
        if not 1 <= c <= s.dim:
            raise DomainError(f"channel {c} outside 1..{s.dim}")
    inc = np.diff(s.points, axis=0)
    return float(np.dot(inc[:, i - 1], inc[:, j - 1]))
