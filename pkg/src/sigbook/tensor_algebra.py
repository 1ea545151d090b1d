"""Truncated free tensor algebra over the alphabet {1, ..., d}.

Elements are stored densely: one float per word, words ordered by length
and then lexicographically. Level ``k`` occupies a contiguous block of
``d**k`` coefficients, laid out in C order so that ``np.outer`` of two
flattened levels is exactly the flattened level of their concatenation.
Letters are 1-based throughout the public API.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionError, DomainError, TruncationError

__all__ = [
    "AlgebraParams",
    "TruncatedTensor",
    "feature_count",
    "multi_indices",
    "word_offset",
    "format_multi_index",
    "parse_multi_index",
    "concat_product",
    "concat_exp",
    "exp_of_increment",
    "exp",
    "log",
    "shuffle_product",
    "get_coefficient",
]

#: Tolerance on the degree-0 coefficient accepted by :func:`log`.
LOG_UNIT_TOL = 1e-9


@dataclass(frozen=True)
class AlgebraParams:
    """Width (alphabet size) and truncation depth of a tensor algebra."""

    width: int
    depth: int

    def __post_init__(self):
        if int(self.width) != self.width or self.width < 1:
            raise DomainError(f"width must be a positive integer, got {self.width!r}")
        if int(self.depth) != self.depth or self.depth < 1:
            raise DomainError(f"depth must be a positive integer, got {self.depth!r}")

    @cached_property
    def offsets(self) -> tuple:
        """Start offset of each level, with a final sentinel (total size)."""
        out = [0]
        for k in range(self.depth + 1):
            out.append(out[-1] + self.width**k)
        return tuple(out)

    @property
    def size(self) -> int:
        """Number of stored coefficients, degree 0 included."""
        return self.offsets[-1]


def feature_count(params: AlgebraParams) -> int:
    """Number of words of length 1..depth, i.e. ``sum(d**k)``."""
    return params.size - 1


def multi_indices(params: AlgebraParams, include_empty: bool = True) -> list:
    """All words in canonical order, as tuples of 1-based letters."""
    letters = range(1, params.width + 1)
    start = 0 if include_empty else 1
    return [w for k in range(start, params.depth + 1) for w in product(letters, repeat=k)]


def _check_word(word: Sequence[int], params: AlgebraParams) -> tuple:
    word = tuple(int(i) for i in word)
    if len(word) > params.depth:
        raise IndexError(f"word {word} is longer than depth {params.depth}")
    for i in word:
        if not 1 <= i <= params.width:
            raise IndexError(f"letter {i} outside alphabet 1..{params.width}")
    return word


def word_offset(word: Sequence[int], params: AlgebraParams) -> int:
    """Position of ``word`` in the dense coefficient vector."""
    word = _check_word(word, params)
    pos = 0
    for i in word:
        pos = pos * params.width + (i - 1)
    return params.offsets[len(word)] + pos


def format_multi_index(word: Iterable[int]) -> str:
    """Render a word with letters joined by dots, e.g. ``"1.5.1.5"``."""
    return ".".join(str(int(i)) for i in word)


def parse_multi_index(text: str) -> tuple:
    """Inverse of :func:`format_multi_index`."""
    text = text.strip()
    if not text:
        return ()
    return tuple(int(part) for part in text.split("."))


class TruncatedTensor:
    """An element of the truncated tensor algebra.

    Instances are immutable: the coefficient buffer is marked read-only.
    Index with a word (tuple of letters) to read a coefficient.
    """

    __slots__ = ("params", "coeffs")

    def __init__(self, params: AlgebraParams, coeffs):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (params.size,):
            raise DimensionError(
                f"expected {params.size} coefficients for {params}, got shape {coeffs.shape}"
            )
        coeffs.setflags(write=False)
        self.params = params
        self.coeffs = coeffs

    @classmethod
    def unit(cls, params: AlgebraParams) -> "TruncatedTensor":
        c = np.zeros(params.size)
        c[0] = 1.0
        return cls(params, c)

    @classmethod
    def zero(cls, params: AlgebraParams) -> "TruncatedTensor":
        return cls(params, np.zeros(params.size))

    @property
    def width(self) -> int:
        return self.params.width

    @property
    def depth(self) -> int:
        return self.params.depth

    def level(self, k: int) -> np.ndarray:
        """Level ``k`` as an array of shape ``(width,) * k``."""
        if not 0 <= k <= self.depth:
            raise IndexError(f"level {k} outside 0..{self.depth}")
        o = self.params.offsets
        return self.coeffs[o[k]:o[k + 1]].reshape((self.width,) * k)

    def features(self) -> np.ndarray:
        """Coefficients of words of length >= 1, in canonical order."""
        return self.coeffs[1:]

    def __getitem__(self, word) -> float:
        return get_coefficient(self, word)

    def _coerce(self, other):
        if not isinstance(other, TruncatedTensor):
            return NotImplemented
        if other.params != self.params:
            raise DimensionError(f"mismatched algebras {self.params} and {other.params}")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedTensor(self.params, self.coeffs + other.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedTensor(self.params, self.coeffs - other.coeffs)

    def __neg__(self):
        return TruncatedTensor(self.params, -self.coeffs)

    def __mul__(self, scalar):
        if isinstance(scalar, TruncatedTensor):
            return NotImplemented
        return TruncatedTensor(self.params, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def __matmul__(self, other):
        return concat_product(self, other)

    def __eq__(self, other):
        if not isinstance(other, TruncatedTensor):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.coeffs, other.coeffs)

    __hash__ = None

    def allclose(self, other: "TruncatedTensor", atol: float = 1e-12, rtol: float = 0.0) -> bool:
        other = self._coerce(other)
        return bool(np.allclose(self.coeffs, other.coeffs, atol=atol, rtol=rtol))

    def __repr__(self):
        return f"TruncatedTensor(width={self.width}, depth={self.depth}, coeffs={self.coeffs!r})"


def _levels(t: TruncatedTensor) -> list:
    o = t.params.offsets
    return [t.coeffs[o[k]:o[k + 1]] for k in range(t.depth + 1)]


def _product_levels(a: list, b: list, depth: int) -> list:
    out = []
    for n in range(depth + 1):
        acc = a[0][0] * b[n]
        for k in range(1, n + 1):
            acc = acc + np.outer(a[k], b[n - k]).ravel()
        out.append(acc)
    return out


def concat_product(a: TruncatedTensor, b: TruncatedTensor) -> TruncatedTensor:
    """Truncated tensor (concatenation) product ``a ⊗ b``.

    The coefficient of a word ``I`` is the sum of ``a[J] * b[K]`` over all
    splittings ``I = J K``; words longer than the depth are discarded.
    """
    if a.params != b.params:
        raise DimensionError(f"mismatched algebras {a.params} and {b.params}")
    levels = _product_levels(_levels(a), _levels(b), a.depth)
    return TruncatedTensor(a.params, np.concatenate(levels))


def _mul_exp_inplace(levels: list, v: np.ndarray, depth: int) -> None:
    # Horner form of t ⊗ exp(v), highest level first so lower levels are still old.
    # Leading axes of ``levels[k]`` and ``v`` are batch axes.
    batch = v.shape[:-1]
    for n in range(depth, 0, -1):
        tmp = levels[0] * (v / n)
        for k in range(1, n):
            tmp = ((levels[k] + tmp)[..., :, None] * (v / (n - k))[..., None, :]).reshape(batch + (-1,))
        levels[n] = levels[n] + tmp


def _as_increment(v, width: int) -> np.ndarray:
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape != (width,):
        raise DimensionError(f"increment must have {width} entries, got {v.shape[0]}")
    return v


def concat_exp(t: TruncatedTensor, v) -> TruncatedTensor:
    """``t ⊗ exp_of_increment(v)`` without forming the exponential."""
    v = _as_increment(v, t.width)
    levels = [lv.copy() for lv in _levels(t)]
    _mul_exp_inplace(levels, v, t.depth)
    return TruncatedTensor(t.params, np.concatenate(levels))


def exp_of_increment(v, params: AlgebraParams) -> TruncatedTensor:
    """Signature of a straight segment with total increment ``v``.

    The coefficient of ``(i_1, ..., i_k)`` is ``v[i_1] * ... * v[i_k] / k!``.
    """
    v = _as_increment(v, params.width)
    levels = [np.ones(1)]
    for k in range(1, params.depth + 1):
        levels.append(np.multiply.outer(levels[-1], v / k).ravel())
    return TruncatedTensor(params, np.concatenate(levels))


def exp(t: TruncatedTensor) -> TruncatedTensor:
    """Truncated tensor exponential of an element with zero constant term."""
    if t.coeffs[0] != 0.0:
        raise DomainError("exp expects a tensor with zero degree-0 coefficient")
    result = TruncatedTensor.unit(t.params)
    power = TruncatedTensor.unit(t.params)
    for n in range(1, t.depth + 1):
        power = concat_product(power, t) * (1.0 / n)
        result = result + power
    return result


def log(t: TruncatedTensor) -> TruncatedTensor:
    """Truncated tensor logarithm of an element with constant term 1.

    Inputs whose constant term is within ``LOG_UNIT_TOL`` of 1 are first
    divided by it; anything further away raises :class:`DomainError`.
    """
    c0 = t.coeffs[0]
    if abs(c0 - 1.0) > LOG_UNIT_TOL:
        raise DomainError(f"log requires degree-0 coefficient 1, got {c0!r}")
    if c0 != 1.0:
        t = t * (1.0 / c0)
    x = t - TruncatedTensor.unit(t.params)
    result = TruncatedTensor.zero(t.params)
    power = TruncatedTensor.unit(t.params)
    for n in range(1, t.depth + 1):
        power = concat_product(power, x)
        sign = 1.0 if n % 2 else -1.0
        result = result + power * (sign / n)
    return result


def shuffle_product(left: Sequence[int], right: Sequence[int], depth: int | None = None) -> list:
    """All riffle shuffles of two words, with multiplicity.

    For any signature ``S``, ``S[left] * S[right]`` equals the sum of
    ``S[w]`` over the returned words.
    """
    left, right = tuple(left), tuple(right)
    if depth is not None and len(left) + len(right) > depth:
        raise TruncationError(
            f"shuffle of lengths {len(left)} and {len(right)} exceeds depth {depth}"
        )
    return _shuffle(left, right)


def _shuffle(u: tuple, v: tuple) -> list:
    if not u:
        return [v]
    if not v:
        return [u]
    return [(u[0],) + w for w in _shuffle(u[1:], v)] + [(v[0],) + w for w in _shuffle(u, v[1:])]


def get_coefficient(t: TruncatedTensor, word) -> float:
    """Coefficient of ``word``; the empty word gives the constant term."""
    if isinstance(word, (int, np.integer)):
        word = (word,)
    return float(t.coeffs[word_offset(word, t.params)])
