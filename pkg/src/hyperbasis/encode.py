"""Mapping input values onto basis hypervectors.

Indices are 0-based throughout: level ``i`` of a quantizer is grid point
``a + i * (b - a) / (m - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Sequence

import numpy as np

from .basis import BasisKind, BasisSet
from .hv import Hypervector, bind_all, bundle, nearest, permute

TWO_PI = 2.0 * math.pi


def _finite(x, what="value") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"{what} must be finite, got {x!r}")
    return x


def wrap_angle(theta: float) -> float:
    """Angle reduced to [0, 2*pi)."""
    w = math.fmod(_finite(theta, "angle"), TWO_PI)
    if w < 0:
        w += TWO_PI
    return 0.0 if w >= TWO_PI else w


@dataclass(frozen=True, eq=False)
class ScalarQuantizer:
    """Nearest-grid-point quantizer over ``[a, b]`` backed by an m-vector basis.

    Values outside the interval clamp to the nearest endpoint; a value
    exactly between two grid points goes to the lower one.
    """

    a: float
    b: float
    basis: BasisSet

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)) or not self.b > self.a:
            raise ValueError(f"need finite a < b, got a={self.a!r}, b={self.b!r}")
        if self.basis.m < 2:
            raise ValueError("a scalar quantizer needs at least two levels")

    @property
    def m(self) -> int:
        return self.basis.m

    @property
    def grid(self) -> np.ndarray:
        i = np.arange(self.m)
        return self.a + i * (self.b - self.a) / (self.m - 1)

    def value(self, index: int) -> float:
        return float(self.a + index * (self.b - self.a) / (self.m - 1))

    def quantize(self, x: float) -> int:
        return int(self.quantize_many([_finite(x)])[0])

    def quantize_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        if not np.isfinite(xs).all():
            raise ValueError("values must be finite")
        t = (xs - self.a) / (self.b - self.a) * (self.m - 1)
        return np.clip(np.ceil(t - 0.5), 0, self.m - 1).astype(np.int64)

    def encode(self, x: float) -> Hypervector:
        return self.basis[self.quantize(x)]


@dataclass(frozen=True, eq=False)
class AngleQuantizer:
    """Nearest of ``m`` equally spaced bin centres ``2*pi*i/m``, wrap-aware."""

    basis: BasisSet

    @property
    def m(self) -> int:
        return self.basis.m

    def center(self, index: int) -> float:
        return TWO_PI * index / self.m

    def quantize(self, theta: float) -> int:
        return int(self.quantize_many([_finite(theta, "angle")])[0])

    def quantize_many(self, thetas) -> np.ndarray:
        thetas = np.asarray(thetas, dtype=np.float64)
        if not np.isfinite(thetas).all():
            raise ValueError("angles must be finite")
        t = np.mod(thetas, TWO_PI) / TWO_PI * self.m
        return (np.ceil(t - 0.5).astype(np.int64)) % self.m

    def encode(self, theta: float) -> Hypervector:
        return self.basis[self.quantize(theta)]


def quantize_scalar(q: ScalarQuantizer, x: float) -> int:
    return q.quantize(x)


def encode_scalar(q: ScalarQuantizer, x: float) -> Hypervector:
    return q.encode(x)


def quantize_angle(q: AngleQuantizer, theta: float) -> int:
    return q.quantize(theta)


def encode_angle(q: AngleQuantizer, theta: float) -> Hypervector:
    return q.encode(theta)


@dataclass(frozen=True, eq=False)
class LabelCodec:
    """Invertible label encoding for regression.

    ``encode`` picks the level vector nearest a real label; ``decode`` maps
    any hypervector back to the grid value of its nearest level vector.
    """

    quantizer: ScalarQuantizer

    @property
    def basis(self) -> BasisSet:
        return self.quantizer.basis

    def encode_index(self, y: float) -> int:
        return self.quantizer.quantize(y)

    def encode(self, y: float) -> Hypervector:
        return self.quantizer.encode(y)

    def decode_index(self, v: Hypervector) -> int:
        if v.d != self.basis.d:
            raise ValueError(f"dimension mismatch: {self.basis.d} vs {v.d}")
        return nearest(self.basis.rows, v)

    def decode(self, v: Hypervector) -> float:
        return self.quantizer.value(self.decode_index(v))


def label_encode(codec: LabelCodec, y: float) -> Hypervector:
    return codec.encode(y)


def label_decode(codec: LabelCodec, v: Hypervector) -> float:
    return codec.decode(v)


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """One random basis vector per symbol of a fixed alphabet."""

    alphabet: tuple[Hashable, ...]
    basis: BasisSet
    tie_breaker: Hypervector | None = None
    _index: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "alphabet", tuple(self.alphabet))
        if len(set(self.alphabet)) != len(self.alphabet):
            raise ValueError("alphabet symbols must be distinct")
        if self.basis.m != len(self.alphabet):
            raise ValueError(f"basis has {self.basis.m} vectors for {len(self.alphabet)} symbols")
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(self.alphabet)})

    def index(self, symbol) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise KeyError(f"unknown symbol {symbol!r}") from None

    def encode(self, symbol) -> Hypervector:
        return self.basis[self.index(symbol)]


def encode_sequence(table: SymbolTable, word: Sequence) -> Hypervector:
    """Bundle of each symbol's vector cyclically shifted by its 1-based position."""
    if len(word) == 0:
        raise ValueError("cannot encode an empty sequence")
    parts = [permute(table.encode(s), i) for i, s in enumerate(word, start=1)]
    return bundle(parts, table.tie_breaker)


def encode_record(
    keys: BasisSet, values: Sequence[Hypervector], tie_breaker: Hypervector | None = None
) -> Hypervector:
    """Bundle of ``key_i xor value_i`` over the fields."""
    if not values:
        raise ValueError("a record needs at least one field")
    if len(values) > keys.m:
        raise ValueError(f"{len(values)} fields but only {keys.m} keys")
    if any(v.d != keys.d for v in values):
        raise ValueError("field vectors must match the key dimension")
    if keys.kind is not BasisKind.RANDOM:
        raise ValueError("record keys must be a random basis")
    return bundle([keys[i] ^ v for i, v in enumerate(values)], tie_breaker)


def encode_tuple(values: Sequence[Hypervector]) -> Hypervector:
    """XOR of all values; order does not matter."""
    if not values:
        raise ValueError("cannot encode an empty tuple")
    return bind_all(list(values))
