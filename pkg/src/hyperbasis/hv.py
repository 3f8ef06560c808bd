"""Bit-packed binary hypervectors and the three HDC operations.

Hypervectors are immutable; every operation returns a new vector.  Bits are
packed LSB-first into little-endian ``uint64`` words (see ``kernels``).
"""

from __future__ import annotations

import struct
from typing import Iterable, Sequence

import numpy as np

from . import kernels


class DimensionError(ValueError):
    """Raised when hypervectors of different dimensionality are combined."""


def _check_dim(d) -> int:
    if isinstance(d, bool) or int(d) != d or d < 1:
        raise ValueError(f"dimension must be a positive integer, got {d!r}")
    return int(d)


def _tail_mask(d: int) -> np.uint64:
    rem = d % 64
    return np.uint64(0xFFFFFFFFFFFFFFFF if rem == 0 else (1 << rem) - 1)


class Hypervector:
    """A dense ``d``-dimensional binary vector.

    Construct with :meth:`from_bits`, :meth:`from_words` or
    :func:`random_hypervector` rather than directly.
    """

    __slots__ = ("_words", "_d")

    def __init__(self, words: np.ndarray, d: int):
        d = _check_dim(d)
        w = np.array(words, dtype=np.uint64, copy=True).reshape(-1)
        if w.shape[0] != kernels.n_words(d):
            raise ValueError(f"expected {kernels.n_words(d)} words for d={d}, got {w.shape[0]}")
        w[-1] &= _tail_mask(d)
        w.flags.writeable = False
        self._words = w
        self._d = d

    @property
    def d(self) -> int:
        return self._d

    @property
    def words(self) -> np.ndarray:
        """Read-only packed words."""
        return self._words

    @classmethod
    def from_words(cls, words, d: int) -> Hypervector:
        return cls(words, d)

    @classmethod
    def from_bits(cls, bits) -> Hypervector:
        bits = np.asarray(bits)
        if bits.ndim != 1 or bits.shape[0] < 1:
            raise ValueError("bits must be a non-empty 1-D sequence")
        if not np.isin(bits, (0, 1)).all():
            raise ValueError("bits must be 0 or 1")
        return cls(kernels.pack(bits), bits.shape[0])

    @classmethod
    def zeros(cls, d: int) -> Hypervector:
        d = _check_dim(d)
        return cls(np.zeros(kernels.n_words(d), dtype=np.uint64), d)

    def bits(self) -> np.ndarray:
        return kernels.unpack(self._words, self._d)

    def popcount(self) -> int:
        return int(np.bitwise_count(self._words).sum())

    def complement(self) -> Hypervector:
        return Hypervector(~self._words, self._d)

    def __len__(self) -> int:
        return self._d

    def __getitem__(self, j: int) -> int:
        if not -self._d <= j < self._d:
            raise IndexError(j)
        j %= self._d
        return int((int(self._words[j >> 6]) >> (j & 63)) & 1)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypervector):
            return NotImplemented
        return self._d == other._d and bool(np.array_equal(self._words, other._words))

    def __hash__(self) -> int:
        return hash((self._d, self._words.tobytes()))

    def __xor__(self, other: Hypervector) -> Hypervector:
        return bind(self, other)

    def __repr__(self) -> str:
        head = self.to_string()[:16]
        return f"Hypervector(d={self._d}, bits={head}{'...' if self._d > 16 else ''})"

    # serialization

    def to_bytes(self) -> bytes:
        """``uint64`` bit count followed by the packed little-endian words."""
        return struct.pack("<Q", self._d) + self._words.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> Hypervector:
        vec, _ = cls.read_from(data, offset)
        return vec

    @classmethod
    def read_from(cls, data: bytes, offset: int = 0) -> tuple[Hypervector, int]:
        """Decode one vector at ``offset``; returns it and the next offset."""
        if len(data) - offset < 8:
            raise ValueError("truncated hypervector header")
        (d,) = struct.unpack_from("<Q", data, offset)
        nw = kernels.n_words(_check_dim(d))
        start = offset + 8
        end = start + 8 * nw
        if len(data) < end:
            raise ValueError("truncated hypervector payload")
        words = np.frombuffer(data, dtype="<u8", count=nw, offset=start)
        if words[-1] & ~_tail_mask(d):
            raise ValueError("padding bits past d must be zero")
        return cls(words, d), end

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits())

    @classmethod
    def from_string(cls, text: str) -> Hypervector:
        text = text.strip()
        if not text or set(text) - {"0", "1"}:
            raise ValueError("expected a non-empty string of '0'/'1' characters")
        return cls.from_bits(np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0"))


def random_hypervector(d: int, rng: np.random.Generator) -> Hypervector:
    """Uniform sample from {0,1}^d drawn from ``rng``."""
    d = _check_dim(d)
    words = rng.integers(0, 2**64, size=kernels.n_words(d), dtype=np.uint64, endpoint=False)
    return Hypervector(words, d)


def _same_dim(*vectors: Hypervector) -> int:
    d = vectors[0].d
    for v in vectors[1:]:
        if v.d != d:
            raise DimensionError(f"dimension mismatch: {d} vs {v.d}")
    return d


def bind(a: Hypervector, b: Hypervector) -> Hypervector:
    """Element-wise XOR."""
    d = _same_dim(a, b)
    return Hypervector(np.bitwise_xor(a.words, b.words), d)


def bind_all(vectors: Sequence[Hypervector]) -> Hypervector:
    if not vectors:
        raise ValueError("nothing to bind")
    d = _same_dim(*vectors)
    out = np.bitwise_xor.reduce(np.stack([v.words for v in vectors]), axis=0)
    return Hypervector(out, d)


def permute(a: Hypervector, shift: int) -> Hypervector:
    """Cyclic shift: bit ``j`` moves to ``(j + shift) mod d``."""
    shift = int(shift) % a.d
    if shift == 0:
        return a
    return Hypervector(kernels.pack(np.roll(a.bits(), shift)), a.d)


def hamming_distance(a: Hypervector, b: Hypervector) -> float:
    """Normalized Hamming distance in [0, 1]."""
    d = _same_dim(a, b)
    return kernels.popcount_xor(a.words, b.words) / d


def similarity(a: Hypervector, b: Hypervector) -> float:
    return 1.0 - hamming_distance(a, b)


def stack_words(vectors: Sequence[Hypervector]) -> np.ndarray:
    """C-contiguous ``(len(vectors), n_words)`` array for batch kernels."""
    _same_dim(*vectors)
    return np.ascontiguousarray(np.stack([v.words for v in vectors]))


def distances_to(rows: np.ndarray, query: Hypervector) -> np.ndarray:
    """Bit-count distances from each packed row to ``query``."""
    return kernels.popcount_xor_rows(rows, query.words)


def nearest(rows: np.ndarray, query: Hypervector) -> int:
    """Index of the row nearest ``query``; ties go to the lowest index."""
    return int(np.argmin(distances_to(rows, query)))


class BundleAccumulator:
    """Signed per-bit vote counts for incremental majority bundling.

    ``counts[j]`` is (#ones - #zeros) added at position ``j``.  Single
    writer; combine parallel partial accumulators with :meth:`merge`.
    """

    def __init__(self, d: int):
        self.d = _check_dim(d)
        self.counts = np.zeros(self.d, dtype=np.int64)
        self.n_added = 0

    def add(self, vector: Hypervector) -> BundleAccumulator:
        if vector.d != self.d:
            raise DimensionError(f"dimension mismatch: {self.d} vs {vector.d}")
        kernels.accumulate_rows(self.counts, vector.words.reshape(1, -1), self.d)
        self.n_added += 1
        return self

    def add_rows(self, rows: np.ndarray) -> BundleAccumulator:
        """Add a batch of packed rows, e.g. from :func:`stack_words`."""
        rows = np.ascontiguousarray(rows, dtype=np.uint64)
        if rows.ndim != 2 or rows.shape[1] != kernels.n_words(self.d):
            raise DimensionError("packed rows do not match accumulator dimension")
        kernels.accumulate_rows(self.counts, rows, self.d)
        self.n_added += rows.shape[0]
        return self

    def extend(self, vectors: Iterable[Hypervector]) -> BundleAccumulator:
        vectors = list(vectors)
        if vectors:
            if vectors[0].d != self.d:
                raise DimensionError(f"dimension mismatch: {self.d} vs {vectors[0].d}")
            self.add_rows(stack_words(vectors))
        return self

    def merge(self, other: BundleAccumulator) -> BundleAccumulator:
        if other.d != self.d:
            raise DimensionError(f"dimension mismatch: {self.d} vs {other.d}")
        self.counts += other.counts
        self.n_added += other.n_added
        return self

    def copy(self) -> BundleAccumulator:
        acc = BundleAccumulator(self.d)
        acc.counts[:] = self.counts
        acc.n_added = self.n_added
        return acc

    def has_ties(self) -> bool:
        return bool((self.counts == 0).any())

    def finalize(self, tie_breaker: Hypervector | None = None) -> Hypervector:
        """Majority vector; zero counts take the tie-breaker's bit.

        Raises if the accumulator is empty, or if a tie occurs and no
        tie-breaker was given.
        """
        if self.n_added == 0:
            raise ValueError("cannot finalize an empty accumulator")
        if tie_breaker is None:
            if self.has_ties():
                raise ValueError("tied positions require a tie_breaker hypervector")
            tie = np.zeros(kernels.n_words(self.d), dtype=np.uint64)
        else:
            if tie_breaker.d != self.d:
                raise DimensionError(f"dimension mismatch: {self.d} vs {tie_breaker.d}")
            tie = tie_breaker.words
        return Hypervector(kernels.majority_words(self.counts, tie, self.d), self.d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BundleAccumulator):
            return NotImplemented
        return (
            self.d == other.d
            and self.n_added == other.n_added
            and bool(np.array_equal(self.counts, other.counts))
        )


def bundle(operands: Sequence[Hypervector], tie_breaker: Hypervector | None = None) -> Hypervector:
    """Element-wise majority of ``operands``.

    Even operand counts can tie; tied positions copy ``tie_breaker``.
    """
    if not operands:
        raise ValueError("bundle needs at least one operand")
    d = _same_dim(*operands)
    return BundleAccumulator(d).add_rows(stack_words(operands)).finalize(tie_breaker)
