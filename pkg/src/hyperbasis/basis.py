"""Random, level and circular basis-hypervector sets.

Level sets use threshold filters: two random endpoints and a uniform filter
``phi``; level ``l`` copies each bit from the first endpoint where
``phi < tau_l`` and from the far endpoint elsewhere.  The ``r`` knob
concatenates shorter level runs, each starting at the previous run's last
vector, so ``r=0`` is a single run and ``r=1`` is a fully random set.

Circular sets are built in two halves: a level run from ``C_1`` to the
opposite point ``C_{m/2+1}``, then the same per-step transitions replayed in
order to walk back to ``C_1``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import kernels
from .hv import Hypervector, bind, bind_all, random_hypervector, stack_words


class BasisKind(enum.Enum):
    RANDOM = "random"
    LEVEL = "level"
    CIRCULAR = "circular"

    @classmethod
    def parse(cls, value) -> BasisKind:
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown basis kind {value!r}; expected one of "
                + ", ".join(k.value for k in cls)
            ) from None


_KIND_CODES = {BasisKind.RANDOM: 0, BasisKind.LEVEL: 1, BasisKind.CIRCULAR: 2}
_MAGIC = b"HBBS"
_HEADER = struct.Struct("<4sHBxIQdQ")


@dataclass(frozen=True, eq=False)
class BasisSet:
    kind: BasisKind
    m: int
    d: int
    r: float
    seed: int
    vectors: tuple[Hypervector, ...]

    def __post_init__(self):
        if len(self.vectors) != self.m:
            raise ValueError(f"expected {self.m} vectors, got {len(self.vectors)}")
        if any(v.d != self.d for v in self.vectors):
            raise ValueError("all basis vectors must have dimension d")

    def __len__(self) -> int:
        return self.m

    def __getitem__(self, i: int) -> Hypervector:
        return self.vectors[i]

    def __iter__(self):
        return iter(self.vectors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BasisSet):
            return NotImplemented
        return (
            (self.kind, self.m, self.d, self.r, self.seed)
            == (other.kind, other.m, other.d, other.r, other.seed)
            and bool(np.array_equal(self.rows, other.rows))
        )

    @cached_property
    def rows(self) -> np.ndarray:
        """Packed vectors as an ``(m, n_words)`` array."""
        out = stack_words(self.vectors)
        out.flags.writeable = False
        return out

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(
            _MAGIC, 1, _KIND_CODES[self.kind], self.m, self.d, float(self.r), self.seed
        )
        return head + self.rows.astype("<u8").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0) -> BasisSet:
        basis, _ = cls.read_from(data, offset)
        return basis

    @classmethod
    def read_from(cls, data: bytes, offset: int = 0) -> tuple[BasisSet, int]:
        if len(data) - offset < _HEADER.size:
            raise ValueError("truncated basis header")
        magic, version, code, m, d, r, seed = _HEADER.unpack_from(data, offset)
        if magic != _MAGIC or version != 1:
            raise ValueError("not a basis container (bad magic or version)")
        kind = {v: k for k, v in _KIND_CODES.items()}.get(code)
        if kind is None:
            raise ValueError(f"unknown basis kind code {code}")
        nw = kernels.n_words(d)
        start = offset + _HEADER.size
        end = start + 8 * nw * m
        if len(data) < end:
            raise ValueError("truncated basis payload")
        rows = np.frombuffer(data, dtype="<u8", count=nw * m, offset=start).reshape(m, nw)
        vectors = tuple(Hypervector(row, d) for row in rows)
        return cls(kind, m, d, r, seed, vectors), end

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def load(cls, path) -> BasisSet:
        return cls.from_bytes(Path(path).read_bytes())


def _check_common(m, d, r):
    if int(m) != m or m < 1:
        raise ValueError(f"set size m must be a positive integer, got {m!r}")
    if int(d) != d or d < 1:
        raise ValueError(f"dimension d must be a positive integer, got {d!r}")
    if not (0.0 <= r <= 1.0):
        raise ValueError(f"r must lie in [0, 1], got {r!r}")


def _blend(start: Hypervector, far: Hypervector, phi: np.ndarray, tau: float) -> Hypervector:
    mask = kernels.threshold_mask(phi, tau)
    return Hypervector((start.words & mask) | (far.words & ~mask), start.d)


def transitions_per_run(m: int, r: float) -> int:
    """Transitions per concatenated level run: ``r + (1 - r)(m - 1)``.

    Fractional values are rounded half-to-even and clamped to at least 1.
    """
    return max(1, round(r + (1.0 - r) * (m - 1)))


def _interpolated_levels(m: int, d: int, n: int, rng: np.random.Generator) -> list[Hypervector]:
    out = [random_hypervector(d, rng)]
    while len(out) < m:
        start = out[-1]
        far = random_hypervector(d, rng)
        phi = rng.random(d)
        for k in range(1, n + 1):
            if len(out) == m:
                break
            out.append(far if k == n else _blend(start, far, phi, (n - k) / n))
    return out


def generate_random_set(m: int, d: int, seed: int) -> BasisSet:
    _check_common(m, d, 1.0)
    rng = np.random.default_rng(seed)
    vectors = tuple(random_hypervector(d, rng) for _ in range(m))
    return BasisSet(BasisKind.RANDOM, m, d, 1.0, seed, vectors)


def generate_level_set(m: int, d: int, seed: int) -> BasisSet:
    """Level set with one threshold filter between two random endpoints."""
    _check_common(m, d, 0.0)
    if m < 2:
        raise ValueError("a level set needs m >= 2")
    rng = np.random.default_rng(seed)
    first = random_hypervector(d, rng)
    last = random_hypervector(d, rng)
    phi = rng.random(d)
    levels = [first]
    for l in range(2, m):
        levels.append(_blend(first, last, phi, (m - l) / (m - 1)))
    levels.append(last)
    return BasisSet(BasisKind.LEVEL, m, d, 0.0, seed, tuple(levels))


def generate_level_set_interpolated(m: int, d: int, r: float, seed: int) -> BasisSet:
    _check_common(m, d, r)
    if m < 2:
        raise ValueError("a level set needs m >= 2")
    rng = np.random.default_rng(seed)
    vectors = _interpolated_levels(m, d, transitions_per_run(m, r), rng)
    return BasisSet(BasisKind.LEVEL, m, d, float(r), seed, tuple(vectors))


def _circular_even(m: int, d: int, r: float, rng: np.random.Generator) -> list[Hypervector]:
    half = m // 2
    circle = _interpolated_levels(half + 1, d, transitions_per_run(half + 1, r), rng)
    steps = [bind(circle[i], circle[i + 1]) for i in range(half)]
    for t in steps[: half - 1]:
        circle.append(bind(circle[-1], t))
    return circle


def generate_circular_set(m: int, d: int, r: float, seed: int) -> BasisSet:
    """Circular set of ``m`` points; odd ``m`` takes every other point of a 2m circle."""
    _check_common(m, d, r)
    if m < 3:
        raise ValueError("a circular set needs m >= 3 (use a level set for two points)")
    rng = np.random.default_rng(seed)
    if m % 2:
        vectors = _circular_even(2 * m, d, r, rng)[::2]
    else:
        vectors = _circular_even(m, d, r, rng)
    return BasisSet(BasisKind.CIRCULAR, m, d, float(r), seed, tuple(vectors))


def generate_basis(kind, m: int, d: int, seed: int, r: float = 0.0) -> BasisSet:
    kind = BasisKind.parse(kind)
    if kind is BasisKind.RANDOM:
        return generate_random_set(m, d, seed)
    if kind is BasisKind.LEVEL:
        return generate_level_set_interpolated(m, d, r, seed)
    return generate_circular_set(m, d, r, seed)


def circular_transitions(basis: BasisSet) -> list[Hypervector]:
    """Transitions ``T_i = C_i xor C_{i+1}`` of the first half of an even circular set."""
    if basis.kind is not BasisKind.CIRCULAR or basis.m % 2:
        raise ValueError("transitions are defined for even-size circular sets")
    half = basis.m // 2
    return [bind(basis[i], basis[i + 1]) for i in range(half)]


def check_circular_closure(basis: BasisSet) -> bool:
    """Exact structural check of an even circular set.

    ``C_1`` bound with every first-half transition gives the opposite point,
    and each second-half point is its predecessor bound with the next
    transition, with the last one closing the circle back onto ``C_1``.
    """
    steps = circular_transitions(basis)
    half = basis.m // 2
    if bind(basis[0], bind_all(steps)) != basis[half]:
        return False
    ring = list(basis.vectors) + [basis[0]]
    return all(ring[half + i + 1] == bind(ring[half + i], steps[i]) for i in range(half))


def angular_distance(alpha: float, beta: float) -> float:
    """``(1 - cos(alpha - beta)) / 2``, in [0, 1]."""
    if not (math.isfinite(alpha) and math.isfinite(beta)):
        raise ValueError("angles must be finite")
    diff = math.remainder(alpha - beta, 2 * math.pi)
    return 0.5 * (1.0 - math.cos(diff))


def similarity_matrix(basis: BasisSet) -> np.ndarray:
    return 1.0 - kernels.popcount_xor_pairs(basis.rows) / basis.d


def distance_matrix(basis: BasisSet) -> np.ndarray:
    return kernels.popcount_xor_pairs(basis.rows) / basis.d


def similarity_csv(basis: BasisSet) -> str:
    sim = similarity_matrix(basis)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["i", "j", "similarity"])
    for i in range(basis.m):
        for j in range(basis.m):
            writer.writerow([i + 1, j + 1, f"{sim[i, j]:.8f}"])
    return buf.getvalue()
