"""Prototype classification and bind-bundle regression memories."""

from __future__ import annotations

import hashlib
import json
import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np

from . import rng as rngmod
from .basis import BasisSet
from .encode import LabelCodec, ScalarQuantizer
from .hv import BundleAccumulator, DimensionError, Hypervector, nearest, random_hypervector, stack_words

_CLS_MAGIC = b"HBCM"
_REG_MAGIC = b"HBRM"
_COMMON = struct.Struct("<4sHQ32sI")


def tie_breaker_for(seed: int, d: int, label: str) -> Hypervector:
    return random_hypervector(d, rngmod.stream(seed, f"tie:{label}"))


def _digest(descriptor: str) -> bytes:
    return hashlib.sha256(descriptor.encode("utf-8")).digest()


def _header(magic: bytes, seed: int, descriptor: str) -> bytes:
    text = descriptor.encode("utf-8")
    return _COMMON.pack(magic, 1, seed, _digest(descriptor), len(text)) + text


def _read_header(data: bytes, magic: bytes) -> tuple[int, str, int]:
    if len(data) < _COMMON.size:
        raise ValueError("truncated model header")
    got, version, seed, digest, n = _COMMON.unpack_from(data, 0)
    if got != magic or version != 1:
        raise ValueError("not a model container of the expected type")
    off = _COMMON.size
    descriptor = data[off : off + n].decode("utf-8")
    if _digest(descriptor) != digest:
        raise ValueError("encoder descriptor digest mismatch")
    return seed, descriptor, off + n


def _sorted_classes(labels: Iterable[Hashable]) -> tuple:
    seen = list(dict.fromkeys(labels))
    try:
        return tuple(sorted(seen))
    except TypeError:
        return tuple(seen)


@dataclass(frozen=True, eq=False)
class ClassificationModel:
    classes: tuple
    class_vectors: tuple[Hypervector, ...]
    seed: int = 0
    descriptor: str = ""

    def __post_init__(self):
        if not self.class_vectors or len(self.classes) != len(self.class_vectors):
            raise ValueError("need one class vector per class, and at least one class")
        d = self.class_vectors[0].d
        if any(v.d != d for v in self.class_vectors):
            raise DimensionError("class vectors differ in dimension")

    @property
    def k(self) -> int:
        return len(self.classes)

    @property
    def d(self) -> int:
        return self.class_vectors[0].d

    @cached_property
    def rows(self) -> np.ndarray:
        return stack_words(self.class_vectors)

    def classify(self, query: Hypervector):
        if query.d != self.d:
            raise DimensionError(f"dimension mismatch: {self.d} vs {query.d}")
        return self.classes[nearest(self.rows, query)]

    def to_bytes(self) -> bytes:
        labels = json.dumps([_plain(c) for c in self.classes]).encode("utf-8")
        out = [_header(_CLS_MAGIC, self.seed, self.descriptor)]
        out.append(struct.pack("<II", self.k, len(labels)) + labels)
        out.extend(v.to_bytes() for v in self.class_vectors)
        return b"".join(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> ClassificationModel:
        seed, descriptor, off = _read_header(data, _CLS_MAGIC)
        k, n = struct.unpack_from("<II", data, off)
        off += 8
        classes = tuple(json.loads(data[off : off + n].decode("utf-8")))
        off += n
        vectors = []
        for _ in range(k):
            v, off = Hypervector.read_from(data, off)
            vectors.append(v)
        return cls(classes, tuple(vectors), seed, descriptor)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())


def _plain(x):
    return x.item() if isinstance(x, np.generic) else x


class ClassifierTrainer:
    """Per-class accumulators; partial trainers merge by count addition."""

    def __init__(self, d: int):
        self.d = d
        self.accumulators: dict = {}

    def add(self, vector: Hypervector, label) -> ClassifierTrainer:
        acc = self.accumulators.get(label)
        if acc is None:
            acc = self.accumulators[label] = BundleAccumulator(self.d)
        acc.add(vector)
        return self

    def add_rows(self, rows: np.ndarray, labels: Sequence) -> ClassifierTrainer:
        labels = np.asarray(labels)
        for label in dict.fromkeys(labels.tolist()):
            acc = self.accumulators.get(label)
            if acc is None:
                acc = self.accumulators[label] = BundleAccumulator(self.d)
            acc.add_rows(rows[labels == label])
        return self

    def merge(self, other: ClassifierTrainer) -> ClassifierTrainer:
        for label, acc in other.accumulators.items():
            if label in self.accumulators:
                self.accumulators[label].merge(acc)
            else:
                self.accumulators[label] = acc.copy()
        return self

    def finalize(self, classes: Sequence | None = None, seed: int = 0, descriptor: str = "") -> ClassificationModel:
        if classes is None:
            classes = _sorted_classes(self.accumulators)
        missing = [c for c in classes if c not in self.accumulators]
        if missing:
            raise ValueError(f"no training samples for classes: {missing}")
        vectors = tuple(
            self.accumulators[c].finalize(tie_breaker_for(seed, self.d, f"class:{i}"))
            for i, c in enumerate(classes)
        )
        return ClassificationModel(tuple(classes), vectors, seed, descriptor)


def train_classifier(
    samples: Sequence[tuple[Hypervector, Hashable]],
    classes: Sequence | None = None,
    seed: int = 0,
    descriptor: str = "",
) -> ClassificationModel:
    """Class vectors as the majority bundle of each class's samples."""
    if not samples:
        raise ValueError("no training samples")
    vectors = [s[0] for s in samples]
    trainer = ClassifierTrainer(vectors[0].d)
    trainer.add_rows(stack_words(vectors), [s[1] for s in samples])
    return trainer.finalize(classes, seed, descriptor)


def classify(model: ClassificationModel, query: Hypervector):
    return model.classify(query)


@dataclass(frozen=True, eq=False)
class RegressionModel:
    memory: Hypervector
    codec: LabelCodec
    seed: int = 0
    descriptor: str = ""

    def __post_init__(self):
        if self.memory.d != self.codec.basis.d:
            raise DimensionError("memory and label basis differ in dimension")

    @property
    def d(self) -> int:
        return self.memory.d

    def predict(self, query: Hypervector) -> float:
        if query.d != self.d:
            raise DimensionError(f"dimension mismatch: {self.d} vs {query.d}")
        return self.codec.decode(self.memory ^ query)

    def to_bytes(self) -> bytes:
        q = self.codec.quantizer
        return b"".join(
            [
                _header(_REG_MAGIC, self.seed, self.descriptor),
                struct.pack("<dd", q.a, q.b),
                q.basis.to_bytes(),
                self.memory.to_bytes(),
            ]
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> RegressionModel:
        seed, descriptor, off = _read_header(data, _REG_MAGIC)
        a, b = struct.unpack_from("<dd", data, off)
        basis, off = BasisSet.read_from(data, off + 16)
        memory, _ = Hypervector.read_from(data, off)
        return cls(memory, LabelCodec(ScalarQuantizer(a, b, basis)), seed, descriptor)

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())


class RegressorTrainer:
    def __init__(self, codec: LabelCodec):
        self.codec = codec
        self.accumulator = BundleAccumulator(codec.basis.d)

    def add(self, vector: Hypervector, y: float) -> RegressorTrainer:
        self.accumulator.add(vector ^ self.codec.encode(y))
        return self

    def add_rows(self, rows: np.ndarray, ys) -> RegressorTrainer:
        idx = self.codec.quantizer.quantize_many(ys)
        self.accumulator.add_rows(rows ^ self.codec.basis.rows[idx])
        return self

    def merge(self, other: RegressorTrainer) -> RegressorTrainer:
        self.accumulator.merge(other.accumulator)
        return self

    def finalize(self, seed: int = 0, descriptor: str = "") -> RegressionModel:
        if self.accumulator.n_added == 0:
            raise ValueError("no training samples")
        tie = tie_breaker_for(seed, self.accumulator.d, "memory")
        return RegressionModel(self.accumulator.finalize(tie), self.codec, seed, descriptor)


def train_regressor(
    samples: Sequence[tuple[Hypervector, float]],
    codec: LabelCodec,
    seed: int = 0,
    descriptor: str = "",
) -> RegressionModel:
    """Memory as the majority bundle of ``sample xor label_vector`` pairs."""
    if not samples:
        raise ValueError("no training samples")
    rows = stack_words([s[0] for s in samples])
    if rows.shape[1] != codec.basis.rows.shape[1] or samples[0][0].d != codec.basis.d:
        raise DimensionError("sample and label dimensions differ")
    trainer = RegressorTrainer(codec).add_rows(rows, [s[1] for s in samples])
    return trainer.finalize(seed, descriptor)


def predict(model: RegressionModel, query: Hypervector) -> float:
    return model.predict(query)
