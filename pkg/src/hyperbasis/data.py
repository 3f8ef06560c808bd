"""Datasets, schemas, synthetic circular data, splits and metrics."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy import integrate, stats

from .encode import TWO_PI

COLUMN_TYPES = ("scalar", "angle", "symbol")
_UNITS = {
    "radians": 1.0,
    "rad": 1.0,
    "degrees": math.pi / 180.0,
    "deg": math.pi / 180.0,
    "cycles": TWO_PI,
    "fraction": TWO_PI,
    "fraction-of-cycle": TWO_PI,
}
_MISSING = {"", "nan", "na", "n/a", "null", "none"}


class DataError(Exception):
    """Bad input data: unparseable cells, missing columns, empty sets."""


class SchemaError(ValueError):
    """Malformed schema text."""


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    type: str
    unit: str = "radians"
    range: tuple[float, float] | None = None
    label: bool = False

    def to_line(self) -> str:
        parts = [f"{self.name}: {self.type}"]
        if self.type == "angle":
            parts.append(self.unit)
        if self.range is not None:
            parts.append(f"range {self.range[0]!r} {self.range[1]!r}")
        if self.label:
            parts.append("label")
        return " ".join(parts)


def parse_schema(text: str) -> list[ColumnSpec]:
    """Parse ``name: type [unit] [range a b] [label]`` lines.

    Blank lines and ``#`` comments are ignored.  Exactly one column must
    carry the ``label`` flag.
    """
    specs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, rest = line.partition(":")
        name = name.strip()
        if not sep or not name:
            raise SchemaError(f"line {lineno}: expected 'name: type ...'")
        tokens = rest.split()
        if not tokens or tokens[0] not in COLUMN_TYPES:
            raise SchemaError(f"line {lineno}: type must be one of {', '.join(COLUMN_TYPES)}")
        ctype, unit, rng, label = tokens[0], "radians", None, False
        i = 1
        while i < len(tokens):
            tok = tokens[i].lower()
            if tok in _UNITS:
                if ctype != "angle":
                    raise SchemaError(f"line {lineno}: units only apply to angle columns")
                unit = tok
                i += 1
            elif tok == "range":
                try:
                    a, b = float(tokens[i + 1]), float(tokens[i + 2])
                except (IndexError, ValueError):
                    raise SchemaError(f"line {lineno}: 'range' needs two numbers") from None
                if not b > a:
                    raise SchemaError(f"line {lineno}: range needs a < b")
                rng = (a, b)
                i += 3
            elif tok == "label":
                label = True
                i += 1
            else:
                raise SchemaError(f"line {lineno}: unexpected token {tokens[i]!r}")
        specs.append(ColumnSpec(name, ctype, unit, rng, label))
    if not specs:
        raise SchemaError("schema declares no columns")
    if len({s.name for s in specs}) != len(specs):
        raise SchemaError("duplicate column names in schema")
    if sum(s.label for s in specs) != 1:
        raise SchemaError("exactly one column must be marked 'label'")
    return specs


def load_schema(path) -> list[ColumnSpec]:
    return parse_schema(Path(path).read_text())


def schema_text(specs: Iterable[ColumnSpec]) -> str:
    return "".join(s.to_line() + "\n" for s in specs)


@dataclass(frozen=True, eq=False)
class TabularDataset:
    """Column-oriented table; angle columns hold radians in [0, 2*pi)."""

    columns: dict
    specs: tuple[ColumnSpec, ...]
    n_dropped: int = 0

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise DataError("columns have different lengths")

    def __len__(self) -> int:
        return len(next(iter(self.columns.values())))

    @property
    def label_spec(self) -> ColumnSpec:
        return next(s for s in self.specs if s.label)

    @property
    def feature_specs(self) -> list[ColumnSpec]:
        return [s for s in self.specs if not s.label]

    @property
    def labels(self) -> np.ndarray:
        return self.columns[self.label_spec.name]

    def spec(self, name: str) -> ColumnSpec:
        for s in self.specs:
            if s.name == name:
                return s
        raise KeyError(name)

    def take(self, indices) -> TabularDataset:
        indices = np.asarray(indices, dtype=np.int64)
        return replace(self, columns={k: v[indices] for k, v in self.columns.items()}, n_dropped=0)


def _parse_cell(text: str, spec: ColumnSpec):
    if spec.type == "symbol":
        return text
    value = float(text)
    if spec.type == "angle":
        value = math.fmod(value * _UNITS[spec.unit], TWO_PI)
        if value < 0:
            value += TWO_PI
        if value >= TWO_PI:
            value = 0.0
    return value


def load_csv(path, schema: Sequence[ColumnSpec]) -> TabularDataset:
    """Read a headed CSV, keeping only schema columns.

    Rows with a missing cell (empty, NaN, NA, null) in any schema column are
    dropped and counted; any other unparseable cell is an error.
    """
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise DataError(f"data file not found: {path}") from None
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    positions = {}
    for spec in schema:
        if spec.name not in header:
            raise DataError(f"{path}: missing column {spec.name!r}")
        positions[spec.name] = header.index(spec.name)
    values = {s.name: [] for s in schema}
    dropped = 0
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataError(f"{path}: row {rowno} has {len(row)} cells, header has {len(header)}")
        cells = {s.name: row[positions[s.name]].strip() for s in schema}
        if any(c.lower() in _MISSING for c in cells.values()):
            dropped += 1
            continue
        parsed = {}
        for spec in schema:
            try:
                parsed[spec.name] = _parse_cell(cells[spec.name], spec)
            except ValueError:
                raise DataError(
                    f"{path}: row {rowno}, column {spec.name!r}: cannot parse {cells[spec.name]!r}"
                ) from None
            if spec.type != "symbol" and not math.isfinite(parsed[spec.name]):
                raise DataError(f"{path}: row {rowno}, column {spec.name!r}: non-finite value")
        for k, v in parsed.items():
            values[k].append(v)
    columns = {
        s.name: np.array(values[s.name], dtype=object if s.type == "symbol" else np.float64)
        for s in schema
    }
    if not len(next(iter(columns.values()))):
        raise DataError(f"{path}: no usable rows")
    return TabularDataset(columns, tuple(schema), dropped)


REGRESSION_SCHEMA = (ColumnSpec("theta", "angle"), ColumnSpec("y", "scalar", label=True))
CLASSIFICATION_SCHEMA = (ColumnSpec("theta", "angle"), ColumnSpec("label", "symbol", label=True))


def synth_circular_regression(n: int, noise_sd: float, seed: int) -> TabularDataset:
    """Angles uniform on the circle with labels ``cos(theta) + N(0, noise_sd)``."""
    if n < 1 or noise_sd < 0:
        raise ValueError("need n >= 1 and noise_sd >= 0")
    rng = np.random.default_rng(seed)
    theta = rng.random(n) * TWO_PI
    y = np.cos(theta) + rng.normal(0.0, noise_sd, n)
    return TabularDataset({"theta": theta, "y": y}, REGRESSION_SCHEMA)


def synth_circular_classification(n: int, k: int, noise_sd: float, seed: int) -> TabularDataset:
    """Class ``c`` (0-based) covers the arc ``[c, c+1) * 2*pi/k``.

    Angles are uniform within the arc plus wrapped Gaussian noise.
    """
    if n < 1 or k < 2 or noise_sd < 0:
        raise ValueError("need n >= 1, k >= 2 and noise_sd >= 0")
    rng = np.random.default_rng(seed)
    label = rng.integers(0, k, n)
    theta = (label + rng.random(n)) * (TWO_PI / k) + rng.normal(0.0, noise_sd, n)
    theta = np.mod(theta, TWO_PI)
    theta[theta >= TWO_PI] = 0.0
    return TabularDataset({"theta": theta, "label": label.astype(np.int64)}, CLASSIFICATION_SCHEMA)


def bayes_accuracy_circular(k: int, noise_sd: float) -> float:
    """Bayes-optimal accuracy for :func:`synth_circular_classification`.

    With equal arcs and symmetric noise the optimal rule assigns an angle to
    the arc containing it, so the accuracy is the probability that a noisy
    sample stays inside its own arc.
    """
    if noise_sd == 0:
        return 1.0
    width = TWO_PI / k
    wraps = np.arange(-int(noise_sd * 10 / TWO_PI) - 2, int(noise_sd * 10 / TWO_PI) + 3)

    def stay(u):
        hi = (width - u + wraps * TWO_PI) / noise_sd
        lo = (-u + wraps * TWO_PI) / noise_sd
        return float(np.sum(stats.norm.cdf(hi) - stats.norm.cdf(lo)))

    value, _ = integrate.quad(stay, 0.0, width, epsabs=1e-12, epsrel=1e-10)
    return value / width


def split(dataset: TabularDataset, train_fraction: float, mode: str = "random", seed: int = 0):
    """Disjoint, exhaustive train/test split.

    ``chronological`` keeps the first rows for training; ``random`` uses a
    seeded permutation (each side keeps the original row order).
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction!r}")
    n = len(dataset)
    n_train = int(round(n * train_fraction))
    if mode == "chronological":
        order = np.arange(n)
    elif mode == "random":
        order = np.random.default_rng(seed).permutation(n)
    else:
        raise ValueError(f"unknown split mode {mode!r}")
    return dataset.take(np.sort(order[:n_train])), dataset.take(np.sort(order[n_train:]))


@dataclass
class Metrics:
    task: str
    n: int
    accuracy: float | None = None
    mse: float | None = None
    reference_error: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def error(self) -> float:
        """``1 - accuracy`` for classification, MSE for regression."""
        return 1.0 - self.accuracy if self.task == "classify" else self.mse

    @property
    def normalized_error(self) -> float | None:
        if self.reference_error is None:
            return None
        return normalized(self.error, self.reference_error)

    def rows(self) -> list[tuple[str, str]]:
        out = [("task", self.task), ("n_test", str(self.n))]
        if self.accuracy is not None:
            out.append(("accuracy", _fmt(self.accuracy)))
        if self.mse is not None:
            out.append(("mse", _fmt(self.mse)))
        out.append(("error", _fmt(self.error)))
        if self.reference_error is not None:
            out.append(("reference_error", _fmt(self.reference_error)))
            out.append(("normalized_error", _fmt(self.normalized_error)))
        out.extend((k, _fmt(v) if isinstance(v, float) else str(v)) for k, v in sorted(self.extra.items()))
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["metric", "value"])
        w.writerows(self.rows())
        return buf.getvalue()


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def normalized(error: float, reference: float) -> float:
    """``error / reference``; for accuracies pass ``1 - alpha`` and ``1 - alpha_ref``."""
    if reference == 0:
        return 1.0 if error == 0 else math.inf
    return error / reference


def normalized_accuracy_error(accuracy: float, reference_accuracy: float) -> float:
    return normalized(1.0 - accuracy, 1.0 - reference_accuracy)


def evaluate_classification(model, samples) -> Metrics:
    samples = list(samples)
    if not samples:
        raise DataError("empty test set")
    correct = sum(model.classify(v) == label for v, label in samples)
    return Metrics("classify", len(samples), accuracy=correct / len(samples))


def evaluate_regression(model, samples) -> Metrics:
    samples = list(samples)
    if not samples:
        raise DataError("empty test set")
    err = np.array([model.predict(v) - y for v, y in samples], dtype=np.float64)
    return Metrics("regress", len(samples), mse=float(np.mean(err**2)))
