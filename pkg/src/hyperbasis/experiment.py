"""Experiment configuration and the train/evaluate pipeline behind the CLI.

Configs are INI-style ``key = value`` files::

    [experiment]
    task = regress            # or classify
    source = synthetic        # or csv (needs csv = ..., schema = ...)
    dim = 10000
    seed = 0

    [column theta]
    kind = circular
    levels = 72
    r = 0.0

Keys left out are filled with defaults; :meth:`ExperimentConfig.to_text`
writes the fully resolved form.
"""

from __future__ import annotations

import configparser
import copy
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .basis import BasisKind, BasisSet, generate_basis
from .data import (
    DataError,
    Metrics,
    TabularDataset,
    evaluate_classification,
    evaluate_regression,
    load_csv,
    load_schema,
    split,
    synth_circular_classification,
    synth_circular_regression,
)
from .encode import TWO_PI, AngleQuantizer, LabelCodec, ScalarQuantizer
from .hv import BundleAccumulator, Hypervector
from .learn import ClassifierTrainer, RegressorTrainer, tie_breaker_for

DEFAULT_DIM = 10000
DEFAULT_LEVELS = 64
DEFAULT_LABEL_LEVELS = 100


class ConfigError(ValueError):
    """Invalid or incomplete experiment configuration."""


@dataclass
class ColumnEncoder:
    kind: str
    levels: int
    r: float = 0.0
    range: tuple[float, float] | None = None


@dataclass
class ExperimentConfig:
    task: str = "regress"
    source: str = "synthetic"
    csv: str | None = None
    schema: str | None = None
    n: int = 2000
    noise_sd: float = 0.1
    classes: int = 8
    dim: int = DEFAULT_DIM
    label_levels: int = DEFAULT_LABEL_LEVELS
    label_range: tuple[float, float] | None = None
    seed: int | None = None
    split: str = "random"
    train_fraction: float = 0.7
    combine: str = "record"
    out: str = "out"
    columns: dict[str, ColumnEncoder] = field(default_factory=dict)

    def copy(self) -> ExperimentConfig:
        return copy.deepcopy(self)

    def validate(self) -> None:
        if self.seed is None:
            self.seed = rngmod.master_seed()
        if self.task not in ("regress", "classify"):
            raise ConfigError(f"task must be 'regress' or 'classify', got {self.task!r}")
        if self.source not in ("synthetic", "csv"):
            raise ConfigError(f"source must be 'synthetic' or 'csv', got {self.source!r}")
        if self.source == "csv" and not (self.csv and self.schema):
            raise ConfigError("source = csv needs both 'csv' and 'schema' paths")
        if self.dim < 1:
            raise ConfigError("dim must be >= 1")
        if self.label_levels < 2:
            raise ConfigError("label_levels must be >= 2")
        if self.split not in ("random", "chronological"):
            raise ConfigError(f"split must be 'random' or 'chronological', got {self.split!r}")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        if self.combine not in ("record", "tuple"):
            raise ConfigError(f"combine must be 'record' or 'tuple', got {self.combine!r}")
        for name, col in self.columns.items():
            try:
                BasisKind.parse(col.kind)
            except ValueError as exc:
                raise ConfigError(f"column {name!r}: {exc}") from None
            if not 0.0 <= col.r <= 1.0:
                raise ConfigError(f"column {name!r}: r must lie in [0, 1]")
            if col.levels < 1:
                raise ConfigError(f"column {name!r}: levels must be >= 1")

    def to_text(self) -> str:
        cp = configparser.ConfigParser()
        exp = {
            "task": self.task,
            "source": self.source,
            "dim": str(self.dim),
            "seed": str(self.seed),
            "label_levels": str(self.label_levels),
            "label_range": "auto" if self.label_range is None else f"{self.label_range[0]!r} {self.label_range[1]!r}",
            "split": self.split,
            "train_fraction": repr(self.train_fraction),
            "combine": self.combine,
            "out": self.out,
        }
        if self.source == "csv":
            exp["csv"] = self.csv
            exp["schema"] = self.schema
        else:
            exp["n"] = str(self.n)
            exp["noise_sd"] = repr(self.noise_sd)
            if self.task == "classify":
                exp["classes"] = str(self.classes)
        cp["experiment"] = exp
        for name, col in self.columns.items():
            cp[f"column {name}"] = {
                "kind": col.kind,
                "levels": str(col.levels),
                "r": repr(col.r),
                "range": "auto" if col.range is None else f"{col.range[0]!r} {col.range[1]!r}",
            }
        buf = io.StringIO()
        cp.write(buf)
        return buf.getvalue()


def _pair(text: str, what: str):
    text = text.strip()
    if text.lower() == "auto":
        return None
    try:
        a, b = (float(t) for t in text.split())
    except ValueError:
        raise ConfigError(f"{what} must be 'auto' or two numbers, got {text!r}") from None
    if not b > a:
        raise ConfigError(f"{what} needs a < b")
    return (a, b)


def parse_config(text: str) -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from None
    cfg = ExperimentConfig()
    known = set(cfg.__dataclass_fields__) - {"columns"}
    if cp.has_section("experiment"):
        for key, value in cp["experiment"].items():
            if key not in known:
                raise ConfigError(f"unknown experiment key {key!r}")
            try:
                if key in ("n", "classes", "dim", "label_levels"):
                    setattr(cfg, key, int(value))
                elif key == "seed":
                    setattr(cfg, key, int(value, 0) & 0xFFFFFFFFFFFFFFFF)
                elif key in ("noise_sd", "train_fraction"):
                    setattr(cfg, key, float(value))
                elif key == "label_range":
                    cfg.label_range = _pair(value, "label_range")
                else:
                    setattr(cfg, key, value.strip())
            except ValueError:
                raise ConfigError(f"bad value for {key!r}: {value!r}") from None
    for section in cp.sections():
        if section == "experiment":
            continue
        head, _, name = section.partition(" ")
        if head != "column" or not name.strip():
            raise ConfigError(f"unknown section [{section}]")
        sec = cp[section]
        extra = set(sec) - {"kind", "levels", "r", "range"}
        if extra:
            raise ConfigError(f"[{section}]: unknown keys {sorted(extra)}")
        try:
            cfg.columns[name.strip()] = ColumnEncoder(
                kind=sec.get("kind", "").strip(),
                levels=int(sec.get("levels", str(DEFAULT_LEVELS))),
                r=float(sec.get("r", "0.0")),
                range=_pair(sec.get("range", "auto"), f"[{section}] range"),
            )
        except ValueError as exc:
            raise ConfigError(f"[{section}]: {exc}") from None
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    cfg = parse_config(text)
    base = path.parent
    for attr in ("csv", "schema"):
        value = getattr(cfg, attr)
        if value and not Path(value).is_absolute():
            setattr(cfg, attr, str(base / value))
    return cfg


_DEFAULT_KIND = {"angle": "circular", "scalar": "level", "symbol": "random"}


def load_dataset(cfg: ExperimentConfig) -> TabularDataset:
    if cfg.source == "csv":
        if not Path(cfg.schema).is_file():
            raise ConfigError(f"schema file not found: {cfg.schema}")
        try:
            schema = load_schema(cfg.schema)
        except ValueError as exc:
            raise ConfigError(f"{cfg.schema}: {exc}") from None
        return load_csv(cfg.csv, schema)
    seed = rngmod.derive_seed(cfg.seed, "data")
    if cfg.task == "regress":
        return synth_circular_regression(cfg.n, cfg.noise_sd, seed)
    return synth_circular_classification(cfg.n, cfg.classes, cfg.noise_sd, seed)


def resolve(cfg: ExperimentConfig, dataset: TabularDataset) -> ExperimentConfig:
    """Fill in an encoder for every feature column and check the result."""
    cfg = cfg.copy()
    names = {s.name for s in dataset.feature_specs}
    unknown = set(cfg.columns) - names
    if unknown:
        raise ConfigError(f"encoder sections for unknown columns: {sorted(unknown)}")
    for spec in dataset.feature_specs:
        col = cfg.columns.get(spec.name)
        if col is None:
            col = cfg.columns[spec.name] = ColumnEncoder(_DEFAULT_KIND[spec.type], DEFAULT_LEVELS)
        if not col.kind:
            col.kind = _DEFAULT_KIND[spec.type]
        if spec.type == "symbol":
            col.kind = "random"
            col.levels = len(set(dataset.columns[spec.name].tolist()))
        elif col.range is None and spec.range is not None:
            col.range = spec.range
    if cfg.label_range is None and cfg.task == "regress" and dataset.label_spec.range is not None:
        cfg.label_range = dataset.label_spec.range
    cfg.columns = {s.name: cfg.columns[s.name] for s in dataset.feature_specs}
    cfg.validate()
    return cfg


class FeatureEncoder:
    """Encodes dataset rows into packed hypervector rows."""

    def __init__(self, cfg: ExperimentConfig, train: TabularDataset):
        self.cfg = cfg
        self.d = cfg.dim
        self.names = list(cfg.columns)
        self.parts = {}
        for name, col in cfg.columns.items():
            spec = train.spec(name)
            kind = BasisKind.parse(col.kind)
            seed = rngmod.derive_seed(cfg.seed, f"basis:{name}")
            if spec.type == "symbol":
                alphabet = sorted(set(train.columns[name].tolist()), key=str)
                basis = generate_basis(BasisKind.RANDOM, len(alphabet), self.d, seed)
                self.parts[name] = ("symbol", {s: i for i, s in enumerate(alphabet)}, basis)
                continue
            if kind is BasisKind.CIRCULAR and col.levels < 3:
                raise ConfigError(f"column {name!r}: circular bases need levels >= 3")
            if kind is not BasisKind.RANDOM and col.levels < 2:
                raise ConfigError(f"column {name!r}: levels must be >= 2")
            basis = generate_basis(kind, col.levels, self.d, seed, col.r)
            if spec.type == "angle" and kind is not BasisKind.LEVEL:
                self.parts[name] = ("angle", AngleQuantizer(basis), basis)
            else:
                lo, hi = col.range or self._auto_range(spec, train.columns[name])
                if basis.m < 2:
                    raise ConfigError(f"column {name!r}: need at least two levels")
                self.parts[name] = ("scalar", ScalarQuantizer(lo, hi, basis), basis)
        if len(self.names) > 1 and cfg.combine == "record":
            self.keys = generate_basis(BasisKind.RANDOM, len(self.names), self.d, rngmod.derive_seed(cfg.seed, "keys"))
            self.tie = tie_breaker_for(cfg.seed, self.d, "record")

    @staticmethod
    def _auto_range(spec, values):
        if spec.type == "angle":
            return (0.0, TWO_PI)
        lo, hi = float(np.min(values)), float(np.max(values))
        return (lo, hi) if hi > lo else (lo - 0.5, lo + 0.5)

    def _column_rows(self, name: str, values) -> np.ndarray:
        what, coder, basis = self.parts[name]
        if what == "symbol":
            try:
                idx = np.array([coder[v] for v in values.tolist()], dtype=np.int64)
            except KeyError as exc:
                raise DataError(f"column {name!r}: symbol {exc.args[0]!r} not seen in training") from None
        else:
            idx = coder.quantize_many(values)
        return basis.rows[idx]

    def rows(self, dataset: TabularDataset) -> np.ndarray:
        cols = [self._column_rows(n, dataset.columns[n]) for n in self.names]
        if len(cols) == 1:
            return np.ascontiguousarray(cols[0])
        if self.cfg.combine == "tuple":
            return np.ascontiguousarray(np.bitwise_xor.reduce(np.stack(cols), axis=0))
        out = np.empty_like(cols[0])
        keyed = np.stack([c ^ self.keys.rows[i] for i, c in enumerate(cols)], axis=1)
        for i in range(keyed.shape[0]):
            acc = BundleAccumulator(self.d).add_rows(np.ascontiguousarray(keyed[i]))
            out[i] = acc.finalize(self.tie).words
        return out

    def descriptor(self) -> str:
        parts = [f"d={self.d}", f"combine={self.cfg.combine}"]
        for name, col in self.cfg.columns.items():
            parts.append(f"{name}:{col.kind}:m={col.levels}:r={col.r!r}:range={col.range}")
        return ";".join(parts)


@dataclass
class RunResult:
    config: ExperimentConfig
    metrics: Metrics
    model: object


def _vectors(rows: np.ndarray, d: int) -> list[Hypervector]:
    return [Hypervector(r, d) for r in rows]


def run_experiment(cfg: ExperimentConfig, dataset: TabularDataset | None = None) -> RunResult:
    """Train on the split's training side and evaluate on its test side."""
    cfg.validate()
    if dataset is None:
        dataset = load_dataset(cfg)
    cfg = resolve(cfg, dataset)
    train, test = split(dataset, cfg.train_fraction, cfg.split, rngmod.derive_seed(cfg.seed, "split"))
    if not len(train) or not len(test):
        raise DataError("split produced an empty training or test set")
    encoder = FeatureEncoder(cfg, train)
    desc = encoder.descriptor()
    train_rows = encoder.rows(train)
    test_rows = encoder.rows(test)
    test_vecs = _vectors(test_rows, cfg.dim)
    if cfg.task == "classify":
        labels = train.labels
        model = ClassifierTrainer(cfg.dim).add_rows(train_rows, labels).finalize(
            sorted(set(labels.tolist()), key=str), cfg.seed, desc
        )
        metrics = evaluate_classification(model, zip(test_vecs, test.labels.tolist()))
    else:
        y = train.labels.astype(np.float64)
        lo, hi = cfg.label_range or (float(y.min()), float(y.max()))
        if not hi > lo:
            lo, hi = lo - 0.5, lo + 0.5
        cfg.label_range = (lo, hi)
        label_basis = generate_basis(
            BasisKind.LEVEL, cfg.label_levels, cfg.dim, rngmod.derive_seed(cfg.seed, "labels")
        )
        codec = LabelCodec(ScalarQuantizer(lo, hi, label_basis))
        model = RegressorTrainer(codec).add_rows(train_rows, y).finalize(cfg.seed, desc)
        metrics = evaluate_regression(model, zip(test_vecs, test.labels.astype(np.float64).tolist()))
    return RunResult(cfg, metrics, model)


def reference_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Same experiment with every level/circular column swapped for a random basis."""
    ref = cfg.copy()
    for col in ref.columns.values():
        if col.kind in ("level", "circular"):
            col.kind = "random"
            col.r = 0.0
    return ref


def with_r(cfg: ExperimentConfig, r: float) -> ExperimentConfig:
    out = cfg.copy()
    for col in out.columns.values():
        if col.kind in ("level", "circular"):
            col.r = float(r)
    return out


def write_run(result: RunResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "metrics": out / "metrics.csv",
        "model": out / "model.bin",
        "config": out / "config.resolved.ini",
    }
    paths["metrics"].write_text(result.metrics.to_csv())
    paths["model"].write_bytes(result.model.to_bytes())
    paths["config"].write_text(result.config.to_text())
    return paths


def sweep_r(cfg: ExperimentConfig, r_values, trials: int, jobs: int = 1):
    """Rows ``(r, seed, error, normalized_error)``; trial ``t`` uses seed ``cfg.seed + t``.

    Each seed's error is normalized by the same seed's random-basis run.
    """
    for r in r_values:
        if not 0.0 <= r <= 1.0:
            raise ConfigError(f"r values must lie in [0, 1], got {r!r}")
    tasks = []
    for t in range(trials):
        base = cfg.copy()
        base.seed = (cfg.seed + t) & 0xFFFFFFFFFFFFFFFF
        tasks.append(reference_config(_resolved(base)))
        tasks.extend(with_r(_resolved(base), r) for r in r_values)
    errors = _map_errors(tasks, jobs)
    rows = []
    per = len(r_values) + 1
    for t in range(trials):
        chunk = errors[t * per : (t + 1) * per]
        ref = chunk[0]
        seed = tasks[t * per].seed
        for r, err in zip(r_values, chunk[1:]):
            rows.append((float(r), seed, err, err / ref if ref else float("inf")))
    return rows


def _resolved(cfg: ExperimentConfig) -> ExperimentConfig:
    return resolve(cfg, load_dataset(cfg))


def _run_error(cfg: ExperimentConfig) -> float:
    return run_experiment(cfg).metrics.error


def _map_errors(tasks, jobs: int) -> list[float]:
    if jobs <= 1:
        return [_run_error(c) for c in tasks]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_error, tasks))
