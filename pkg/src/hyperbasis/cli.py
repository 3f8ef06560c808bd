"""Command-line entry point: ``hyperbasis {basis,run,sweep-r,oracle-flips}``.

Exit codes: 0 success, 1 runtime/data error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import rng as rngmod
from .basis import BasisKind, generate_basis, similarity_csv
from .data import DataError
from .experiment import (
    ConfigError,
    ExperimentConfig,
    load_config,
    load_dataset,
    resolve,
    run_experiment,
    sweep_r,
    write_run,
)
from .kernels import BACKEND
from .markov import expected_flip_count, simulate_flip_counts, target_state

DEFAULT_R_VALUES = (0.0, 0.01, 0.05, 0.1, 0.5, 1.0)


class UsageError(Exception):
    pass


def _r_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyperbasis", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s 0.1.0 (kernels: {BACKEND})")
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("basis", help="generate a basis set and its similarity matrix")
    b.add_argument("--kind", required=True, choices=[k.value for k in BasisKind])
    b.add_argument("--levels", "-m", type=int, default=12)
    b.add_argument("--dim", "-d", type=int, default=10000)
    b.add_argument("--r", type=float, default=None)
    b.add_argument("--seed", type=lambda s: int(s, 0), default=None)
    b.add_argument("--out", default="basis_out")

    for name, helptext in (("run", "train and evaluate one experiment"), ("sweep-r", "sweep the r knob")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="experiment config file")
        s.add_argument("--dim", "-d", type=int)
        s.add_argument("--levels", "-m", type=int, help="levels for every non-symbol feature column")
        s.add_argument("--kind", choices=[k.value for k in BasisKind], help="basis kind for every non-symbol column")
        s.add_argument("--r", type=float, help="r for every level/circular column")
        s.add_argument("--seed", type=lambda v: int(v, 0))
        s.add_argument("--out")
        s.add_argument("--task", choices=["regress", "classify"])
        if name == "sweep-r":
            s.add_argument("--r-values", type=_r_list, default=list(DEFAULT_R_VALUES))
            s.add_argument("--trials", type=int, default=10)
            s.add_argument("--jobs", type=int, default=1)

    o = sub.add_parser("oracle-flips", help="expected flips until a target distance")
    o.add_argument("--dim", "-d", type=int, required=True)
    o.add_argument("--delta", type=float, required=True)
    o.add_argument("--mc", action="store_true", help="also run a Monte-Carlo estimate")
    o.add_argument("--walks", type=int, default=100_000)
    o.add_argument("--seed", type=lambda v: int(v, 0), default=None)
    return p


def _config_from_args(args) -> ExperimentConfig:
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    if args.task:
        cfg.task = args.task
    if args.dim is not None:
        cfg.dim = args.dim
    if args.seed is not None or cfg.seed is None:
        cfg.seed = rngmod.master_seed(args.seed)
    if args.out:
        cfg.out = args.out
    cfg.validate()
    dataset = load_dataset(cfg)
    cfg = resolve(cfg, dataset)
    for name, col in cfg.columns.items():
        if dataset.spec(name).type == "symbol":
            continue
        if args.kind:
            col.kind = args.kind
        if args.levels is not None:
            col.levels = args.levels
        if args.r is not None:
            col.r = args.r
    cfg.validate()
    return cfg


def cmd_basis(args) -> int:
    seed = rngmod.master_seed(args.seed)
    kind = BasisKind.parse(args.kind)
    r = args.r if args.r is not None else (1.0 if kind is BasisKind.RANDOM else 0.0)
    try:
        basis = generate_basis(kind, args.levels, args.dim, seed, r)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    basis.save(out / "basis.bin")
    (out / "similarity.csv").write_text(similarity_csv(basis))
    print(f"wrote {out / 'basis.bin'} and {out / 'similarity.csv'} ({kind.value}, m={basis.m}, d={basis.d}, r={basis.r}, seed={seed})")
    return 0


def cmd_run(args) -> int:
    cfg = _config_from_args(args)
    result = run_experiment(cfg)
    paths = write_run(result, cfg.out)
    sys.stdout.write(result.config.to_text())
    for name, value in result.metrics.rows():
        print(f"{name} = {value}")
    print(f"wrote {paths['metrics']}, {paths['model']}, {paths['config']}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _config_from_args(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    rows = sweep_r(cfg, args.r_values, args.trials, args.jobs)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "seed", "error", "normalized_error"])
    for r, seed, err, norm in rows:
        w.writerow([f"{r!r}", seed, f"{err:.10g}", f"{norm:.10g}"])
    (out / "sweep.csv").write_text(buf.getvalue())

    summary = io.StringIO()
    w = csv.writer(summary, lineterminator="\n")
    w.writerow(["r", "n_seeds", "mean_normalized_error", "stderr"])
    for r in dict.fromkeys(args.r_values):
        vals = np.array([row[3] for row in rows if row[0] == float(r)])
        se = float(vals.std(ddof=1) / math.sqrt(len(vals))) if len(vals) > 1 else float("nan")
        w.writerow([f"{float(r)!r}", len(vals), f"{vals.mean():.10g}", f"{se:.10g}"])
    (out / "sweep_summary.csv").write_text(summary.getvalue())
    (out / "config.resolved.ini").write_text(cfg.to_text())
    sys.stdout.write(cfg.to_text())
    sys.stdout.write(summary.getvalue())
    print(f"wrote {out / 'sweep.csv'} and {out / 'sweep_summary.csv'}")
    return 0


def cmd_oracle(args) -> int:
    try:
        target = target_state(args.dim, args.delta)
        value = expected_flip_count(args.dim, target)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"expected_flips = {value!r}")
    if args.mc:
        rng = rngmod.stream(rngmod.master_seed(args.seed), "oracle-flips")
        sim = simulate_flip_counts(args.dim, target, args.walks, rng)
        mean = float(sim.mean())
        print(f"monte_carlo = {mean!r} (walks={args.walks})")
        print(f"relative_difference = {abs(mean - value) / value!r}")
    return 0


_COMMANDS = {"basis": cmd_basis, "run": cmd_run, "sweep-r": cmd_sweep, "oracle-flips": cmd_oracle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"hyperbasis: error: {exc}", file=sys.stderr)
        return 2
    except (DataError, ValueError, OSError) as exc:
        print(f"hyperbasis: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
