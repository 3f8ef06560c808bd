"""Time every hot kernel on the compiled and the NumPy backend.

    python3 benchmarks/bench_kernels.py [--dim 10000] [--repeat 5]

Prints one row per kernel: best-of-N wall time per call for each backend,
the speedup, whether both backends returned identical results, and which
one the runtime dispatcher picks.
"""

import argparse
import timeit

import numpy as np

from hyperbasis import _fallback, kernels

try:
    from hyperbasis import _kernels
except ImportError:
    _kernels = None


def cases(d: int, rng: np.random.Generator):
    w = _fallback.n_words(d)

    def words(*shape):
        out = rng.integers(0, 2**64, size=shape + (w,), dtype=np.uint64)
        if d % 64:
            out[..., -1] &= np.uint64((1 << (d % 64)) - 1)
        return out

    a, b = words(), words()
    rows, big = words(72), words(1000)
    counts = rng.integers(-3, 4, d).astype(np.int64)
    phi = rng.random(d)
    tri = 200
    lower, upper = -rng.random(tri), -rng.random(tri)
    diag = 2.5 + rng.random(tri)
    rhs = np.ones(tri)
    walks, block = 2000, 256
    uniforms = rng.random((walks, block))

    def accumulate(mod):
        c = np.zeros(d, dtype=np.int64)
        mod.accumulate_rows(c, big, d)
        return c

    def walk(mod):
        state = np.zeros(walks, dtype=np.int64)
        steps = np.zeros(walks, dtype=np.int64)
        mod.absorption_walks(state, steps, uniforms, 100, 50)
        return state, steps

    return {
        "popcount_xor": lambda mod: mod.popcount_xor(a, b),
        "popcount_xor_rows (1000 rows)": lambda mod: mod.popcount_xor_rows(big, a),
        "popcount_xor_pairs (72x72)": lambda mod: mod.popcount_xor_pairs(rows),
        "accumulate_rows (1000 rows)": accumulate,
        "majority_words": lambda mod: mod.majority_words(counts, a, d),
        "threshold_mask": lambda mod: mod.threshold_mask(phi, 0.4),
        "absorption_walks (2000x256)": walk,
        "solve_tridiagonal (n=200)": lambda mod: mod.solve_tridiagonal(lower, diag, upper, rhs),
    }


def best(fn, repeat: int) -> float:
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat, number)) / number


def same(x, y) -> bool:
    if isinstance(x, tuple):
        return all(same(p, q) for p, q in zip(x, y))
    return bool(np.array_equal(np.asarray(x), np.asarray(y)))


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--dim", type=int, default=10000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    table = cases(args.dim, np.random.default_rng(args.seed))
    if _kernels is None:
        print("compiled extension not built; timing the NumPy backend only")
    print(f"d = {args.dim}")
    print(f"{'kernel':32s} {'numpy':>12s} {'compiled':>12s} {'speedup':>8s}  match  dispatch")
    for name, fn in table.items():
        t_py = best(lambda: fn(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:32s} {t_py * 1e6:10.1f}us")
            continue
        t_c = best(lambda: fn(_kernels), args.repeat)
        match = same(fn(_fallback), fn(_kernels))
        used = "numpy" if getattr(kernels, name.split()[0]) is getattr(_fallback, name.split()[0]) else kernels.BACKEND
        print(
            f"{name:32s} {t_py * 1e6:10.1f}us {t_c * 1e6:10.1f}us {t_py / t_c:7.1f}x  "
            f"{'yes' if match else 'NO ':5s}  {used}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
