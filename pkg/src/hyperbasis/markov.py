"""Expected absorption time of the bit-flip random walk.

A walk starts at distance 0 from a reference vector; each step flips one
uniformly chosen bit, moving to ``k + 1`` with probability ``(d - k) / d``
and back to ``k - 1`` otherwise, until it first reaches ``target``.
"""

import numpy as np

from . import kernels


def _check(d, target):
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d!r}")
    if int(target) != target or not 1 <= target <= d:
        raise ValueError(f"target must be an integer in [1, {d}], got {target!r}")
    return int(d), int(target)


def target_state(d: int, delta: float) -> int:
    """Integer state ``delta * d``; raises if it is not integral."""
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta!r}")
    k = round(delta * d)
    if abs(k - delta * d) > 1e-9 * max(1, d):
        raise ValueError(f"delta * d = {delta * d!r} is not an integral state")
    return k


def flip_system(d: int, target: int):
    """Tridiagonal system ``(lower, diag, upper, rhs)`` for ``u(0..target-1)``."""
    d, target = _check(d, target)
    k = np.arange(target, dtype=np.float64)
    lower = -k / d
    diag = np.ones(target)
    upper = -(d - k) / d
    upper[0] = -1.0
    rhs = np.ones(target)
    return lower, diag, upper, rhs


def expected_flip_count(d: int, target: int) -> float:
    """Expected number of flips until the walk first reaches ``target``."""
    lower, diag, upper, rhs = flip_system(d, target)
    u = kernels.solve_tridiagonal(lower, diag, upper, rhs)
    return float(u[0])


def simulate_flip_counts(
    d: int, target: int, walks: int, rng: np.random.Generator, block: int = 256
) -> np.ndarray:
    """Absorption times of ``walks`` independent simulated walks.

    Each unfinished walk draws its own row of ``block`` uniforms per round,
    so the result depends only on ``rng``, not on the kernel backend.
    """
    d, target = _check(d, target)
    if walks < 1:
        raise ValueError("walks must be >= 1")
    state = np.zeros(walks, dtype=np.int64)
    steps = np.zeros(walks, dtype=np.int64)
    active = np.arange(walks)
    while active.size:
        uniforms = rng.random((active.size, block))
        s = np.ascontiguousarray(state[active])
        n = np.ascontiguousarray(steps[active])
        kernels.absorption_walks(s, n, uniforms, d, target)
        state[active] = s
        steps[active] = n
        active = active[s < target]
    return steps
