"""NumPy implementations of the hot kernels.

Used when the compiled ``_kernels`` extension is unavailable, and as the
reference the extension is checked against.  Every function here has the
same signature and the same results as its counterpart in ``_kernels.pyx``.

Bit layout: bit ``j`` of a hypervector lives in word ``j // 64`` at bit
position ``j % 64`` (LSB first); padding bits past ``d`` are always zero.
"""

import numpy as np


def n_words(d):
    return (d + 63) // 64


def unpack(words, d):
    """Packed ``uint64`` words -> ``uint8`` array of ``d`` bits."""
    raw = np.ascontiguousarray(words, dtype="<u8").view(np.uint8)
    return np.unpackbits(raw, bitorder="little")[:d]


def unpack_rows(rows, d):
    raw = np.ascontiguousarray(rows, dtype="<u8")
    raw = raw.view(np.uint8).reshape(raw.shape[0], -1)
    return np.unpackbits(raw, axis=1, bitorder="little")[:, :d]


def pack(bits):
    """``d`` bits (any integer/bool dtype) -> packed ``uint64`` words."""
    bits = np.asarray(bits, dtype=bool)
    nw = n_words(bits.shape[0])
    padded = np.zeros(nw * 64, dtype=bool)
    padded[: bits.shape[0]] = bits
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


def popcount_xor(a, b):
    return int(np.bitwise_count(np.bitwise_xor(a, b)).sum(dtype=np.int64))


def popcount_xor_rows(rows, q):
    return np.bitwise_count(np.bitwise_xor(rows, q[None, :])).sum(axis=1, dtype=np.int64)


def popcount_xor_pairs(rows):
    m = rows.shape[0]
    out = np.zeros((m, m), dtype=np.int64)
    for i in range(m):
        out[i] = popcount_xor_rows(rows, rows[i])
    return out


def accumulate_rows(counts, rows, d):
    """Add each packed row to ``counts`` as +1 per set bit, -1 per clear bit."""
    bits = unpack_rows(rows, d)
    counts += 2 * bits.sum(axis=0, dtype=np.int64) - rows.shape[0]


def majority_words(counts, tie, d):
    bits = counts > 0
    ties = counts == 0
    if ties.any():
        bits = np.where(ties, unpack(tie, d).astype(bool), bits)
    return pack(bits)


def threshold_mask(phi, tau):
    """Words with bit ``j`` set exactly when ``phi[j] < tau``."""
    return pack(phi < tau)


def absorption_walks(state, steps, uniforms, d, target):
    """Advance bit-flip walks in place, one row of ``uniforms`` per walk.

    A walk at distance ``k`` moves to ``k + 1`` when its next uniform is
    below ``(d - k) / d`` and to ``k - 1`` otherwise.  Walks already at
    ``target`` consume nothing.
    """
    for t in range(uniforms.shape[1]):
        active = state < target
        if not active.any():
            break
        k = state[active]
        up = uniforms[active, t] * d < (d - k)
        state[active] = np.where(up, k + 1, k - 1)
        steps[active] += 1


def solve_tridiagonal(lower, diag, upper, rhs):
    """Thomas algorithm; ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    cp[0] = upper[0] / diag[0]
    dp[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - lower[i] * cp[i - 1]
        cp[i] = upper[i] / denom
        dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
    x = np.empty(n)
    x[-1] = dp[-1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x
