# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels.  Mirrors ``_fallback`` function for function."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()


cdef extern from *:
    """
    static inline int hb_popcount64(unsigned long long x) {
        return __builtin_popcountll(x);
    }
    """
    int hb_popcount64(unsigned long long x) nogil


def popcount_xor(const uint64_t[::1] a, const uint64_t[::1] b):
    cdef Py_ssize_t i, n = a.shape[0]
    cdef int64_t total = 0
    with nogil:
        for i in range(n):
            total += hb_popcount64(a[i] ^ b[i])
    return total


def popcount_xor_rows(const uint64_t[:, ::1] rows, const uint64_t[::1] q):
    cdef Py_ssize_t i, w, m = rows.shape[0], n = rows.shape[1]
    out = np.zeros(m, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef int64_t acc
    with nogil:
        for i in range(m):
            acc = 0
            for w in range(n):
                acc += hb_popcount64(rows[i, w] ^ q[w])
            o[i] = acc
    return out


def popcount_xor_pairs(const uint64_t[:, ::1] rows):
    cdef Py_ssize_t i, j, w, m = rows.shape[0], n = rows.shape[1]
    out = np.zeros((m, m), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef int64_t acc
    with nogil:
        for i in range(m):
            for j in range(i + 1, m):
                acc = 0
                for w in range(n):
                    acc += hb_popcount64(rows[i, w] ^ rows[j, w])
                o[i, j] = acc
                o[j, i] = acc
    return out


cdef enum:
    SLICES = 8


cdef void _flush(int64_t[::1] counts, uint64_t* planes, Py_ssize_t nw,
                 Py_ssize_t d, int64_t nrows) noexcept nogil:
    # planes hold a binary counter per bit: plane l is bit l of the count
    cdef Py_ssize_t w, b, l, j, lim
    cdef int64_t ones
    for w in range(nw):
        lim = d - w * 64
        if lim > 64:
            lim = 64
        for b in range(lim):
            ones = 0
            for l in range(SLICES):
                ones |= <int64_t>((planes[l * nw + w] >> b) & 1) << l
            j = w * 64 + b
            counts[j] += 2 * ones - nrows
    for l in range(SLICES * nw):
        planes[l] = 0


def accumulate_rows(int64_t[::1] counts, const uint64_t[:, ::1] rows, Py_ssize_t d):
    """Carry-save accumulation in bit-sliced counters, flushed every 255 rows."""
    cdef Py_ssize_t i, w, l, m = rows.shape[0], nw = rows.shape[1]
    cdef int64_t pending = 0
    cdef uint64_t carry, t
    planes_arr = np.zeros(SLICES * nw, dtype=np.uint64)
    cdef uint64_t[::1] planes = planes_arr
    cdef uint64_t* p = &planes[0]
    with nogil:
        for i in range(m):
            for w in range(nw):
                carry = rows[i, w]
                l = 0
                while carry and l < SLICES:
                    t = p[l * nw + w] & carry
                    p[l * nw + w] ^= carry
                    carry = t
                    l += 1
            pending += 1
            if pending == (1 << SLICES) - 1:
                _flush(counts, p, nw, d, pending)
                pending = 0
        if pending:
            _flush(counts, p, nw, d, pending)


def majority_words(const int64_t[::1] counts, const uint64_t[::1] tie, Py_ssize_t d):
    cdef Py_ssize_t w, b, lim, nw = (d + 63) // 64
    out = np.zeros(nw, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef int64_t c
    cdef uint64_t word, tw
    with nogil:
        for w in range(nw):
            lim = d - w * 64
            if lim > 64:
                lim = 64
            word = 0
            tw = tie[w]
            for b in range(lim):
                c = counts[w * 64 + b]
                word |= (<uint64_t>(c > 0) | (<uint64_t>(c == 0) & (tw >> b))) << b
            o[w] = word
    return out


def threshold_mask(const double[::1] phi, double tau):
    cdef Py_ssize_t w, b, lim, d = phi.shape[0], nw = (d + 63) // 64
    out = np.zeros(nw, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t word
    with nogil:
        for w in range(nw):
            lim = d - w * 64
            if lim > 64:
                lim = 64
            word = 0
            for b in range(lim):
                word |= (<uint64_t>(phi[w * 64 + b] < tau)) << b
            o[w] = word
    return out


def absorption_walks(int64_t[::1] state, int64_t[::1] steps,
                     const double[:, ::1] uniforms, int64_t d, int64_t target):
    cdef Py_ssize_t w, t, nwalk = uniforms.shape[0], block = uniforms.shape[1]
    cdef int64_t k
    with nogil:
        for w in range(nwalk):
            k = state[w]
            t = 0
            while k < target and t < block:
                if uniforms[w, t] * d < (d - k):
                    k += 1
                else:
                    k -= 1
                t += 1
            steps[w] += t
            state[w] = k


def solve_tridiagonal(const double[::1] lower, const double[::1] diag,
                      const double[::1] upper, const double[::1] rhs):
    cdef Py_ssize_t i, n = diag.shape[0]
    cp_arr = np.empty(n)
    dp_arr = np.empty(n)
    x_arr = np.empty(n)
    cdef double[::1] cp = cp_arr, dp = dp_arr, x = x_arr
    cdef double denom
    with nogil:
        cp[0] = upper[0] / diag[0]
        dp[0] = rhs[0] / diag[0]
        for i in range(1, n):
            denom = diag[i] - lower[i] * cp[i - 1]
            cp[i] = upper[i] / denom
            dp[i] = (rhs[i] - lower[i] * dp[i - 1]) / denom
        x[n - 1] = dp[n - 1]
        for i in range(n - 2, -1, -1):
            x[i] = dp[i] - cp[i] * x[i + 1]
    return x_arr
