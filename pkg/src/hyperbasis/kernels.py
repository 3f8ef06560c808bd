"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the NumPy
fallback.  Set ``HYPERBASIS_PURE=1`` to force the fallback.
"""

import os

from . import _fallback
from ._fallback import n_words, pack, unpack, unpack_rows

_HOT = (
    "popcount_xor",
    "popcount_xor_rows",
    "popcount_xor_pairs",
    "accumulate_rows",
    "majority_words",
    "threshold_mask",
    "absorption_walks",
    "solve_tridiagonal",
)


def _load():
    if os.environ.get("HYPERBASIS_PURE", "") not in ("", "0"):
        return _fallback, "python"
    try:
        from . import _kernels
    except ImportError:
        return _fallback, "python"
    return _kernels, "cython"


_impl, BACKEND = _load()

popcount_xor = _impl.popcount_xor
popcount_xor_rows = _impl.popcount_xor_rows
popcount_xor_pairs = _impl.popcount_xor_pairs
accumulate_rows = _impl.accumulate_rows
majority_words = _impl.majority_words
# NumPy's vectorized compare + packbits beats the scalar compiled loop here
threshold_mask = _fallback.threshold_mask
absorption_walks = _impl.absorption_walks
solve_tridiagonal = _impl.solve_tridiagonal

__all__ = ["BACKEND", "n_words", "pack", "unpack", "unpack_rows", *_HOT]
