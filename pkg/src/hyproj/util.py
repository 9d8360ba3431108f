"""Low-level helpers: combinatorial indexing, bitset ops, seed derivation.

Vertices are 1-indexed throughout the package.  Unordered pairs (i, j) with
i < j are mapped to a dense 0-based index in lexicographic order
(1,2), (1,3), ..., (1,n), (2,3), ...; this ordering is the canonical one for
noise masks, file formats and oracle bit encodings.
"""

from __future__ import annotations

import hashlib
import math
from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import ThresholdOverflow

_FLOAT_MAX_LOG = math.log(np.finfo(np.float64).max)


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i, j, n: int):
    """Dense index of pair (i, j), i < j, 1-based vertices. Vectorized."""
    i = np.asarray(i, dtype=np.int64)
    j = np.asarray(j, dtype=np.int64)
    return (i - 1) * (2 * n - i) // 2 + (j - i - 1)


@lru_cache(maxsize=64)
def _row_starts(n: int) -> np.ndarray:
    # _row_starts(n)[i-1] = index of pair (i, i+1)
    i = np.arange(1, n, dtype=np.int64)
    return (i - 1) * (2 * n - i) // 2


def pair_unindex(idx, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Inverse of pair_index; returns (i, j) arrays."""
    idx = np.asarray(idx, dtype=np.int64)
    starts = _row_starts(n)
    i = np.searchsorted(starts, idx, side="right")  # 1-based row
    j = idx - starts[i - 1] + i + 1
    return i.astype(np.int64), j.astype(np.int64)


@lru_cache(maxsize=32)
def all_subsets(n: int, d: int) -> tuple[tuple[int, ...], ...]:
    """All d-subsets of {1..n} in lexicographic order. Cached; only call when
    comb(n, d) is small."""
    return tuple(combinations(range(1, n + 1), d))


def scaled_comb(coeff: float, n: int, k: int) -> float:
    """coeff * C(n, k) as a float, falling back to log-domain evaluation when
    the exact binomial coefficient does not fit a float."""
    if coeff == 0.0:
        return 0.0
    c = math.comb(n, k)
    if c.bit_length() <= 1023:
        return coeff * float(c)
    log_val = math.log(abs(coeff)) + math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)
    if log_val > _FLOAT_MAX_LOG:
        raise ThresholdOverflow(
            f"{coeff} * C({n},{k}) exceeds the float range even in log domain"
        )
    return math.copysign(math.exp(log_val), coeff)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from a tuple of ints/strings (keyed BLAKE2b).

    This is the documented derivation used everywhere a seed stream is split:
    seed_trial = derive_seed(master_seed, cell_index, trial_index, stream_tag).
    """
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        if isinstance(part, (int, np.integer)):
            h.update(b"i")
            h.update(int(part).to_bytes(16, "little", signed=True))
        elif isinstance(part, str):
            h.update(b"s")
            h.update(part.encode("utf-8"))
        else:
            raise TypeError(f"unsupported seed part: {part!r}")
    return int.from_bytes(h.digest(), "little")


# --- bitset helpers (rows of uint64 words, bit k = entity k) ---

def bitset_width(nbits: int) -> int:
    return (nbits + 63) // 64


def popcount(arr: np.ndarray) -> np.ndarray:
    return np.bitwise_count(arr)


def bit_positions(row: np.ndarray) -> np.ndarray:
    """Positions of set bits in a 1-d uint64 bitset row, ascending."""
    bits = np.unpackbits(row.view(np.uint8), bitorder="little")
    return np.flatnonzero(bits)


def rows_as_void(rows: np.ndarray) -> np.ndarray:
    """View an (m, k) int array as m opaque fixed-size records so that numpy
    set operations (unique/isin/intersect) work row-wise."""
    rows = np.ascontiguousarray(rows)
    if rows.ndim != 2:
        raise ValueError("expected a 2-d array")
    return rows.view(np.dtype((np.void, rows.dtype.itemsize * rows.shape[1]))).ravel()


def lexsort_rows(rows: np.ndarray) -> np.ndarray:
    """Rows sorted lexicographically (first column most significant)."""
    if rows.shape[0] <= 1:
        return rows
    order = np.lexsort(rows.T[::-1])
    return rows[order]
