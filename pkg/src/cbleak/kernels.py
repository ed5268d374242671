"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The expensive inner loops of the toolkit live here: pairwise template
distances (millions of pairs for leakage estimation) and the batch
transforms of the binary-code schemes (evaluated for every GA child in
every generation).  Each kernel has two interchangeable implementations:

* a ``numba.njit`` version (default when numba imports cleanly), and
* a vectorized pure-numpy version.

Set the environment variable ``CBLEAK_NO_NUMBA=1`` before import to force
the numpy path, or call :func:`set_backend` at runtime.  Both paths are
covered by the test suite and compared by ``benchmarks/bench_kernels.py``.
"""

from __future__ import annotations

import os

import numpy as np

__all__ = [
    "active_backend",
    "set_backend",
    "numba_available",
    "pair_mismatch",
    "pair_euclidean",
    "pair_ifo_distance",
    "pair_bloom_distance",
    "ifo_transform_batch",
    "bloom_transform_batch",
]


def _env_disabled() -> bool:
    return os.environ.get("CBLEAK_NO_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


try:
    if _env_disabled():
        raise ImportError("numba disabled by CBLEAK_NO_NUMBA")
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised via CBLEAK_NO_NUMBA
    _HAVE_NUMBA = False

_ACTIVE = "numba" if _HAVE_NUMBA else "numpy"


def numba_available() -> bool:
    return _HAVE_NUMBA


def active_backend() -> str:
    return _ACTIVE


def set_backend(name: str) -> None:
    """Select 'numba' or 'numpy' for all kernel dispatch."""
    global _ACTIVE
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is unavailable")
    _ACTIVE = name


# ---------------------------------------------------------------------------
# pair_mismatch: fraction of differing positions for selected row pairs.
# Serves normalized Hamming distance on bit rows and collision distance on
# integer index rows alike.

def pair_mismatch_numpy(rows: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    return (rows[ia] != rows[ib]).mean(axis=1)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _pair_mismatch_nb(rows, ia, ib):
        n_pairs = ia.shape[0]
        length = rows.shape[1]
        out = np.empty(n_pairs, dtype=np.float64)
        for p in range(n_pairs):
            a = ia[p]
            b = ib[p]
            diff = 0
            for j in range(length):
                if rows[a, j] != rows[b, j]:
                    diff += 1
            out[p] = diff / length
        return out


def pair_mismatch(rows: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows)
    ia = np.asarray(ia, dtype=np.int64)
    ib = np.asarray(ib, dtype=np.int64)
    if _ACTIVE == "numba":
        return _pair_mismatch_nb(rows, ia, ib)
    return pair_mismatch_numpy(rows, ia, ib)


# ---------------------------------------------------------------------------
# pair_euclidean: 2-norm distance for selected row pairs of a float matrix.

def pair_euclidean_numpy(feats: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    diff = feats[ia] - feats[ib]
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


if _HAVE_NUMBA:

    @njit(cache=True)
    def _pair_euclidean_nb(feats, ia, ib):
        n_pairs = ia.shape[0]
        dim = feats.shape[1]
        out = np.empty(n_pairs, dtype=np.float64)
        for p in range(n_pairs):
            a = ia[p]
            b = ib[p]
            acc = 0.0
            for j in range(dim):
                d = feats[a, j] - feats[b, j]
                acc += d * d
            out[p] = np.sqrt(acc)
        return out


def pair_euclidean(feats: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    feats = np.ascontiguousarray(feats, dtype=np.float64)
    ia = np.asarray(ia, dtype=np.int64)
    ib = np.asarray(ib, dtype=np.int64)
    if _ACTIVE == "numba":
        return _pair_euclidean_nb(feats, ia, ib)
    return pair_euclidean_numpy(feats, ia, ib)


# ---------------------------------------------------------------------------
# pair_ifo_distance: 1 - collision fraction over flattened IFO templates,
# where the sentinel (-1) never matches, not even against itself.

def pair_ifo_distance_numpy(tmpl: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    a = tmpl[ia]
    b = tmpl[ib]
    hits = ((a == b) & (a != -1)).mean(axis=1)
    return 1.0 - hits


if _HAVE_NUMBA:

    @njit(cache=True)
    def _pair_ifo_distance_nb(tmpl, ia, ib):
        n_pairs = ia.shape[0]
        length = tmpl.shape[1]
        out = np.empty(n_pairs, dtype=np.float64)
        for p in range(n_pairs):
            a = ia[p]
            b = ib[p]
            hits = 0
            for j in range(length):
                va = tmpl[a, j]
                if va != -1 and va == tmpl[b, j]:
                    hits += 1
            out[p] = 1.0 - hits / length
        return out


def pair_ifo_distance(tmpl: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    tmpl = np.ascontiguousarray(tmpl)
    ia = np.asarray(ia, dtype=np.int64)
    ib = np.asarray(ib, dtype=np.int64)
    if _ACTIVE == "numba":
        return _pair_ifo_distance_nb(tmpl, ia, ib)
    return pair_ifo_distance_numpy(tmpl, ia, ib)


# ---------------------------------------------------------------------------
# pair_bloom_distance: per-block |b1 XOR b2| / (|b1| + |b2|), averaged over
# blocks.  Filters are stacked as (n_templates, n_blocks, filter_size) bits.

def pair_bloom_distance_numpy(filters: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    a = filters[ia]
    b = filters[ib]
    xor = (a != b).sum(axis=2, dtype=np.int64)
    tot = a.sum(axis=2, dtype=np.int64) + b.sum(axis=2, dtype=np.int64)
    per_block = np.divide(xor, tot, out=np.zeros(xor.shape, dtype=np.float64), where=tot > 0)
    return per_block.mean(axis=1)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _pair_bloom_distance_nb(filters, ia, ib):
        n_pairs = ia.shape[0]
        n_blocks = filters.shape[1]
        size = filters.shape[2]
        out = np.empty(n_pairs, dtype=np.float64)
        for p in range(n_pairs):
            a = ia[p]
            b = ib[p]
            acc = 0.0
            for k in range(n_blocks):
                xor = 0
                tot = 0
                for j in range(size):
                    va = filters[a, k, j]
                    vb = filters[b, k, j]
                    if va != vb:
                        xor += 1
                    tot += va + vb
                if tot > 0:
                    acc += xor / tot
            out[p] = acc / n_blocks
        return out


def pair_bloom_distance(filters: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    filters = np.ascontiguousarray(filters)
    ia = np.asarray(ia, dtype=np.int64)
    ib = np.asarray(ib, dtype=np.int64)
    if _ACTIVE == "numba":
        return _pair_bloom_distance_nb(filters, ia, ib)
    return pair_bloom_distance_numpy(filters, ia, ib)


# ---------------------------------------------------------------------------
# ifo_transform_batch: the IFO hashing core.  For every repetition the P
# column permutations are applied, the permuted codes are multiplied
# elementwise, and each row records the 0-based index of the first 1 within
# the leading window, reduced modulo (window - tau); -1 if the window holds
# no 1.

def ifo_transform_batch_numpy(
    codes: np.ndarray, perms: np.ndarray, window: int, tau: int
) -> np.ndarray:
    n_codes, height, _ = codes.shape
    m = perms.shape[0]
    p_count = perms.shape[1]
    mod = window - tau
    out = np.empty((n_codes, height, m), dtype=np.int16)
    for r in range(m):
        prod = codes[:, :, perms[r, 0]]
        for p in range(1, p_count):
            prod = prod & codes[:, :, perms[r, p]]
        win = prod[:, :, :window]
        first = win.argmax(axis=2)
        empty = ~win.any(axis=2)
        vals = (first % mod).astype(np.int16)
        vals[empty] = -1
        out[:, :, r] = vals
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _ifo_transform_batch_nb(codes, perms, window, tau):
        n_codes, height, _ = codes.shape
        m = perms.shape[0]
        p_count = perms.shape[1]
        mod = window - tau
        out = np.empty((n_codes, height, m), dtype=np.int16)
        for c in range(n_codes):
            for r in range(m):
                for row in range(height):
                    found = np.int16(-1)
                    for j in range(window):
                        bit = codes[c, row, perms[r, 0, j]]
                        for p in range(1, p_count):
                            if bit == 0:
                                break
                            bit = bit & codes[c, row, perms[r, p, j]]
                        if bit != 0:
                            found = np.int16(j % mod)
                            break
                    out[c, row, r] = found
        return out


def ifo_transform_batch(
    codes: np.ndarray, perms: np.ndarray, window: int, tau: int
) -> np.ndarray:
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    perms = np.ascontiguousarray(perms, dtype=np.int64)
    if _ACTIVE == "numba":
        return _ifo_transform_batch_nb(codes, perms, int(window), int(tau))
    return ifo_transform_batch_numpy(codes, perms, int(window), int(tau))


# ---------------------------------------------------------------------------
# bloom_transform_batch: permute columns, read the top `word_size` bits of
# each column MSB-first, XOR with the application mask, and set the indexed
# bit of the owning block's filter.

def bloom_transform_batch_numpy(
    codes: np.ndarray, perm: np.ndarray, xor_mask: int, word_size: int, block_size: int
) -> np.ndarray:
    n_codes, _, width = codes.shape
    n_blocks = width // block_size
    permuted = codes[:, :word_size, :][:, :, perm]
    weights = (1 << np.arange(word_size - 1, -1, -1)).astype(np.int64)
    words = np.tensordot(permuted.astype(np.int64), weights, axes=([1], [0]))
    words ^= xor_mask
    filters = np.zeros((n_codes, n_blocks, 1 << word_size), dtype=np.uint8)
    block_of_col = np.repeat(np.arange(n_blocks), block_size)
    code_idx = np.repeat(np.arange(n_codes), width)
    filters[code_idx, np.tile(block_of_col, n_codes), words.ravel()] = 1
    return filters


if _HAVE_NUMBA:

    @njit(cache=True)
    def _bloom_transform_batch_nb(codes, perm, xor_mask, word_size, block_size):
        n_codes = codes.shape[0]
        width = codes.shape[2]
        n_blocks = width // block_size
        filters = np.zeros((n_codes, n_blocks, 1 << word_size), dtype=np.uint8)
        for c in range(n_codes):
            for col in range(width):
                src = perm[col]
                word = 0
                for r in range(word_size):
                    word = (word << 1) | codes[c, r, src]
                word ^= xor_mask
                filters[c, col // block_size, word] = 1
        return filters


def bloom_transform_batch(
    codes: np.ndarray, perm: np.ndarray, xor_mask: int, word_size: int, block_size: int
) -> np.ndarray:
    codes = np.ascontiguousarray(codes, dtype=np.uint8)
    perm = np.ascontiguousarray(perm, dtype=np.int64)
    if _ACTIVE == "numba":
        return _bloom_transform_batch_nb(
            codes, perm, int(xor_mask), int(word_size), int(block_size)
        )
    return bloom_transform_batch_numpy(codes, perm, int(xor_mask), int(word_size), int(block_size))
