"""Indexing-First-One hashing for binary code matrices.

Each of the m repetitions applies its P column permutations, multiplies
the permuted codes elementwise (Hadamard product), and records per code
row the 0-based index of the first 1 within the leading window of size K,
reduced modulo (K - tau).  Rows whose window holds no 1 receive the
sentinel -1, which never matches any value during similarity scoring.
Output orientation is (code rows) x m.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..rng import stream

__all__ = ["IfoKey", "ifo_keygen", "ifo_transform", "ifo_transform_batch", "ifo_similarity"]

SENTINEL = -1


@dataclass(frozen=True)
class IfoKey:
    perms: np.ndarray  # (m, P, width) column permutations
    window: int  # K: leading entries scanned per row
    tau: int  # security threshold; indices reduced mod (K - tau)
    seed: int

    def __post_init__(self):
        if self.perms.ndim != 3:
            raise ValueError("perms must be (m, P, width)")
        if self.window - self.tau < 2:
            raise ValueError("need window - tau >= 2")
        width = self.perms.shape[2]
        if self.window > width:
            raise ValueError("window exceeds code width")
        base = np.arange(width)
        for rep in self.perms.reshape(-1, width):
            if not np.array_equal(np.sort(rep), base):
                raise ValueError("every permutation must be a bijection on columns")

    @property
    def m(self) -> int:
        return self.perms.shape[0]

    @property
    def p(self) -> int:
        return self.perms.shape[1]

    @property
    def width(self) -> int:
        return self.perms.shape[2]


def ifo_keygen(width: int, m: int, p: int, window: int, tau: int = 0, seed: int = 0) -> IfoKey:
    if m < 1 or p < 1:
        raise ValueError("need m >= 1 repetitions and p >= 1 permutations")
    rng = stream(seed, "ifo")
    perms = np.stack([np.stack([rng.permutation(width) for _ in range(p)]) for _ in range(m)])
    return IfoKey(perms=perms, window=window, tau=tau, seed=seed)


def ifo_transform(code: np.ndarray, key: IfoKey) -> np.ndarray:
    """Hash one H x W code to an (H, m) integer matrix."""
    return ifo_transform_batch(np.asarray(code)[None, :, :], key)[0]


def ifo_transform_batch(codes: np.ndarray, key: IfoKey) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.uint8)
    if codes.ndim != 3:
        raise ValueError("batch must be (n_codes, H, W)")
    if codes.shape[2] != key.width:
        raise ValueError(f"code width {codes.shape[2]} does not match key width {key.width}")
    return kernels.ifo_transform_batch(codes, key.perms, key.window, key.tau)


def ifo_similarity(t1: np.ndarray, t2: np.ndarray) -> float:
    """Collision fraction over all positions; sentinels never match."""
    if t1.shape != t2.shape:
        raise ValueError("template shape mismatch")
    return float(((t1 == t2) & (t1 != SENTINEL)).mean())
