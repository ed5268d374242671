"""Bloom-filter protection for binary code matrices.

Columns of the (permuted) code are grouped into equal blocks; the top
`word_size` bits of each column form a word (most-significant bit first,
a fixed convention since cross-implementation equality depends on it),
the word is XORed with the application-specific mask, and the indexed bit
of the owning block's 2^word_size filter is set.

Dissimilarity between two filter sets is |b1 XOR b2| / (|b1| + |b2|) per
block, averaged over blocks; similarity is 1 minus that.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import kernels
from ..rng import stream

__all__ = [
    "BloomKey",
    "bloom_keygen",
    "bloom_transform",
    "bloom_transform_batch",
    "bloom_dissimilarity",
    "bloom_similarity",
]


@dataclass(frozen=True)
class BloomKey:
    word_size: int  # bits read from the top of each column
    block_size: int  # columns per block
    xor_mask: int  # word_size-bit application key
    perm: np.ndarray  # column permutation of the code width
    seed: int

    def __post_init__(self):
        if self.word_size < 1:
            raise ValueError("word_size must be positive")
        if self.block_size < 1:
            raise ValueError("block_size must be positive")
        if not 0 <= self.xor_mask < (1 << self.word_size):
            raise ValueError("xor_mask must fit in word_size bits")
        width = self.perm.shape[0]
        if width % self.block_size != 0:
            raise ValueError("code width must be divisible by block_size")
        if not np.array_equal(np.sort(self.perm), np.arange(width)):
            raise ValueError("perm must be a permutation of the columns")

    @property
    def width(self) -> int:
        return self.perm.shape[0]

    @property
    def n_blocks(self) -> int:
        return self.width // self.block_size


def bloom_keygen(width: int, word_size: int, block_size: int, seed: int = 0) -> BloomKey:
    rng = stream(seed, "bloom")
    perm = rng.permutation(width)
    xor_mask = int(rng.integers(0, 1 << word_size))
    return BloomKey(
        word_size=word_size, block_size=block_size, xor_mask=xor_mask, perm=perm, seed=seed
    )


def bloom_transform(code: np.ndarray, key: BloomKey) -> np.ndarray:
    """Map one H x W code to (n_blocks, 2^word_size) filter bit-arrays."""
    return bloom_transform_batch(np.asarray(code)[None, :, :], key)[0]


def bloom_transform_batch(codes: np.ndarray, key: BloomKey) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.uint8)
    if codes.ndim != 3:
        raise ValueError("batch must be (n_codes, H, W)")
    _, height, width = codes.shape
    if width != key.width:
        raise ValueError(f"code width {width} does not match key width {key.width}")
    if key.word_size > height:
        raise ValueError("word_size exceeds code height")
    return kernels.bloom_transform_batch(
        codes, key.perm, key.xor_mask, key.word_size, key.block_size
    )


def bloom_dissimilarity(f1: np.ndarray, f2: np.ndarray) -> float:
    """Average over blocks of |b1 XOR b2| / (|b1| + |b2|); empty-vs-empty
    blocks contribute 0."""
    if f1.shape != f2.shape:
        raise ValueError("filter shape mismatch")
    xor = (f1 != f2).sum(axis=1, dtype=np.int64)
    tot = f1.sum(axis=1, dtype=np.int64) + f2.sum(axis=1, dtype=np.int64)
    per_block = np.divide(xor, tot, out=np.zeros(len(xor), dtype=np.float64), where=tot > 0)
    return float(per_block.mean())


def bloom_similarity(f1: np.ndarray, f2: np.ndarray) -> float:
    return 1.0 - bloom_dissimilarity(f1, f2)
