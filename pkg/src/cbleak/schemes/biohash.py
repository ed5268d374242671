"""BioHashing: seeded random projection with orthonormal columns, then
threshold binarization.  Bit i of the code is 1 iff x . b_i - tau > 0.
Matching uses normalized Hamming distance (similarity = 1 - distance)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import stream

__all__ = ["BioHashKey", "biohash_keygen", "biohash_transform", "biohash_transform_batch", "biohash_similarity"]


@dataclass(frozen=True)
class BioHashKey:
    matrix: np.ndarray  # (n, l), orthonormal columns
    tau: float
    seed: int

    def __post_init__(self):
        n, l = self.matrix.shape
        if l > n:
            raise ValueError("code length l must not exceed feature dim n")
        gram = self.matrix.T @ self.matrix
        if not np.allclose(gram, np.eye(l), atol=1e-9):
            raise ValueError("projection columns must be orthonormal within 1e-9")

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def l(self) -> int:
        return self.matrix.shape[1]


def biohash_keygen(n: int, l: int, tau: float = 0.0, seed: int = 0) -> BioHashKey:
    """Draw an n x l Gaussian matrix and orthonormalize its columns (QR).

    The resulting operator norm is 1, so the projection never amplifies
    feature perturbations.
    """
    if l > n:
        raise ValueError(f"l={l} exceeds feature dimension n={n}")
    if l < 1:
        raise ValueError("l must be positive")
    g = stream(seed, "biohash").standard_normal((n, l))
    q, r = np.linalg.qr(g)
    # fix QR sign ambiguity so keys are deterministic across BLAS builds
    q = q * np.sign(np.diag(r))[None, :]
    return BioHashKey(matrix=q, tau=float(tau), seed=seed)


def biohash_transform(x: np.ndarray, key: BioHashKey) -> np.ndarray:
    """Binarize the projections of one feature vector; returns l bits."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (key.n,):
        raise ValueError(f"feature dim {x.shape} does not match key dim ({key.n},)")
    return ((x @ key.matrix - key.tau) > 0).astype(np.uint8)


def biohash_transform_batch(xs: np.ndarray, key: BioHashKey) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != key.n:
        raise ValueError("batch must be (n_samples, n)")
    return ((xs @ key.matrix - key.tau) > 0).astype(np.uint8)


def biohash_similarity(c1: np.ndarray, c2: np.ndarray) -> float:
    if c1.shape != c2.shape:
        raise ValueError("code length mismatch")
    return 1.0 - float((c1 != c2).mean())
