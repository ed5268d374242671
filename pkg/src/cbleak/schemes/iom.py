"""Index-of-Max hashing: m Gaussian projections of q rows each; every
repetition records the argmax index of the projected values.  The template
is the length-m integer vector of indices; similarity is the fraction of
colliding positions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..rng import stream

__all__ = ["IoMKey", "iom_keygen", "iom_transform", "iom_transform_batch", "iom_similarity"]


@dataclass(frozen=True)
class IoMKey:
    matrices: np.ndarray  # (m, q, n) i.i.d. N(0, 1)
    seed: int

    def __post_init__(self):
        if self.matrices.ndim != 3:
            raise ValueError("matrices must be (m, q, n)")
        m, q, _ = self.matrices.shape
        if m < 1 or q < 2:
            raise ValueError("need m >= 1 Gaussian matrices of q >= 2 rows")

    @property
    def m(self) -> int:
        return self.matrices.shape[0]

    @property
    def q(self) -> int:
        return self.matrices.shape[1]

    @property
    def n(self) -> int:
        return self.matrices.shape[2]


def iom_keygen(n: int, m: int, q: int, seed: int = 0) -> IoMKey:
    if m < 1 or q < 2:
        raise ValueError("need m >= 1 and q >= 2")
    mats = stream(seed, "iom").standard_normal((m, q, n))
    return IoMKey(matrices=mats, seed=seed)


def iom_transform(x: np.ndarray, key: IoMKey) -> np.ndarray:
    """Hash one feature vector to m argmax indices (ties to smallest index)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (key.n,):
        raise ValueError(f"feature dim {x.shape} does not match key dim ({key.n},)")
    prods = key.matrices @ x  # (m, q)
    return prods.argmax(axis=1).astype(np.int32)


def iom_transform_batch(xs: np.ndarray, key: IoMKey) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != key.n:
        raise ValueError("batch must be (n_samples, n)")
    flat = key.matrices.reshape(key.m * key.q, key.n)
    prods = xs @ flat.T  # (batch, m*q)
    return prods.reshape(xs.shape[0], key.m, key.q).argmax(axis=2).astype(np.int32)


def iom_similarity(t1: np.ndarray, t2: np.ndarray) -> float:
    """Fraction of positions whose recorded indices collide."""
    if t1.shape != t2.shape:
        raise ValueError("template length mismatch")
    return float((t1 == t2).mean())
