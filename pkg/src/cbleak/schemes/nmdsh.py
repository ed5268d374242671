"""Non-linear multi-dimensional spectral hashing.

The model learns per-dimension data ranges [a_i, b_i] from training
features and keeps the l smoothest one-dimensional basis modes across all
dimensions.  We use the closed-form basis for uniform distributions on an
interval:

    phi_ij(x) = cos(omega_ij * (x_i - a_i)),   omega_ij = j*pi / (b_i - a_i)

with a mode weight exp(-omega^2 / 2) that decreases in j / (b_i - a_i);
after ascending sort the top-l (largest-weight, i.e. smoothest) index
pairs form the retained set.  Each output entry passes through the odd
bounded nonlinearity

    softmod(v, alpha) = 2 / (1 + exp(-8 sin(alpha * pi * v))) - 1

whose rate alpha trades matching accuracy against attack resistance.
Similarity is 1 minus Euclidean distance normalized by the 2*sqrt(l)
diameter of the (-1, 1)^l output cube.

The closed-form uniform basis is a documented stand-in: the model type
isolates it so an alternative basis can be swapped in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["NmdshModel", "softmod", "nmdsh_train", "nmdsh_transform", "nmdsh_transform_batch", "nmdsh_similarity"]


def softmod(x, alpha: float):
    """Odd bounded nonlinearity 2/(1+e^(-8 sin(alpha pi x))) - 1."""
    return 2.0 / (1.0 + np.exp(-8.0 * np.sin(alpha * np.pi * np.asarray(x, dtype=np.float64)))) - 1.0


@dataclass(frozen=True)
class NmdshModel:
    lo: np.ndarray  # (dim,) per-dimension range lower bound a_i
    hi: np.ndarray  # (dim,) per-dimension range upper bound b_i
    pairs: np.ndarray  # (l, 2) retained (dimension, mode) index pairs
    omegas: np.ndarray  # (l,) angular frequencies of the retained modes
    eigenvalues: np.ndarray  # (l,) mode weights, descending
    alpha: float

    def __post_init__(self):
        if self.pairs.shape[0] != self.omegas.shape[0]:
            raise ValueError("pairs and omegas must agree in length")
        dims = self.pairs[:, 0]
        if not (self.lo[dims] < self.hi[dims]).all():
            raise ValueError("retained modes must come from non-degenerate dimensions")

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    @property
    def l(self) -> int:
        return self.pairs.shape[0]


def nmdsh_train(training, l: int, alpha: float) -> NmdshModel:
    """Fit per-dimension ranges and retain the l smoothest basis modes.

    `training` is a feature matrix or any object with a `.features`
    attribute.  Deterministic: ties in mode weight break on (dim, mode).
    """
    feats = getattr(training, "features", training)
    feats = np.asarray(feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[0] == 0:
        raise ValueError("training features must be a nonempty 2-D array")
    if l < 1:
        raise ValueError("l must be positive")
    lo = feats.min(axis=0)
    hi = feats.max(axis=0)
    usable = np.flatnonzero(hi > lo)
    if usable.size == 0:
        raise ValueError("all feature dimensions are degenerate")
    # l modes per usable dimension is an upper bound on what top-l can need
    dims = np.repeat(usable, l)
    modes = np.tile(np.arange(1, l + 1), usable.size)
    omegas = modes * np.pi / (hi[dims] - lo[dims])
    # weight decreases in omega, so ascending omega = descending weight;
    # sorting on omega sidesteps exp underflow ties
    order = np.lexsort((modes, dims, omegas))[:l]
    weights = np.exp(-0.5 * omegas**2)
    return NmdshModel(
        lo=lo,
        hi=hi,
        pairs=np.column_stack([dims[order], modes[order]]).astype(np.int64),
        omegas=omegas[order],
        eigenvalues=weights[order],
        alpha=float(alpha),
    )


def nmdsh_transform(x: np.ndarray, model: NmdshModel) -> np.ndarray:
    return nmdsh_transform_batch(np.asarray(x, dtype=np.float64)[None, :], model)[0]


def nmdsh_transform_batch(xs: np.ndarray, model: NmdshModel) -> np.ndarray:
    """Encode features: clamp to the learned ranges, evaluate the retained
    basis modes, and apply softmod."""
    xs = np.asarray(xs, dtype=np.float64)
    if xs.ndim != 2 or xs.shape[1] != model.dim:
        raise ValueError(f"feature dim {xs.shape} does not match model dim {model.dim}")
    dims = model.pairs[:, 0]
    vals = np.clip(xs[:, dims], model.lo[dims], model.hi[dims])
    phi = np.cos(model.omegas[None, :] * (vals - model.lo[dims][None, :]))
    return softmod(phi, model.alpha)


def nmdsh_similarity(y1: np.ndarray, y2: np.ndarray) -> float:
    if y1.shape != y2.shape:
        raise ValueError("code length mismatch")
    scale = 2.0 * np.sqrt(y1.shape[-1])
    return 1.0 - float(np.linalg.norm(y1 - y2) / scale)
