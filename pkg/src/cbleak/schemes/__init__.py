"""The five cancelable transforms behind one scheme-agnostic contract.

Per-scheme modules expose flat keygen/transform/similarity functions; this
package adds the uniform facade the attack, metrics, leakage, and CLI
layers consume: key construction from a dataset, batch transforms, native
distances in [0, 1] (similarity = 1 - distance for every scheme), and
vectorized pair distances over stacked template payloads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .. import kernels
from ..synthdata import BinaryCodeSet, RealFeatureSet
from .biohash import (
    BioHashKey,
    biohash_keygen,
    biohash_similarity,
    biohash_transform,
    biohash_transform_batch,
)
from .bloom import (
    BloomKey,
    bloom_dissimilarity,
    bloom_keygen,
    bloom_similarity,
    bloom_transform,
    bloom_transform_batch,
)
from .ifo import SENTINEL, IfoKey, ifo_keygen, ifo_similarity, ifo_transform, ifo_transform_batch
from .iom import IoMKey, iom_keygen, iom_similarity, iom_transform, iom_transform_batch
from .nmdsh import (
    NmdshModel,
    nmdsh_similarity,
    nmdsh_train,
    nmdsh_transform,
    nmdsh_transform_batch,
    softmod,
)

__all__ = [
    "SchemeKey",
    "ProtectedTemplate",
    "SCHEME_NAMES",
    "BioHashKey",
    "IoMKey",
    "NmdshModel",
    "BloomKey",
    "IfoKey",
    "SENTINEL",
    "biohash_keygen",
    "biohash_transform",
    "biohash_transform_batch",
    "biohash_similarity",
    "iom_keygen",
    "iom_transform",
    "iom_transform_batch",
    "iom_similarity",
    "softmod",
    "nmdsh_train",
    "nmdsh_transform",
    "nmdsh_transform_batch",
    "nmdsh_similarity",
    "bloom_keygen",
    "bloom_transform",
    "bloom_transform_batch",
    "bloom_similarity",
    "bloom_dissimilarity",
    "ifo_keygen",
    "ifo_transform",
    "ifo_transform_batch",
    "ifo_similarity",
    "scheme_name",
    "input_kind",
    "make_key",
    "transform",
    "transform_batch",
    "template",
    "distance",
    "similarity",
    "pair_distance",
    "distance_to_refs",
]

SchemeKey = Union[BioHashKey, IoMKey, NmdshModel, BloomKey, IfoKey]

SCHEME_NAMES = ("biohash", "iom", "nmdsh", "bloom", "ifo")

_KEY_TO_NAME = {
    BioHashKey: "biohash",
    IoMKey: "iom",
    NmdshModel: "nmdsh",
    BloomKey: "bloom",
    IfoKey: "ifo",
}


@dataclass(frozen=True)
class ProtectedTemplate:
    """A transformed template: payload array, owning scheme tag, length."""

    payload: np.ndarray
    scheme: str
    length: int

    def __post_init__(self):
        expected = {
            "biohash": (np.uint8, 1),
            "iom": (np.int32, 1),
            "nmdsh": (np.float64, 1),
            "bloom": (np.uint8, 2),
            "ifo": (np.int16, 2),
        }
        if self.scheme not in expected:
            raise ValueError(f"unknown scheme tag {self.scheme!r}")
        dtype, ndim = expected[self.scheme]
        if self.payload.dtype != dtype or self.payload.ndim != ndim:
            raise ValueError(f"payload type {self.payload.dtype}/{self.payload.ndim}d does not match scheme {self.scheme!r}")
        if self.length != self.payload.size:
            raise ValueError("length must equal payload size")
        if self.scheme == "ifo" and (self.payload < SENTINEL).any():
            raise ValueError("ifo entries must be >= sentinel")


def scheme_name(key: SchemeKey) -> str:
    try:
        return _KEY_TO_NAME[type(key)]
    except KeyError:
        raise ValueError(f"unknown key type {type(key)!r}") from None


def input_kind(key: SchemeKey) -> str:
    """'real' for feature-vector schemes, 'binary' for code-matrix schemes."""
    return "binary" if scheme_name(key) in ("bloom", "ifo") else "real"


def input_dim(key: SchemeKey):
    """Feature dimension (real schemes) or required code width (binary)."""
    name = scheme_name(key)
    if name == "biohash":
        return key.n
    if name == "iom":
        return key.n
    if name == "nmdsh":
        return key.dim
    return key.width


def make_key(scheme: str, dataset, params: dict, seed: int) -> SchemeKey:
    """Build a key for `scheme` sized to `dataset`.

    nmdsh trains its (deterministic, keyless) model on the dataset
    features; the seed argument is ignored for it.
    """
    params = dict(params or {})
    if scheme in ("biohash", "iom", "nmdsh"):
        if not isinstance(dataset, RealFeatureSet):
            raise ValueError(f"{scheme} requires a real feature dataset")
    elif scheme in ("bloom", "ifo"):
        if not isinstance(dataset, BinaryCodeSet):
            raise ValueError(f"{scheme} requires a binary code dataset")
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    if scheme == "biohash":
        return biohash_keygen(dataset.dim, params["l"], params.get("tau", 0.0), seed)
    if scheme == "iom":
        return iom_keygen(dataset.dim, params["m"], params.get("q", 16), seed)
    if scheme == "nmdsh":
        return nmdsh_train(dataset.features, params["l"], params.get("alpha", 0.5))
    if scheme == "bloom":
        key = bloom_keygen(dataset.width, params["word_size"], params["block_size"], seed)
        if key.word_size > dataset.height:
            raise ValueError("word_size exceeds code height")
        return key
    return ifo_keygen(
        dataset.width,
        params["m"],
        params.get("p", 3),
        params["window"],
        params.get("tau", 0),
        seed,
    )


def transform_batch(key: SchemeKey, inputs: np.ndarray) -> np.ndarray:
    name = scheme_name(key)
    if name == "biohash":
        return biohash_transform_batch(inputs, key)
    if name == "iom":
        return iom_transform_batch(inputs, key)
    if name == "nmdsh":
        return nmdsh_transform_batch(inputs, key)
    if name == "bloom":
        return bloom_transform_batch(inputs, key)
    return ifo_transform_batch(inputs, key)


def transform(key: SchemeKey, x: np.ndarray) -> np.ndarray:
    return transform_batch(key, np.asarray(x)[None, ...])[0]


def template(key: SchemeKey, x: np.ndarray) -> ProtectedTemplate:
    payload = transform(key, x)
    return ProtectedTemplate(payload=payload, scheme=scheme_name(key), length=payload.size)


def pair_distance(key: SchemeKey, payloads: np.ndarray, ia: np.ndarray, ib: np.ndarray) -> np.ndarray:
    """Native distances in [0, 1] for selected pairs of stacked payloads."""
    name = scheme_name(key)
    if name in ("biohash", "iom"):
        return kernels.pair_mismatch(payloads, ia, ib)
    if name == "nmdsh":
        scale = 2.0 * np.sqrt(payloads.shape[1])
        return kernels.pair_euclidean(payloads, ia, ib) / scale
    if name == "bloom":
        return kernels.pair_bloom_distance(payloads, ia, ib)
    flat = payloads.reshape(payloads.shape[0], -1)
    return kernels.pair_ifo_distance(flat, ia, ib)


def distance(key: SchemeKey, p1: np.ndarray, p2: np.ndarray) -> float:
    stacked = np.stack([p1, p2])
    return float(pair_distance(key, stacked, np.array([0]), np.array([1]))[0])


def similarity(key: SchemeKey, p1: np.ndarray, p2: np.ndarray) -> float:
    return 1.0 - distance(key, p1, p2)


def distance_to_refs(key: SchemeKey, batch_payloads: np.ndarray, ref_payloads: np.ndarray) -> np.ndarray:
    """Mean native distance of each batch payload to the reference payloads."""
    n_batch = batch_payloads.shape[0]
    n_refs = ref_payloads.shape[0]
    stacked = np.concatenate([batch_payloads, ref_payloads], axis=0)
    ia = np.repeat(np.arange(n_batch), n_refs)
    ib = n_batch + np.tile(np.arange(n_refs), n_batch)
    return pair_distance(key, stacked, ia, ib).reshape(n_batch, n_refs).mean(axis=1)
