"""Seeded synthetic datasets and the distance metrics used throughout.

Real-valued feature sets stand in for deep face embeddings: class centers
drawn on the unit sphere with Gaussian intra-class noise, re-normalized to
unit length.  Binary code sets stand in for iris codes: a Bernoulli(0.5)
master code per class with independent per-bit flips.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .rng import stream

__all__ = [
    "RealFeatureSet",
    "BinaryCodeSet",
    "DistancePair",
    "gen_real_dataset",
    "gen_binary_dataset",
    "euclidean",
    "normalized_hamming",
    "save_dataset",
    "load_dataset",
]


class DistancePair(NamedTuple):
    """An (input-space distance, transform-space distance) observation."""

    s: float
    t: float


@dataclass(frozen=True)
class RealFeatureSet:
    """Unit-norm real feature vectors with class labels, class-major order."""

    features: np.ndarray  # (n_classes * samples_per_class, dim) float64
    labels: np.ndarray  # (n,) int64
    dim: int
    n_classes: int
    samples_per_class: int
    intra_sigma: float
    seed: int

    def __post_init__(self):
        if self.features.shape != (self.n_classes * self.samples_per_class, self.dim):
            raise ValueError("feature array shape inconsistent with declared sizes")
        if not np.isfinite(self.features).all():
            raise ValueError("features must be finite")
        expected = np.repeat(np.arange(self.n_classes), self.samples_per_class)
        if not np.array_equal(self.labels, expected):
            raise ValueError("labels must partition samples class-major")

    def class_rows(self, label: int) -> np.ndarray:
        lo = label * self.samples_per_class
        return self.features[lo : lo + self.samples_per_class]


@dataclass(frozen=True)
class BinaryCodeSet:
    """Binary H x W code matrices with class labels, class-major order."""

    codes: np.ndarray  # (n, H, W) uint8
    labels: np.ndarray  # (n,) int64
    height: int
    width: int
    flip_rate: float
    n_classes: int
    samples_per_class: int
    seed: int

    def __post_init__(self):
        n = self.n_classes * self.samples_per_class
        if self.codes.shape != (n, self.height, self.width):
            raise ValueError("code array shape inconsistent with declared sizes")
        if self.codes.dtype != np.uint8 or not np.isin(self.codes, (0, 1)).all():
            raise ValueError("codes must be 0/1 uint8")
        expected = np.repeat(np.arange(self.n_classes), self.samples_per_class)
        if not np.array_equal(self.labels, expected):
            raise ValueError("labels must partition samples class-major")

    def class_rows(self, label: int) -> np.ndarray:
        lo = label * self.samples_per_class
        return self.codes[lo : lo + self.samples_per_class]


def gen_real_dataset(
    n_classes: int,
    samples_per_class: int,
    dim: int,
    intra_sigma: float,
    seed: int,
) -> RealFeatureSet:
    """Generate a labeled set of unit-norm feature vectors.

    Class centers are i.i.d. standard normal scaled to unit norm; each
    sample is center + N(0, intra_sigma^2 I), re-normalized to unit norm.
    Deterministic per seed: centers and noise draw from named streams
    derived from the master seed.
    """
    if n_classes < 2 or samples_per_class < 2 or dim < 2:
        raise ValueError("need n_classes >= 2, samples_per_class >= 2, dim >= 2")
    if not intra_sigma >= 0.0:
        raise ValueError("intra_sigma must be non-negative")
    centers = stream(seed, "centers").standard_normal((n_classes, dim))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    noise = stream(seed, "noise").standard_normal((n_classes, samples_per_class, dim))
    samples = centers[:, None, :] + intra_sigma * noise
    norms = np.linalg.norm(samples, axis=2, keepdims=True)
    if (norms == 0).any():
        raise ValueError("degenerate zero-norm sample; change seed or sigma")
    samples /= norms
    features = samples.reshape(n_classes * samples_per_class, dim)
    labels = np.repeat(np.arange(n_classes), samples_per_class)
    return RealFeatureSet(
        features=features,
        labels=labels,
        dim=dim,
        n_classes=n_classes,
        samples_per_class=samples_per_class,
        intra_sigma=float(intra_sigma),
        seed=seed,
    )


def gen_binary_dataset(
    n_classes: int,
    samples_per_class: int,
    height: int,
    width: int,
    flip_rate: float,
    seed: int,
) -> BinaryCodeSet:
    """Generate labeled binary codes: per-class Bernoulli(0.5) master, each
    sample flips every bit independently with probability flip_rate."""
    if n_classes < 2 or samples_per_class < 2 or height < 1 or width < 1:
        raise ValueError("invalid dataset sizes")
    if not 0.0 <= flip_rate < 0.5:
        raise ValueError("flip_rate must lie in [0, 0.5)")
    masters = stream(seed, "masters").integers(0, 2, size=(n_classes, height, width), dtype=np.uint8)
    flips = stream(seed, "flips").random((n_classes, samples_per_class, height, width)) < flip_rate
    codes = (masters[:, None, :, :] ^ flips.astype(np.uint8)).reshape(
        n_classes * samples_per_class, height, width
    )
    labels = np.repeat(np.arange(n_classes), samples_per_class)
    return BinaryCodeSet(
        codes=codes,
        labels=labels,
        height=height,
        width=width,
        flip_rate=float(flip_rate),
        n_classes=n_classes,
        samples_per_class=samples_per_class,
        seed=seed,
    )


def euclidean(a: np.ndarray, b: np.ndarray) -> float:
    """2-norm distance between two equal-length real vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.linalg.norm(a - b))


def normalized_hamming(a: np.ndarray, b: np.ndarray) -> float:
    """Fraction of differing positions between two equal-shape bit arrays."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise ValueError("empty input")
    return float((a != b).mean())


# ---------------------------------------------------------------------------
# Columnar text serialization: a single '#'-prefixed header line with the
# generation parameters, then one sample per line as "label v1 v2 ... vn"
# (flattened row-major for binary codes).  Floats use repr-exact %.17g.

def save_dataset(dataset: RealFeatureSet | BinaryCodeSet, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        if isinstance(dataset, RealFeatureSet):
            fh.write(
                "# cbleak-dataset-v1 kind=real"
                f" n_classes={dataset.n_classes}"
                f" samples_per_class={dataset.samples_per_class}"
                f" dim={dataset.dim}"
                f" intra_sigma={dataset.intra_sigma!r}"
                f" seed={dataset.seed}\n"
            )
            for label, row in zip(dataset.labels, dataset.features):
                fh.write(str(int(label)))
                fh.write(" ")
                fh.write(" ".join(f"{v:.17g}" for v in row))
                fh.write("\n")
        elif isinstance(dataset, BinaryCodeSet):
            fh.write(
                "# cbleak-dataset-v1 kind=binary"
                f" n_classes={dataset.n_classes}"
                f" samples_per_class={dataset.samples_per_class}"
                f" height={dataset.height}"
                f" width={dataset.width}"
                f" flip_rate={dataset.flip_rate!r}"
                f" seed={dataset.seed}\n"
            )
            for label, code in zip(dataset.labels, dataset.codes):
                fh.write(str(int(label)))
                fh.write(" ")
                fh.write(" ".join(str(int(v)) for v in code.ravel()))
                fh.write("\n")
        else:
            raise ValueError(f"unknown dataset type {type(dataset)!r}")


def _parse_header(line: str) -> dict:
    if not line.startswith("# cbleak-dataset-v1 "):
        raise ValueError("not a cbleak-dataset-v1 file")
    fields = {}
    for tok in line[len("# cbleak-dataset-v1 ") :].split():
        key, _, val = tok.partition("=")
        fields[key] = val
    return fields

def load_dataset(path) -> RealFeatureSet | BinaryCodeSet:
    with open(path, "r", encoding="ascii") as fh:
        header = _parse_header(fh.readline().rstrip("\n"))
        rows = [line.split() for line in fh if line.strip()]
    labels = np.array([int(r[0]) for r in rows], dtype=np.int64)
    if header["kind"] == "real":
        features = np.array([[float(v) for v in r[1:]] for r in rows], dtype=np.float64)
        return RealFeatureSet(
            features=features,
            labels=labels,
            dim=int(header["dim"]),
            n_classes=int(header["n_classes"]),
            samples_per_class=int(header["samples_per_class"]),
            intra_sigma=float(header["intra_sigma"]),
            seed=int(header["seed"]),
        )
    if header["kind"] == "binary":
        height = int(header["height"])
        width = int(header["width"])
        codes = np.array(
            [[int(v) for v in r[1:]] for r in rows], dtype=np.uint8
        ).reshape(len(rows), height, width)
        return BinaryCodeSet(
            codes=codes,
            labels=labels,
            height=height,
            width=width,
            flip_rate=float(header["flip_rate"]),
            n_classes=int(header["n_classes"]),
            samples_per_class=int(header["samples_per_class"]),
            seed=int(header["seed"]),
        )
    raise ValueError(f"unknown dataset kind {header['kind']!r}")
