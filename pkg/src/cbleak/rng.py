"""Named random streams derived from a single master seed.

Every stochastic component of the toolkit (class centers, sample noise,
scheme keys, GA populations, pair subsampling) draws from its own stream
so that each stage can be regenerated independently and reproducibly.

Labeling scheme: the stream for ``(master_seed, *labels)`` is seeded with
``sha256("{master_seed}/{label0}/{label1}/...")`` interpreted as eight
32-bit words.  The text rendering makes the derivation stable across
processes and platforms.
"""

from __future__ import annotations

import hashlib

import numpy as np

__all__ = ["stream", "derive_seed"]


def _digest_words(master_seed: int, labels: tuple) -> list[int]:
    h = hashlib.sha256()
    h.update(str(int(master_seed)).encode("ascii"))
    for label in labels:
        h.update(b"/")
        h.update(str(label).encode("utf-8"))
    raw = h.digest()
    return [int.from_bytes(raw[i : i + 4], "little") for i in range(0, 32, 4)]


def stream(master_seed: int, *labels) -> np.random.Generator:
    """Return the named random stream for ``(master_seed, *labels)``."""
    return np.random.default_rng(np.random.SeedSequence(_digest_words(master_seed, labels)))


def derive_seed(master_seed: int, *labels) -> int:
    """Collapse a named stream identity to a plain 63-bit integer seed."""
    words = _digest_words(master_seed, labels)
    return (words[0] | (words[1] << 32)) & 0x7FFF_FFFF_FFFF_FFFF
