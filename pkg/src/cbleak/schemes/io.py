"""Versioned binary-safe text serialization for keys and templates.

Everything is JSON; numpy arrays are embedded as base64 of their C-order
bytes together with dtype and shape, so round-trips are bit-exact and the
files stay printable.
"""

from __future__ import annotations

import base64
import json

import numpy as np

from . import ProtectedTemplate, SchemeKey
from .biohash import BioHashKey
from .bloom import BloomKey
from .ifo import IfoKey
from .iom import IoMKey
from .nmdsh import NmdshModel

__all__ = ["save_key", "load_key", "save_template", "load_template"]

KEY_FORMAT = "cbleak-key-v1"
TEMPLATE_FORMAT = "cbleak-template-v1"


def _enc(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr)
    return {
        "dtype": arr.dtype.str,
        "shape": list(arr.shape),
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def _dec(obj: dict) -> np.ndarray:
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype=np.dtype(obj["dtype"])).reshape(obj["shape"]).copy()


def save_key(key: SchemeKey, path) -> None:
    if isinstance(key, BioHashKey):
        doc = {"scheme": "biohash", "tau": key.tau, "seed": key.seed, "matrix": _enc(key.matrix)}
    elif isinstance(key, IoMKey):
        doc = {"scheme": "iom", "seed": key.seed, "matrices": _enc(key.matrices)}
    elif isinstance(key, NmdshModel):
        doc = {
            "scheme": "nmdsh",
            "alpha": key.alpha,
            "lo": _enc(key.lo),
            "hi": _enc(key.hi),
            "pairs": _enc(key.pairs),
            "omegas": _enc(key.omegas),
            "eigenvalues": _enc(key.eigenvalues),
        }
    elif isinstance(key, BloomKey):
        doc = {
            "scheme": "bloom",
            "word_size": key.word_size,
            "block_size": key.block_size,
            "xor_mask": key.xor_mask,
            "seed": key.seed,
            "perm": _enc(key.perm),
        }
    elif isinstance(key, IfoKey):
        doc = {
            "scheme": "ifo",
            "window": key.window,
            "tau": key.tau,
            "seed": key.seed,
            "perms": _enc(key.perms),
        }
    else:
        raise ValueError(f"unknown key type {type(key)!r}")
    doc["format"] = KEY_FORMAT
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_key(path) -> SchemeKey:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("format") != KEY_FORMAT:
        raise ValueError(f"not a {KEY_FORMAT} file")
    scheme = doc["scheme"]
    if scheme == "biohash":
        return BioHashKey(matrix=_dec(doc["matrix"]), tau=doc["tau"], seed=doc["seed"])
    if scheme == "iom":
        return IoMKey(matrices=_dec(doc["matrices"]), seed=doc["seed"])
    if scheme == "nmdsh":
        return NmdshModel(
            lo=_dec(doc["lo"]),
            hi=_dec(doc["hi"]),
            pairs=_dec(doc["pairs"]),
            omegas=_dec(doc["omegas"]),
            eigenvalues=_dec(doc["eigenvalues"]),
            alpha=doc["alpha"],
        )
    if scheme == "bloom":
        return BloomKey(
            word_size=doc["word_size"],
            block_size=doc["block_size"],
            xor_mask=doc["xor_mask"],
            perm=_dec(doc["perm"]),
            seed=doc["seed"],
        )
    if scheme == "ifo":
        return IfoKey(perms=_dec(doc["perms"]), window=doc["window"], tau=doc["tau"], seed=doc["seed"])
    raise ValueError(f"unknown scheme {scheme!r}")


def save_template(tmpl: ProtectedTemplate, path) -> None:
    doc = {
        "format": TEMPLATE_FORMAT,
        "scheme": tmpl.scheme,
        "length": tmpl.length,
        "payload": _enc(tmpl.payload),
    }
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, sort_keys=True)
        fh.write("\n")


def load_template(path) -> ProtectedTemplate:
    with open(path, "r", encoding="ascii") as fh:
        doc = json.load(fh)
    if doc.get("format") != TEMPLATE_FORMAT:
        raise ValueError(f"not a {TEMPLATE_FORMAT} file")
    return ProtectedTemplate(payload=_dec(doc["payload"]), scheme=doc["scheme"], length=doc["length"])
