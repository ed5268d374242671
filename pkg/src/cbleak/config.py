"""Declarative experiment configuration.

One JSON file drives every CLI command: dataset generation, the two system
definitions (compromised Sys C and target Sys T), GA settings, leakage
settings, and output options.  All seeds are explicit in the file, so an
experiment is reproducible from the file alone.  Validation is JSON-schema
based; invalid configs surface as ConfigError with machine-readable
messages.
"""

from __future__ import annotations

import json
from typing import Any

import jsonschema

from .rng import derive_seed

__all__ = ["ConfigError", "CONFIG_SCHEMA", "load_config", "validate_config", "apply_seed_override", "set_by_path"]


class ConfigError(ValueError):
    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


_SCHEME_PARAMS = {
    "type": "object",
    "properties": {
        "scheme": {"enum": ["biohash", "iom", "nmdsh", "bloom", "ifo"]},
        "params": {"type": "object"},
        "seed": {"type": "integer"},
    },
    "required": ["scheme", "params", "seed"],
    "additionalProperties": False,
}

CONFIG_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "dataset": {
            "type": "object",
            "oneOf": [
                {
                    "properties": {
                        "kind": {"const": "real"},
                        "n_classes": {"type": "integer", "minimum": 2},
                        "samples_per_class": {"type": "integer", "minimum": 2},
                        "dim": {"type": "integer", "minimum": 2},
                        "intra_sigma": {"type": "number", "exclusiveMinimum": -1},
                        "seed": {"type": "integer"},
                    },
                    "required": ["kind", "n_classes", "samples_per_class", "dim", "intra_sigma", "seed"],
                    "additionalProperties": False,
                },
                {
                    "properties": {
                        "kind": {"const": "binary"},
                        "n_classes": {"type": "integer", "minimum": 2},
                        "samples_per_class": {"type": "integer", "minimum": 2},
                        "height": {"type": "integer", "minimum": 1},
                        "width": {"type": "integer", "minimum": 1},
                        "flip_rate": {"type": "number", "minimum": 0, "exclusiveMaximum": 0.5},
                        "seed": {"type": "integer"},
                    },
                    "required": ["kind", "n_classes", "samples_per_class", "height", "width", "flip_rate", "seed"],
                    "additionalProperties": False,
                },
            ],
        },
        "sys_c": _SCHEME_PARAMS,
        "sys_t": _SCHEME_PARAMS,
        "attack": {
            "type": "object",
            "properties": {
                "population_size": {"type": "integer", "minimum": 4},
                "crossover_fraction": {"type": "number", "minimum": 0, "maximum": 1},
                "mutation_rate": {"type": "number", "minimum": 0, "maximum": 1},
                "mutation_sigma": {"type": ["number", "null"]},
                "max_generations": {"type": "integer", "minimum": 1},
                "tolerance": {"type": "number", "minimum": 0},
                "n_templates": {"type": "integer", "minimum": 1},
                "identities": {
                    "oneOf": [
                        {"type": "null"},
                        {"type": "integer", "minimum": 1},
                        {"type": "array", "items": {"type": "integer", "minimum": 0}},
                    ]
                },
                "seed": {"type": "integer"},
            },
            "required": ["seed"],
            "additionalProperties": False,
        },
        "leakage": {
            "type": "object",
            "properties": {
                "bin_width": {"type": "number", "exclusiveMinimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "max_pairs": {"type": ["integer", "null"], "minimum": 1},
                "seed": {"type": "integer"},
            },
            "required": ["seed"],
            "additionalProperties": False,
        },
        "metrics": {
            "type": "object",
            "properties": {
                "max_non_mated": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer"},
            },
            "required": ["seed"],
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "parameter": {"type": "string", "minLength": 1},
                "values": {"type": "array", "items": {"type": ["number", "integer"]}},
                "with_attack": {"type": "boolean"},
                "with_leakage": {"type": "boolean"},
            },
            "required": ["parameter", "values"],
            "additionalProperties": False,
        },
        "output": {
            "type": "object",
            "properties": {
                "dump_scores": {"type": "boolean"},
                "dump_traces": {"type": "boolean"},
            },
            "additionalProperties": False,
        },
    },
    "required": ["dataset", "sys_t", "metrics"],
    "additionalProperties": False,
}

_SEED_PATHS = [
    ("dataset", "seed"),
    ("sys_c", "seed"),
    ("sys_t", "seed"),
    ("attack", "seed"),
    ("leakage", "seed"),
    ("metrics", "seed"),
]


def validate_config(config: dict) -> dict:
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(config), key=lambda e: list(e.absolute_path))
    if errors:
        raise ConfigError(
            f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}" for e in errors
        )
    return config


def load_config(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError([f"config is not valid JSON: {exc}"]) from exc
    return validate_config(config)


def apply_seed_override(config: dict, seed_override: int) -> dict:
    """Replace every seed in the config with a stream derived from the
    override, labeled by its config path."""
    out = json.loads(json.dumps(config))
    for section, field in _SEED_PATHS:
        if section in out and field in out[section]:
            out[section][field] = derive_seed(seed_override, section, field)
    return out


def set_by_path(config: dict, dotted: str, value) -> dict:
    """Return a copy with `dotted` (e.g. 'sys_t.params.l') set to value.

    The shorthand 'params.X' fans out to both systems, which is how code
    length sweeps keep Sys C and Sys T consistent.
    """
    out = json.loads(json.dumps(config))
    paths = [dotted]
    if dotted.startswith("params."):
        paths = [f"sys_c.{dotted}", f"sys_t.{dotted}"] if "sys_c" in out else [f"sys_t.{dotted}"]
    for path in paths:
        node = out
        keys = path.split(".")
        for key in keys[:-1]:
            if key not in node:
                raise ConfigError([f"sweep parameter path {path!r} not found in config"])
            node = node[key]
        node[keys[-1]] = value
    return out
