"""JSON Schema (draft 2020-12) documents for every report the CLI emits, version 1."""
from __future__ import annotations

VERSION = 1

_num = {"type": ["number", "null"]}
_params = {
    "type": "object",
    "required": ["d", "s", "alpha", "q", "p"],
    "properties": {"d": {"type": "integer", "minimum": 1}, "s": {"type": "number"},
                   "alpha": {"type": "number"}, "q": {"type": "number"}, "p": _num},
}
_interval = {
    "type": ["object", "null"],
    "required": ["lo", "hi", "lo_closed", "hi_closed", "text"],
    "properties": {"lo": {"type": "number"}, "hi": {"type": "number"},
                   "lo_closed": {"type": "boolean"}, "hi_closed": {"type": "boolean"},
                   "text": {"type": "string"}},
}
_fit = {
    "type": "object",
    "required": ["fitted", "stderr", "expected", "verdict"],
    "properties": {"fitted": {"type": "number"}, "stderr": {"type": "number"},
                   "expected": _num,
                   "verdict": {"enum": ["Match", "Mismatch", "Inconclusive"]}},
}
_sample = {
    "type": "object",
    "required": ["axis_value", "lp_p", "seminorm_sq", "coulomb", "quotient", "quotient_p"],
    "additionalProperties": {"type": "number"},
}
_corpus = {
    "type": "object",
    "required": ["schema", "kind", "label", "max", "median", "spread", "argmax",
                 "argmax_bumps", "bounded", "threshold", "values", "config"],
    "properties": {
        "schema": {"const": VERSION}, "kind": {"const": "corpus"},
        "label": {"type": "string"}, "max": {"type": "number"}, "median": {"type": "number"},
        "spread": {"type": "number"}, "argmax": {"type": "integer", "minimum": 0},
        "argmax_bumps": {"type": "array"}, "bounded": {"type": "boolean"},
        "threshold": {"type": "number"},
        "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
        "config": {"type": "object"},
    },
}
_state = {
    "type": "object",
    "required": ["params", "exponents", "status", "Q", "iterations", "gradient_norm",
                 "step", "normalization", "grid", "warnings"],
    "properties": {
        "params": _params,
        "exponents": {"type": "array", "items": {"type": "number"}, "minItems": 2,
                      "maxItems": 2},
        "status": {"enum": ["Converged", "MaxIterations", "Stalled"]},
        "Q": {"type": "number"}, "iterations": {"type": "integer", "minimum": 0},
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}


def _envelope(kind: str, required: list, properties: dict) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "type": "object",
        "required": ["schema", "kind", "config"] + required,
        "properties": {"schema": {"const": VERSION}, "kind": {"const": kind},
                       "config": {"type": "object", "required": ["schema", "command"]},
                       **properties},
    }


SCHEMAS = {
    "exponents": _envelope("exponents", ["bundle", "radial_improves", "note"], {
        "bundle": {"type": "object",
                   "required": ["params", "p_endpoint", "p_sobolev", "p_rad", "p_interval",
                                "p_interval_radial", "regime", "warnings"],
                   "properties": {"params": _params, "p_interval": _interval,
                                  "p_interval_radial": _interval,
                                  "regime": {"type": "string"},
                                  "warnings": {"type": "array", "items": {"type": "string"}}}},
        "radial_improves": {"type": "boolean"}}),
    "energy": _envelope("energy", ["params", "lp_p", "lp_norm", "seminorm_sq", "coulomb",
                                   "quotient", "degenerate", "exponents"], {
        "params": _params, "lp_p": {"type": "number"}, "lp_norm": {"type": "number"},
        "seminorm_sq": {"type": "number"}, "coulomb": {"type": "number"},
        "quotient": {"type": "number"}, "degenerate": {"type": "boolean"}}),
    "sweep": _envelope("sweep", ["label", "axis", "primary", "fitted_slope", "verdict",
                                 "fits", "samples", "warnings"], {
        "axis": {"enum": ["lambda", "R", "S", "m"]},
        "primary": {"type": "string"},
        "verdict": {"enum": ["Match", "Mismatch", "Inconclusive"]},
        "fits": {"type": "object", "additionalProperties": _fit},
        "samples": {"type": "array", "items": _sample, "minItems": 4},
        "warnings": {"type": "array", "items": {"type": "string"}}}),
    "corpus_set": _envelope("corpus_set", ["reports", "bounded"], {
        "reports": {"type": "object", "additionalProperties": _corpus, "minProperties": 1},
        "bounded": {"type": "boolean"}}),
    "optimizer": _envelope("optimizer", ["best", "starts", "start_spread"], {
        "best": _state, "starts": {"type": "array", "items": _state, "minItems": 1},
        "start_spread": {"type": "number", "minimum": 0}}),
}


def schema_for(kind: str) -> dict:
    try:
        return SCHEMAS[kind]
    except KeyError:
        raise KeyError(f"no schema for report kind {kind!r}") from None
