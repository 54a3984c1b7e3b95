"""JSON Schemas for the CLI's machine-readable output."""

_num = {"type": ["number", "null"]}

EFFECT_SIZE_REPORT = {
    "type": "object",
    "required": ["n_pos", "n_neg", "z_factor", "ssmd", "robust_z_factor", "robust_ssmd", "gssmd", "ovl", "method", "params", "errors"],
    "properties": {
        "n_pos": {"type": "integer", "minimum": 1},
        "n_neg": {"type": "integer", "minimum": 1},
        "z_factor": {"type": ["number", "null"], "maximum": 1},
        "ssmd": _num,
        "robust_z_factor": {"type": ["number", "null"], "maximum": 1},
        "robust_ssmd": _num,
        "gssmd": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
        "ovl": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
        "method": {"enum": ["histogram", "parametric_normal", "kde"]},
        "params": {"type": "object"},
        "errors": {"type": "object", "additionalProperties": {"type": "string"}},
    },
    "additionalProperties": False,
}

_stats = {k: _num for k in ("mean", "variance", "min", "max", "q025", "q50", "q975", "mean_abs", "abs_q95")}

MEASURE_TABLE = {
    "type": "object",
    "required": ["experiment", "config", "measures", "rows"],
    "properties": {
        "experiment": {"enum": ["shift", "outlier", "null_bound"]},
        "config": {"type": "object"},
        "measures": {"type": "array", "items": {"type": "string"}},
        "rows": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["cell", "measure", "n", *_stats],
                "properties": {"cell": {"type": "object"}, "measure": {"type": "string"}, "n": {"type": "integer"}, **_stats},
                "additionalProperties": False,
            },
        },
    },
}

_flag = {"type": ["boolean", "null"]}

HIT_REPORT = {
    "type": "object",
    "required": ["plate_id", "measures", "thresholds", "bounds", "counts", "calls", "reference", "warnings"],
    "properties": {
        "plate_id": {"type": "string"},
        "measures": EFFECT_SIZE_REPORT,
        "thresholds": {
            "type": "object",
            "required": ["direction", "gssmd_eps0", "ssmd_strong", "ssmd_weak", "np_eps", "alpha"],
            "properties": {
                "direction": {"enum": [-1, 1]},
                "gssmd_eps0": _num,
                "ssmd_strong": _num,
                "ssmd_weak": _num,
                "np_eps": {"type": "number"},
                "alpha": {"type": "number"},
            },
        },
        "bounds": {"type": ["object", "null"]},
        "counts": {"type": "object", "additionalProperties": {"type": "integer"}},
        "calls": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["well_id", "row", "col", "value", "is_hit_gssmd", "is_hit_ssmd", "is_hit_ssmd_weak", "is_hit_np"],
                "properties": {
                    "well_id": {"type": "string"},
                    "row": {"type": "integer"},
                    "col": {"type": "integer"},
                    "value": {"type": "number"},
                    "is_hit_gssmd": _flag,
                    "is_hit_ssmd": {"type": "boolean"},
                    "is_hit_ssmd_weak": {"type": "boolean"},
                    "is_hit_np": {"type": "boolean"},
                },
            },
        },
        "reference": {"type": ["object", "null"]},
        "warnings": {"type": "array", "items": {"type": "string"}},
    },
}

SCREEN_PAYLOAD = {
    "type": "object",
    "required": ["plates", "skipped", "reference"],
    "properties": {
        "plates": {"type": "array", "items": HIT_REPORT},
        "skipped": {"type": "array"},
        "reference": {"type": ["object", "null"]},
    },
}


def envelope(payload_schema: dict) -> dict:
    return {
        "type": "object",
        "required": ["tool", "version", "command", "seed", "payload", "timing"],
        "properties": {
            "tool": {"const": "ovlstat"},
            "version": {"type": "string"},
            "command": {"type": "array", "items": {"type": "string"}},
            "seed": {"type": ["integer", "null"]},
            "payload": payload_schema,
            "timing": {"type": ["object", "null"]},
        },
        "additionalProperties": False,
    }
