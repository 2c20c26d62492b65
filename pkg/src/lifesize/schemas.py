"""JSON Schemas (draft 2020-12) for every JSON document the CLI emits."""

from __future__ import annotations

_NUM = {"type": "number"}
_INT = {"type": "integer"}
_FLAGS = {"type": "array", "items": {"type": "string"}}

_MODEL = {
    "type": "object",
    "required": ["target", "scenario", "coefficients", "fov_range"],
    "additionalProperties": False,
    "properties": {
        "target": {"enum": ["radian", "radius"]},
        "scenario": {"type": "integer", "minimum": 1},
        "coefficients": {"type": "array", "items": _NUM, "minItems": 1, "maxItems": 4},
        "fov_range": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
    },
}

MODELS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "lifesize/placement-models/v1",
    "type": "object",
    "required": ["schema", "models"],
    "properties": {
        "schema": {"const": "lifesize/placement-models/v1"},
        "models": {"type": "array", "items": _MODEL},
        "fit": {
            "type": "object",
            "required": ["order", "rss", "n_samples", "monotone_by_order", "pearson", "spearman"],
            "properties": {
                "order": {"type": "integer", "minimum": 1, "maximum": 3},
                "rss": {"type": "number", "minimum": 0},
                "n_samples": _INT,
                "monotone_by_order": {"type": "object", "additionalProperties": {"type": "boolean"}},
                "pearson": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
                "spearman": {"type": ["number", "null"], "minimum": -1, "maximum": 1},
            },
        },
    },
}

LAYOUT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "lifesize/layout/v1",
    "type": "object",
    "required": ["placement", "n_remote", "poses", "flags", "source", "fov"],
    "additionalProperties": False,
    "properties": {
        "placement": {
            "type": "object",
            "required": ["radian_deg", "radius_m"],
            "properties": {
                "radian_deg": {"type": ["number", "null"], "minimum": 0, "exclusiveMaximum": 180},
                "radius_m": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "n_remote": {"type": "integer", "minimum": 1},
        "poses": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["x", "z", "yaw"],
                "additionalProperties": False,
                "properties": {
                    "x": _NUM,
                    "z": {"type": "number", "exclusiveMinimum": 0},
                    "yaw": {"type": "number", "exclusiveMinimum": -180, "maximum": 180},
                },
            },
        },
        "flags": _FLAGS,
        "source": {"enum": ["model", "pilot"]},
        "fov": {
            "type": "object",
            "required": ["diagonal_deg", "aspect"],
            "properties": {
                "diagonal_deg": {"type": "number", "exclusiveMinimum": 0, "maximum": 180},
                "aspect": {
                    "oneOf": [
                        {"type": "null"},
                        {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
                    ]
                },
            },
        },
    },
}

_RECT = {
    "type": "object",
    "required": ["name", "center", "half_extents"],
    "properties": {
        "name": {"enum": ["top", "bottom", "left", "right"]},
        "center": {"type": "array", "items": _NUM, "minItems": 2, "maxItems": 2},
        "half_extents": {
            "type": "array",
            "items": {"type": "number", "minimum": 0},
            "minItems": 2,
            "maxItems": 2,
        },
    },
}

OCCLUDERS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "lifesize/occluder-rig/v1",
    "type": "object",
    "required": [
        "distance_m",
        "clear_half_width_m",
        "clear_half_height_m",
        "device_half_width_m",
        "device_half_height_m",
        "degenerate",
        "occluders",
    ],
    "properties": {
        "distance_m": {"type": "number", "exclusiveMinimum": 0},
        "clear_half_width_m": {"type": "number", "exclusiveMinimum": 0},
        "clear_half_height_m": {"type": "number", "exclusiveMinimum": 0},
        "device_half_width_m": {"type": "number", "exclusiveMinimum": 0},
        "device_half_height_m": {"type": "number", "exclusiveMinimum": 0},
        "degenerate": {"type": "boolean"},
        "occluders": {"type": "array", "items": _RECT, "minItems": 4, "maxItems": 4},
    },
}

_STREAM = {
    "type": "object",
    "required": [
        "stream_id",
        "src",
        "dst",
        "kind",
        "frame_bytes",
        "frames_offered",
        "frames_sent",
        "frames_dropped",
        "starved",
        "mean_bits_per_s",
        "peak_bits_per_s",
        "pass",
    ],
    "properties": {
        "stream_id": {"type": "string", "pattern": r"^p\d+->p\d+:(pose|video)$"},
        "src": _INT,
        "dst": _INT,
        "kind": {"enum": ["pose", "video"]},
        "frame_bytes": {"type": "integer", "minimum": 1},
        "frames_offered": {"type": "integer", "minimum": 0},
        "frames_sent": {"type": "integer", "minimum": 0},
        "frames_dropped": {"type": "integer", "minimum": 0},
        "starved": {"type": "boolean"},
        "mean_bits_per_s": {"type": "number", "minimum": 0},
        "peak_bits_per_s": {"type": "number", "minimum": 0},
        "pass": {"type": "boolean"},
    },
}

SIMULATION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "$id": "lifesize/simulation-summary/v1",
    "type": "object",
    "required": [
        "peers",
        "mode",
        "duration_s",
        "seed",
        "fps",
        "frame_bytes",
        "budget_bits_per_s",
        "session_converged",
        "peer_states",
        "streams",
        "pass",
    ],
    "properties": {
        "peers": {"type": "integer", "minimum": 2},
        "mode": {"enum": ["avatar", "video-grid", "video-avatar"]},
        "duration_s": {"type": "number", "exclusiveMinimum": 0},
        "seed": _INT,
        "fps": {"type": "number", "exclusiveMinimum": 0},
        "frame_bytes": {"type": "integer", "minimum": 1},
        "latency_ms": _NUM,
        "jitter_ms": _NUM,
        "budget_bits_per_s": {"type": "number", "exclusiveMinimum": 0},
        "window_s": {"type": "number", "exclusiveMinimum": 0},
        "converged_ms": {"type": ["number", "null"]},
        "stream_start_ms": _NUM,
        "session_converged": {"type": "boolean"},
        "total_peak_bits_per_s": _NUM,
        "peer_states": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["peer", "phase", "mode", "known_peers", "placements_known", "violations"],
                "properties": {
                    "peer": _INT,
                    "phase": {"enum": ["idle", "joining", "active", "closed"]},
                    "mode": {"enum": ["avatar", "video-grid", "video-avatar"]},
                    "known_peers": {"type": "array", "items": _INT},
                    "placements_known": _INT,
                    "violations": _INT,
                },
            },
        },
        "streams": {"type": "array", "items": _STREAM},
        "pass": {"type": "boolean"},
    },
}

SCHEMAS = {
    "layout": LAYOUT_SCHEMA,
    "fit": MODELS_SCHEMA,
    "models": MODELS_SCHEMA,
    "occluders": OCCLUDERS_SCHEMA,
    "simulate": SIMULATION_SCHEMA,
}
