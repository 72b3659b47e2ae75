"""I/O service — JSON configs in, JSON/CSV results out.

- load_config: read a JSON object, ConfigError on anything else
- parse_complex: number or {"re", "im"} -> complex
- write_json: schema-check, then write sorted, indented UTF-8 JSON atomically
- write_csv: RFC-4180 CSV (CRLF line endings)

Identical payloads always serialize to identical bytes.
"""

import csv
import json
import logging
import os
import tempfile
from functools import lru_cache
from pathlib import Path

import jsonschema
import numpy as np

from app.errors import ConfigError, NumericFailureError

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


# --- Reading ---

def load_config(path):
    """Parse a JSON config file into a dict.

    Args:
        path: Path to a JSON file holding one object.

    Returns:
        The parsed dict.

    Raises:
        ConfigError: If the file is missing, unreadable, not JSON or not an object.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except (OSError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"config {path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    logger.debug(f"Loaded config {path} with keys {sorted(data)}")
    return data


def require(data, key, section="config"):
    if key not in data:
        raise ConfigError(f"{section} is missing required key {key!r}")
    return data[key]


def parse_complex(value, name="value"):
    """Accept 1.5, [re, im] or {"re": .., "im": ..}."""
    try:
        if isinstance(value, dict):
            return complex(float(value.get("re", 0.0)), float(value.get("im", 0.0)))
        if isinstance(value, (list, tuple)) and len(value) == 2:
            return complex(float(value[0]), float(value[1]))
        if isinstance(value, bool):
            raise TypeError("boolean is not a number")
        return complex(float(value))
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number or {{re, im}}, got {value!r}")


def parse_number(data, key, default=None, kind=float, section="config"):
    """Typed scalar lookup with a ConfigError on a bad value."""
    if key not in data:
        if default is None:
            raise ConfigError(f"{section} is missing required key {key!r}")
        return default
    value = data[key]
    if isinstance(value, bool):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")
    try:
        return kind(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{section}.{key} must be a number, got {value!r}")


# --- Serialization ---

def to_serializable(obj):
    """Recursively turn numpy scalars/arrays and complex numbers into JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_serializable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_serializable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_serializable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def dumps(payload):
    return json.dumps(
        to_serializable(payload),
        sort_keys=True,
        indent=2,
        ensure_ascii=False,
        allow_nan=False,
    ) + "\n"


@lru_cache(maxsize=None)
def load_schema(name):
    with open(SCHEMA_DIR / f"{name}.schema.json", "r", encoding="utf-8") as f:
        return json.load(f)


def validate(payload, schema_name):
    """NumericFailureError if a result payload breaks the named schema."""
    try:
        jsonschema.validate(instance=to_serializable(payload), schema=load_schema(schema_name))
    except jsonschema.ValidationError as e:
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise NumericFailureError(
            f"result does not match {schema_name} schema at {path}: {e.message}",
            diagnostics={"schema": schema_name, "path": path},
        ) from e


def _atomic_write(path, text, newline=None):
    full_path = os.path.abspath(path)
    dir_path = os.path.dirname(full_path)
    if dir_path:
        os.makedirs(dir_path, exist_ok=True)
    with tempfile.NamedTemporaryFile(
        "w", delete=False, dir=dir_path, encoding="utf-8", newline=newline, suffix=".tmp"
    ) as f:
        tmp_path = f.name
        f.write(text)
    os.replace(tmp_path, full_path)
    return full_path


def write_json(path, payload, schema_name=None):
    if schema_name is not None:
        validate(payload, schema_name)
    full_path = _atomic_write(path, dumps(payload), newline="\n")
    logger.info(f"Wrote {full_path}")
    return full_path


def write_csv(path, header, rows):
    full_path = os.path.abspath(path)
    dir_path = os.path.dirname(full_path)
    if dir_path:
        os.makedirs(dir_path, exist_ok=True)
    with open(full_path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)  # excel dialect: RFC-4180 quoting and CRLF
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    logger.info(f"Wrote {full_path} ({len(rows)} rows)")
    return full_path


def sibling_path(out_path, suffix):
    """results.json + "_hist.csv" -> results_hist.csv."""
    stem, _ = os.path.splitext(out_path)
    return f"{stem}{suffix}"
