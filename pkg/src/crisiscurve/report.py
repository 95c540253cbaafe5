"""Artifact serialization: deterministic JSON writing and schema access.

JSON artifacts are written with sorted keys, two-space indentation, and a
trailing newline; floats rely on Python's shortest round-trip repr. The
same config and seed therefore always produce byte-identical files.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

SCHEMA_NAMES = (
    "diagnostics",
    "box_stats",
    "forecast",
    "peak",
    "ols",
    "rankings",
    "crisis_weights",
)


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(path: Path, obj) -> None:
    path.write_text(dumps_json(obj), encoding="utf-8")


def write_text(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8")


def load_schema(name: str) -> dict:
    """Load one of the committed artifact schemas by short name."""
    if name not in SCHEMA_NAMES:
        raise KeyError(f"unknown schema {name!r}; have {SCHEMA_NAMES}")
    ref = resources.files("crisiscurve") / "schemas" / f"{name}.schema.json"
    return json.loads(ref.read_text(encoding="utf-8"))
