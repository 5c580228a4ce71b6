"""Reading and writing plants and controllers.

Files are JSON documents::

    {
      "format": "encperf.system/1",
      "kind": "plant",                       # or "controller"
      "name": "batch_reactor_plant",
      "description": "...",                  # optional
      "matrices": {
        "A": {"rows": 4, "cols": 4, "data": [1.18, 0.0, ...]},   # row-major
        ...
      }
    }

Plants take ``A, B, C`` and optionally ``B1, F1, C1, E, D1``; controllers
take ``Ac, Bc, Cc, Dc`` and optionally ``B2, F2``. A matrix with zero rows
or columns is written with an empty ``data`` list.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Union

import numpy as np

from .ss_core import Controller, DimensionError, Plant

__all__ = ["SchemaError", "load_system", "save_system", "system_to_dict", "system_from_dict", "dumps"]

FORMAT = "encperf.system/1"
FIELDS = {
    "plant": (Plant, ("A", "B", "C"), ("B1", "F1", "C1", "E", "D1")),
    "controller": (Controller, ("Ac", "Bc", "Cc", "Dc"), ("B2", "F2")),
}


class SchemaError(ValueError):
    """Malformed system file; the message names the file location or field."""


def _matrix(name: str, spec) -> np.ndarray:
    where = f"matrices.{name}"
    if not isinstance(spec, dict):
        raise SchemaError(f"{where}: expected an object with rows, cols, data")
    for key in ("rows", "cols", "data"):
        if key not in spec:
            raise SchemaError(f"{where}: missing field '{key}'")
    rows, cols, data = spec["rows"], spec["cols"], spec["data"]
    if not (isinstance(rows, int) and isinstance(cols, int)) or rows < 0 or cols < 0:
        raise SchemaError(f"{where}: rows/cols must be non-negative integers")
    if not isinstance(data, list) or len(data) != rows * cols:
        got = len(data) if isinstance(data, list) else type(data).__name__
        raise SchemaError(f"{where}.data: expected {rows * cols} entries for {rows}x{cols}, got {got}")
    try:
        values = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{where}.data: non-numeric entry ({exc})") from None
    if not np.all(np.isfinite(values)):
        raise SchemaError(f"{where}.data: entries must be finite")
    return values.reshape(rows, cols)


def system_from_dict(doc: dict) -> Union[Plant, Controller]:
    if not isinstance(doc, dict):
        raise SchemaError("top level must be a JSON object")
    if doc.get("format") != FORMAT:
        raise SchemaError(f"format: expected {FORMAT!r}, got {doc.get('format')!r}")
    kind = doc.get("kind")
    if kind not in FIELDS:
        raise SchemaError(f"kind: expected 'plant' or 'controller', got {kind!r}")
    cls, required, optional = FIELDS[kind]
    mats = doc.get("matrices")
    if not isinstance(mats, dict):
        raise SchemaError("matrices: missing or not an object")
    unknown = set(mats) - set(required) - set(optional)
    if unknown:
        raise SchemaError(f"matrices: unknown field(s) {sorted(unknown)} for a {kind}")
    kwargs = {}
    for name in required:
        if name not in mats:
            raise SchemaError(f"matrices.{name}: required for a {kind}")
        kwargs[name] = _matrix(name, mats[name])
    for name in optional:
        if name in mats:
            kwargs[name] = _matrix(name, mats[name])
    try:
        return cls(**kwargs)
    except DimensionError as exc:
        raise DimensionError(f"{kind} dimension mismatch: {exc}") from None


def load_system(path) -> Union[Plant, Controller]:
    """Parse and validate a plant or controller file."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if not text.strip():
        raise SchemaError(f"{path}: empty file")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return system_from_dict(doc)
    except SchemaError as exc:
        raise SchemaError(f"{path}: {exc}") from None


def system_to_dict(system: Union[Plant, Controller], name: str = "", description: str = "") -> dict:
    kind = "plant" if isinstance(system, Plant) else "controller"
    _, required, optional = FIELDS[kind]
    mats = {}
    for f in required + optional:
        M = getattr(system, f)
        mats[f] = {"rows": M.shape[0], "cols": M.shape[1], "data": [float(v) for v in M.ravel()]}
    doc = {"format": FORMAT, "kind": kind, "name": name}
    if description:
        doc["description"] = description
    doc["matrices"] = mats
    return doc


def dumps(system, name: str = "", description: str = "") -> str:
    return json.dumps(system_to_dict(system, name, description), indent=1) + "\n"


def save_system(system, path, name: str = "", description: str = "") -> None:
    Path(path).write_text(dumps(system, name, description), encoding="utf-8")
