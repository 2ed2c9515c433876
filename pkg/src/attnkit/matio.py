"""JSON encoding for matrices, vectors, and masks.

Matrix schema: {"shape": [n, m], "rows": [[...], ...]}. Entries are
numbers or the string "-inf", which marks a hard exclusion; parsing
returns the finite values plus the admissibility mask. Masks can also
be supplied as explicit 0/1 matrices. A bare list of lists is accepted
as shorthand on input; output always writes the full schema.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import ConfigInvalid


def matrix_from_json(obj, where: str = "matrix") -> tuple[np.ndarray, np.ndarray]:
    """Parse a matrix object into (values, mask)."""
    if isinstance(obj, list):
        rows = obj
        shape = None
    elif isinstance(obj, dict) and "rows" in obj:
        rows = obj["rows"]
        shape = obj.get("shape")
    else:
        raise ConfigInvalid(where, "expected a matrix object with a 'rows' field")
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ConfigInvalid(where, "'rows' must be a nonempty list of lists")
    width = len(rows[0])
    values = np.zeros((len(rows), width))
    mask = np.ones((len(rows), width), dtype=bool)
    for i, row in enumerate(rows):
        if len(row) != width:
            raise ConfigInvalid(where, f"row {i} has length {len(row)}, expected {width}")
        for j, entry in enumerate(row):
            if entry == "-inf":
                mask[i, j] = False
            elif isinstance(entry, (int, float)) and not isinstance(entry, bool):
                if not math.isfinite(entry):
                    if entry == -math.inf:
                        mask[i, j] = False
                    else:
                        raise ConfigInvalid(where, f"non-finite entry at ({i},{j})")
                else:
                    values[i, j] = float(entry)
            else:
                raise ConfigInvalid(where, f"entry at ({i},{j}) is not a number or '-inf'")
    if shape is not None and tuple(shape) != values.shape:
        raise ConfigInvalid(
            where, f"declared shape {shape} does not match rows {list(values.shape)}"
        )
    return values, mask


def mask_from_json(obj, where: str = "mask") -> np.ndarray:
    values, mask = matrix_from_json(obj, where)
    if not mask.all():
        raise ConfigInvalid(where, "a mask matrix cannot itself contain '-inf'")
    if not np.isin(values, (0.0, 1.0)).all():
        raise ConfigInvalid(where, "mask entries must be 0 or 1")
    return values > 0


def vector_from_json(obj, where: str = "vector") -> np.ndarray:
    if isinstance(obj, dict) and "values" in obj:
        obj = obj["values"]
    if not isinstance(obj, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in obj
    ):
        raise ConfigInvalid(where, "expected a list of numbers")
    return np.asarray(obj, dtype=np.float64)


def matrix_to_json(values, mask=None) -> dict:
    values = np.asarray(values, dtype=np.float64)
    rows = []
    for i in range(values.shape[0]):
        row = []
        for j in range(values.shape[1]):
            if mask is not None and not mask[i, j]:
                row.append("-inf")
            else:
                row.append(float(values[i, j]))
        rows.append(row)
    return {"shape": list(values.shape), "rows": rows}


def vector_to_json(values) -> list:
    return [float(x) for x in np.asarray(values, dtype=np.float64)]


def dump_canonical(obj) -> str:
    """Deterministic serialization: sorted keys, fixed separators, one
    trailing newline. Byte-identical for equal content."""
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def load_json(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise ConfigInvalid(str(path), "input file does not exist")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigInvalid(str(path), f"invalid JSON: {exc}") from exc
