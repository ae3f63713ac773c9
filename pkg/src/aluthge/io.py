"""
Matrix files, report serialization and trace export.

A matrix file is a JSON object::

    {"dim": 2, "layout": "dense", "entries": [[[3.0, 0.0], [0.0, 0.0]],
                                              [[-2.0, 0.0], [1.0, 0.0]]],
     "label": "optional", "seed": 7}

Dense entries may be plain numbers or ``[re, im]`` pairs. The ``"records"``
layout lists ``[row, col, re, im]`` for the nonzero entries. Floats are
written with ``repr``, the shortest string that reads back to the same bits.
"""
import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .exceptions import MatrixFormatError
from .linalg import frobenius_norm, normality_defect

__all__ = [
    "MatrixFile",
    "to_jsonable",
    "dumps",
    "matrix_to_dict",
    "matrix_from_dict",
    "read_matrix",
    "write_matrix",
    "parse_d",
    "write_trace_csv",
]


@dataclass
class MatrixFile:
    matrix: np.ndarray
    label: Optional[str] = None
    seed: Optional[int] = None


def _num(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def to_jsonable(obj):
    """Recursively convert numpy values, complex numbers and enums to JSON types."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        if obj.ndim == 0:
            return to_jsonable(obj.item())
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_num(obj.real), _num(obj.imag)]
    return obj


def dumps(report):
    """Deterministic JSON text: sorted keys, fixed indent, trailing newline."""
    return json.dumps(to_jsonable(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def matrix_to_dict(m, label=None, seed=None):
    m = np.asarray(m, dtype=np.complex128)
    out = {
        "dim": int(m.shape[0]),
        "layout": "dense",
        "entries": [[[float(z.real), float(z.imag)] for z in row] for row in m],
    }
    if label is not None:
        out["label"] = label
    if seed is not None:
        out["seed"] = int(seed)
    return out


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool)


def _entry(x, where):
    if _is_number(x):
        return complex(float(x), 0.0)
    if isinstance(x, list) and len(x) == 2 and all(_is_number(v) for v in x):
        return complex(float(x[0]), float(x[1]))
    raise MatrixFormatError(f"{where}: expected a number or [re, im], got {x!r}")


def _looks_like_records(entries, dim, layout):
    if layout is not None:
        return layout == "records"
    if not all(isinstance(e, list) and len(e) == 4 and all(_is_number(v) for v in e)
               for e in entries):
        return False
    # a real dense 4x4 matrix has the same shape as four records
    return not (dim == 4 and len(entries) == 4)


def matrix_from_dict(obj):
    if not isinstance(obj, dict):
        raise MatrixFormatError("matrix file must be a JSON object")
    if "entries" not in obj:
        raise MatrixFormatError("missing 'entries'")
    entries = obj["entries"]
    if not isinstance(entries, list):
        raise MatrixFormatError("'entries' must be a list")
    layout = obj.get("layout")
    if layout not in (None, "dense", "records"):
        raise MatrixFormatError(f"unknown layout {layout!r}")
    dim = obj.get("dim", len(entries) if layout != "records" else None)
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise MatrixFormatError(f"'dim' must be a positive integer, got {dim!r}")

    m = np.zeros((dim, dim), dtype=np.complex128)
    if _looks_like_records(entries, dim, layout):
        for k, rec in enumerate(entries):
            where = f"entries[{k}]"
            if not (isinstance(rec, list) and len(rec) == 4 and all(_is_number(v) for v in rec)):
                raise MatrixFormatError(f"{where}: expected [row, col, re, im], got {rec!r}")
            i, j = rec[0], rec[1]
            if int(i) != i or int(j) != j or not (0 <= i < dim and 0 <= j < dim):
                raise MatrixFormatError(f"{where}: index ({i}, {j}) out of range for dim {dim}")
            m[int(i), int(j)] = complex(float(rec[2]), float(rec[3]))
    else:
        if len(entries) != dim:
            raise MatrixFormatError(f"expected {dim} rows, got {len(entries)}")
        for i, row in enumerate(entries):
            if not isinstance(row, list) or len(row) != dim:
                raise MatrixFormatError(f"entries[{i}]: expected a row of length {dim}")
            for j, x in enumerate(row):
                m[i, j] = _entry(x, f"entries[{i}][{j}]")
    if not np.all(np.isfinite(m)):
        raise MatrixFormatError("matrix has non-finite entries")
    seed = obj.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise MatrixFormatError("'seed' must be an integer")
    return MatrixFile(matrix=m, label=obj.get("label"), seed=seed)


def read_matrix(path):
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"{path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise MatrixFormatError(f"{path}: {exc.strerror}") from exc
    return matrix_from_dict(obj)


def write_matrix(path, m, label=None, seed=None):
    with open(path, "w") as fh:
        fh.write(dumps(matrix_to_dict(m, label, seed)))


def _d_entry(x, k):
    if _is_number(x):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(_is_number(v) for v in x):
        return complex(x[0], x[1])
    if isinstance(x, dict) and set(x) == {"modulus", "phase"}:
        if not all(_is_number(v) for v in x.values()):
            raise MatrixFormatError(f"d[{k}]: modulus and phase must be numbers")
        return x["modulus"] * np.exp(1j * x["phase"])
    raise MatrixFormatError(
        f"d[{k}]: expected a number, [re, im] or {{\"modulus\", \"phase\"}}, got {x!r}")


def parse_d(text):
    """
    Diagonal entries from the command line.

    Accepts a JSON list of numbers, ``[re, im]`` pairs or
    ``{"modulus": m, "phase": t}`` objects, a bare comma list, or the preset
    ``cube-roots``.
    """
    text = text.strip()
    if text == "cube-roots":
        return np.exp(2j * np.pi * np.arange(3) / 3)
    if not text.startswith("["):
        text = f"[{text}]"
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MatrixFormatError(f"cannot parse diagonal spec: {exc}") from exc
    if not isinstance(raw, list) or not raw:
        raise MatrixFormatError("diagonal spec must be a non-empty list")
    return np.array([_d_entry(x, k) for k, x in enumerate(raw)], dtype=np.complex128)


def write_trace_csv(fh, traces, limits):
    """
    One row per iterate: ``lambda, n, step_norm, normality_defect, dist_to_limit``.

    Row ``n = 0`` is the starting matrix and has an empty step norm.
    """
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["lambda", "n", "step_norm", "normality_defect", "dist_to_limit"])
    for tr, lim in zip(traces, limits):
        start = tr.iterates[0]
        defects = [normality_defect(start)] + list(tr.normality_defects)
        steps = [""] + [repr(float(s)) for s in tr.step_norms]
        for n, it in enumerate(tr.iterates):
            w.writerow([repr(tr.lam), n, steps[n], repr(float(defects[n])),
                        repr(frobenius_norm(it - lim))])
