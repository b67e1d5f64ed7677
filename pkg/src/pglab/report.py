"""Deterministic JSON/CSV serialization for reports and histories.

Floats are printed with 17 significant digits so repeated runs with the same
configuration and seed produce byte-identical artifacts and regression diffs
stay meaningful.
"""

from __future__ import annotations

import os

import numpy as np


def _fmt(x: float) -> str:
    if isinstance(x, float):
        if x != x:
            return "NaN"
        if x == float("inf"):
            return "Infinity"
        if x == float("-inf"):
            return "-Infinity"
        return format(x, ".17g")
    return format(x, ".17g")


def _encode(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif isinstance(obj, (bool, np.bool_)):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt(float(obj)))
    elif isinstance(obj, complex):
        _encode({"re": obj.real, "im": obj.imag}, out)
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        out.append("{")
        for i, (k, v) in enumerate(obj.items()):
            if i:
                out.append(", ")
            _encode(str(k), out)
            out.append(": ")
            _encode(v, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        seq = obj.tolist() if isinstance(obj, np.ndarray) else obj
        out.append("[")
        for i, v in enumerate(seq):
            if i:
                out.append(", ")
            _encode(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj)}")


def dumps_17g(obj) -> str:
    out: list = []
    _encode(obj, out)
    return "".join(out)


def write_json(path: str | os.PathLike, obj) -> None:
    with open(path, "w", newline="") as f:
        f.write(dumps_17g(obj))
        f.write("\n")


def write_csv(path: str | os.PathLike, header: list[str], rows) -> None:
    """Rows of numbers/strings; floats formatted at 17 significant digits."""
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, (float, np.floating)):
                    cells.append(_fmt(float(cell)))
                else:
                    cells.append(str(cell))
            f.write(",".join(cells) + "\n")
