"""Deterministic report writers.

All floats are rendered with 17 significant digits so identical inputs
produce byte-identical files.  JSON has no literals for non-finite values;
they are emitted as the strings "inf", "-inf", "nan".  Files are written
atomically (temp file + rename).
"""

from __future__ import annotations

import math
import os
import tempfile
from typing import Iterable, Mapping, Sequence

import numpy as np


def format_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _json_fragment(obj, indent: int) -> str:
    pad = "  " * indent
    pad1 = "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(float(obj))
    if isinstance(obj, str):
        out = obj.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, Mapping):
        if not obj:
            return "{}"
        items = [f'{pad1}{_json_fragment(str(k), 0)}: {_json_fragment(v, indent + 1)}'
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad1}{_json_fragment(v, indent + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + f"\n{pad}]"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def dumps_json(obj) -> str:
    return _json_fragment(obj, 0) + "\n"


def _atomic_write(path, text: str) -> None:
    path = os.fspath(path)
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json(path, obj) -> None:
    _atomic_write(path, dumps_json(obj))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                x = float(v)
                cells.append(format(x, ".17g") if math.isfinite(x)
                             else ("inf" if x > 0 else "-inf") if math.isinf(x)
                             else "nan")
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_trajectory_csv(path, times, states) -> None:
    """Header t,x1,...,xn; one row per stored node."""
    states = np.atleast_2d(np.asarray(states, dtype=float))
    header = ["t"] + [f"x{i + 1}" for i in range(states.shape[1])]
    rows = ([float(t)] + [float(v) for v in row]
            for t, row in zip(np.asarray(times, dtype=float), states))
    write_csv(path, header, rows)
