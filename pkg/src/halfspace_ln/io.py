"""Deterministic CSV/JSON writers with atomic replacement."""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from . import __version__

VERSION_TAG = f"v{__version__}"


def _atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_float(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def write_csv(path, columns: dict) -> Path:
    """Write equal-length columns with 17 significant digits."""
    names = list(columns)
    data = [np.atleast_1d(np.asarray(columns[k], dtype=float)) for k in names]
    rows = [",".join(names)]
    for i in range(len(data[0]) if data else 0):
        rows.append(",".join(format_float(col[i]) for col in data))
    return _atomic_write(path, "\n".join(rows) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return x
    return obj


def write_json(path, payload: dict) -> Path:
    text = json.dumps(_jsonable(payload), indent=2, sort_keys=True)
    return _atomic_write(path, text + "\n")


def manifest(cone, tolerances: dict, **extra) -> dict:
    """Provenance block embedded in every JSON output."""
    return {
        "version": VERSION_TAG,
        "cone": cone.to_dict(),
        "tolerances": dict(tolerances),
        **extra,
    }
