"""Serialization: versioned JSON, CSV tables, grid-factor files and run manifests.

JSON and CSV writers are deterministic (sorted keys, fixed float formatting) so
identical inputs give byte-identical files.  Timestamps appear only in manifests.
"""

from __future__ import annotations

import csv
import datetime as _dt
import io as _io
import json
import math
import os
import platform
import struct
import sys

import numpy as np

SCHEMA_VERSION = "1.0"
GRID_MAGIC = b"CPGRID1\n"


def _clean(obj):
    """Convert numpy scalars/arrays and complex numbers to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def to_json(obj, kind: str | None = None) -> str:
    doc = dict(_clean(obj))
    doc["schema_version"] = SCHEMA_VERSION
    if kind is not None:
        doc["kind"] = kind
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def write_json(path, obj, kind: str | None = None) -> str:
    text = to_json(obj, kind)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return str(path)


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def fmt(x) -> str:
    """Fixed float formatting for CSV cells (repr-exact, platform independent)."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def write_csv(path, header, rows) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) for v in row])
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())
    return str(path)


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


# grid files: magic line, 4-byte header length, JSON header, little-endian float64 body

def write_grid(path, array, header: dict) -> str:
    arr = np.ascontiguousarray(array, dtype="<f8")
    head = dict(_clean(header))
    head["schema_version"] = SCHEMA_VERSION
    head["shape"] = list(arr.shape)
    hb = json.dumps(head, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(GRID_MAGIC)
        fh.write(struct.pack("<I", len(hb)))
        fh.write(hb)
        fh.write(arr.tobytes())
    return str(path)


def read_grid(path):
    with open(path, "rb") as fh:
        if fh.read(len(GRID_MAGIC)) != GRID_MAGIC:
            raise ValueError(f"{path}: not a grid file")
        (n,) = struct.unpack("<I", fh.read(4))
        head = json.loads(fh.read(n).decode("utf-8"))
        body = np.frombuffer(fh.read(), dtype="<f8")
    return body.reshape(head["shape"]).astype(float), head


def write_manifest(outdir, command: str, config: dict, outputs, status: int) -> str:
    """Echo the resolved configuration; the only file carrying a timestamp."""
    doc = {
        "command": command,
        "config": config,
        "outputs": sorted(os.path.basename(str(p)) for p in outputs),
        "exit_status": status,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "python": sys.version.split()[0],
        "platform": platform.platform(),
        "numpy": np.__version__,
    }
    from . import kernels
    doc["kernel_backend"] = kernels.BACKEND
    path = os.path.join(str(outdir), "manifest.json")
    return write_json(path, doc, kind="manifest")
