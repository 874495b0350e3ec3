"""Binary field snapshots and time-series CSV files.

Snapshot layout (all little-endian)::

    magic    4 bytes   b"BQSF"
    version  u16       1
    n        u32       grid size
    count    u16       number of fields
    names    count * 16 bytes, ASCII, NUL-padded
    payload  count * n * n float64, row-major physical values
"""

from __future__ import annotations

import csv
import math
import struct
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = ["MAGIC", "VERSION", "SnapshotError", "write_snapshot", "read_snapshot", "format_float", "write_csv"]

MAGIC = b"BQSF"
VERSION = 1
NAME_BYTES = 16
_HEADER = struct.Struct("<4sHIH")


class SnapshotError(ValueError):
    pass


def _encode_name(name: str) -> bytes:
    try:
        raw = name.encode("ascii")
    except UnicodeEncodeError as exc:
        raise SnapshotError(f"field name {name!r} is not ASCII") from exc
    if len(raw) > NAME_BYTES or b"\0" in raw:
        raise SnapshotError(f"field name {name!r} must be 1-16 ASCII characters without NUL")
    return raw.ljust(NAME_BYTES, b"\0")


def write_snapshot(path: str | Path, fields: Mapping[str, np.ndarray]) -> None:
    arrays = [np.asarray(a, dtype="<f8") for a in fields.values()]
    if not arrays:
        raise SnapshotError("snapshot needs at least one field")
    n = arrays[0].shape[0]
    for a in arrays:
        if a.shape != (n, n):
            raise SnapshotError(f"all fields must be {n}x{n}, got {a.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, n, len(arrays)))
        for name in fields:
            fh.write(_encode_name(name))
        for a in arrays:
            fh.write(np.ascontiguousarray(a).tobytes(order="C"))


def read_snapshot(path: str | Path) -> dict[str, np.ndarray]:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotError("file too short for a snapshot header")
    magic, version, n, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotError(f"bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"unsupported snapshot version {version}")
    off = _HEADER.size
    names = []
    for _ in range(count):
        names.append(data[off: off + NAME_BYTES].rstrip(b"\0").decode("ascii"))
        off += NAME_BYTES
    expected = off + count * n * n * 8
    if len(data) != expected:
        raise SnapshotError(f"payload length mismatch: {len(data)} bytes, expected {expected}")
    out = {}
    for name in names:
        out[name] = np.frombuffer(data, dtype="<f8", count=n * n, offset=off).reshape(n, n).copy()
        off += n * n * 8
    return out


def format_float(x: float) -> str:
    """Shortest round-trip representation; ``inf``/``nan`` spelled out."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Sequence[Sequence[float]]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([format_float(v) for v in row])
