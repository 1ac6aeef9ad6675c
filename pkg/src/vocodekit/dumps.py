"""Float32 array files with a JSON header.

Layout: ``uint64`` little-endian header length, UTF-8 JSON header, then the
array as little-endian float32 in row-major order. The header always carries
``rows`` and ``cols``; anything else (``kind``, ``mode``, ``sample_rate``...)
is free-form metadata.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ValidationError, VocodeKitError


def write_dump(path, array, **header) -> None:
    arr = np.asarray(array, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValidationError("dump arrays must be 1-D or 2-D")
    meta = {"rows": int(arr.shape[0]), "cols": int(arr.shape[1]), **header}
    head = json.dumps(meta, sort_keys=True).encode()
    Path(path).write_bytes(
        struct.pack("<Q", len(head)) + head + arr.astype("<f4").tobytes(order="C")
    )


def read_dump(path) -> tuple[np.ndarray, dict]:
    blob = Path(path).read_bytes()
    if len(blob) < 8:
        raise VocodeKitError(f"{path}: not a dump file")
    (n,) = struct.unpack("<Q", blob[:8])
    try:
        meta = json.loads(blob[8:8 + n].decode())
        rows, cols = int(meta["rows"]), int(meta["cols"])
    except (ValueError, KeyError, UnicodeDecodeError) as exc:
        raise VocodeKitError(f"{path}: bad dump header ({exc})") from exc
    body = blob[8 + n:]
    if len(body) != rows * cols * 4:
        raise VocodeKitError(f"{path}: payload size does not match {rows}x{cols} float32")
    data = np.frombuffer(body, dtype="<f4").astype(np.float64).reshape(rows, cols)
    return data, meta
