"""Snapshot binary format and small text writers.

Snapshot layout (little-endian): magic ``MHDBLOW1``, u64 nr, u64 nz,
f64 dr, f64 dz, f64 time, then five f64 planes (rho, rho u^r, rho u^z,
rho S, B^theta), each nz x nr in row-major order (z is the slow index).
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .solver import FieldState, Grid2D

MAGIC = b"MHDBLOW1"
_HEADER = struct.Struct("<8sQQddd")


class SnapshotFormatError(ValueError):
    pass


def write_snapshot(path, state: FieldState) -> None:
    g = state.grid
    path = Path(path)
    try:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, g.nr, g.nz, g.dr, g.dz, float(state.time)))
            fh.write(np.ascontiguousarray(state.q, dtype="<f8").tobytes())
    except OSError as exc:
        raise OSError(f"cannot write snapshot {path}: {exc}") from exc


def read_snapshot(path) -> FieldState:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise SnapshotFormatError(f"{path}: truncated header")
    magic, nr, nz, dr, dz, time = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise SnapshotFormatError(f"{path}: bad magic {magic!r}")
    expected = _HEADER.size + 5 * nr * nz * 8
    if len(data) != expected:
        raise SnapshotFormatError(f"{path}: expected {expected} bytes, found {len(data)}")
    q = np.frombuffer(data, dtype="<f8", offset=_HEADER.size).reshape(5, nz, nr).astype(float)
    grid = Grid2D(int(nr), int(nz), nr * dr, 0.5 * nz * dz)
    return FieldState(time, grid, q)
