"""Diagnostics tables and binary field snapshots.

Diagnostics are a comma-delimited text table, one record per row, with a
fixed header.  Values are written with 17 significant digits so the float64
round trip through text is exact.

Snapshots are a little-endian binary layout::

    bytes 0-3   magic "NLCF"
    byte  4     format version (1)
    byte  5     spatial dimension
    bytes 6-9   n, points per axis (uint32)
    bytes 10-17 box edge length (float64)
    byte  18    velocity component count
    byte  19    director component count
    payload     float64 velocity values then director values, each laid out
                per component in row-major point order

The layout is self-describing: the reader reconstructs the grid from the
header alone and never consults a run configuration.  The simulation time is
not stored; reloaded states restart the clock at t = 0.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .dynamics import State
from .grid import Field, Grid
from .monitor import DiagnosticsRecord

__all__ = [
    "SnapshotError",
    "DIAGNOSTICS_HEADER",
    "write_diagnostics",
    "read_diagnostics",
    "write_snapshot",
    "read_snapshot",
]

DIAGNOSTICS_HEADER = DiagnosticsRecord.FIELDS

MAGIC = b"NLCF"
VERSION = 1
_HEADER = struct.Struct("<4sBBIdBB")


def write_diagnostics(records: Sequence[DiagnosticsRecord], path) -> None:
    """Write the delimited table; an empty record list yields a header-only file."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(DIAGNOSTICS_HEADER)
        for rec in records:
            writer.writerow(f"{v:.17g}" for v in rec.as_row())


def read_diagnostics(path) -> list[DiagnosticsRecord]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty diagnostics file") from None
        if tuple(header) != DIAGNOSTICS_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [DiagnosticsRecord.from_row(row) for row in reader if row]


class SnapshotError(ValueError):
    """Malformed snapshot: bad magic, unsupported version, or truncation."""


def write_snapshot(state: State, path) -> None:
    grid = state.grid
    header = _HEADER.pack(
        MAGIC, VERSION, grid.dim, grid.n, grid.length,
        state.u.components, state.d.components,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(state.u.values, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(state.d.values, dtype="<f8").tobytes())


def read_snapshot(path) -> State:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, version, dim, n, length, u_comp, d_comp = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise SnapshotError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise SnapshotError(f"{path}: unsupported version {version}")
    try:
        grid = Grid(dim, n, length)
    except ValueError as err:
        raise SnapshotError(f"{path}: invalid grid header: {err}") from None

    expected = _HEADER.size + 8 * (u_comp + d_comp) * grid.num_points
    if len(raw) != expected:
        raise SnapshotError(f"{path}: expected {expected} bytes, found {len(raw)}")
    floats = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    split = u_comp * grid.num_points
    u = Field(grid, floats[:split].reshape(u_comp, *grid.shape).astype(np.float64))
    d = Field(grid, floats[split:].reshape(d_comp, *grid.shape).astype(np.float64))
    return State(0.0, u, d)
