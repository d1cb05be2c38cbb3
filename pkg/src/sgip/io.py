"""File formats: binary field snapshots and the diagnostics CSV.

Snapshot layout (little-endian, 64-byte header, then the payload):

    offset  size  field
    0       4     magic "SGRD"
    4       4     format version (uint32, currently 1)
    8       1     dim (uint8)
    9       4     bins per dimension M (uint32)
    13      8     domain half width L (float64)
    21      8     time stamp t (float64)
    29      1     producer tag (uint8: 0 = SGIP, 1 = FDM)
    30      34    zero padding
    64      8*M^d row-major float64 bin values (axis 0 slowest)

Diagnostics CSV starts with the line ``# sgip-diag v1`` followed by a column
header ``step,time,total_mass`` (plus ``front_x`` when front tracking is on).
"""

from __future__ import annotations

import json
import os
import struct

import numpy as np

from .core import DensityField, GridSpec, SgipError

MAGIC = b"SGRD"
FORMAT_VERSION = 1
HEADER_BYTES = 64
_HEADER_STRUCT = struct.Struct("<4sIBIddB")

PRODUCER_CODES = {"SGIP": 0, "FDM": 1}
PRODUCER_NAMES = {v: k for k, v in PRODUCER_CODES.items()}

DIAG_HEADER = "# sgip-diag v1"


class SnapshotError(SgipError):
    """Base class for snapshot format errors."""


class BadMagicError(SnapshotError):
    pass


class VersionMismatchError(SnapshotError):
    pass


class TruncatedSnapshotError(SnapshotError):
    pass


def write_snapshot(field: DensityField, producer: str, path) -> None:
    """Write a field; ``read_snapshot`` round-trips it bit-exactly."""
    if producer not in PRODUCER_CODES:
        raise ValueError(f"producer must be one of {sorted(PRODUCER_CODES)}")
    header = _HEADER_STRUCT.pack(
        MAGIC,
        FORMAT_VERSION,
        field.grid.dim,
        field.grid.bins_per_dim,
        field.grid.half_width,
        field.time,
        PRODUCER_CODES[producer],
    )
    header += b"\x00" * (HEADER_BYTES - len(header))
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path) -> tuple[DensityField, str]:
    """Read a snapshot; returns the field and its producer tag."""
    with open(path, "rb") as fh:
        header = fh.read(HEADER_BYTES)
        if len(header) < HEADER_BYTES:
            raise TruncatedSnapshotError(f"{path}: header is {len(header)} bytes")
        magic, version, dim, m, half_width, time, producer = _HEADER_STRUCT.unpack(
            header[: _HEADER_STRUCT.size]
        )
        if magic != MAGIC:
            raise BadMagicError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise VersionMismatchError(
                f"{path}: format version {version}, expected {FORMAT_VERSION}"
            )
        if producer not in PRODUCER_NAMES:
            raise SnapshotError(f"{path}: unknown producer code {producer}")
        grid = GridSpec(dim, half_width, m)
        expected = 8 * grid.total_bins
        payload = fh.read(expected)
        if len(payload) < expected:
            raise TruncatedSnapshotError(
                f"{path}: payload is {len(payload)} bytes, expected {expected}"
            )
    values = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    return DensityField(grid, values, time), PRODUCER_NAMES[producer]


# ---------------------------------------------------------------------------
# Diagnostics CSV


def write_diagnostics(rows, path, include_front: bool) -> None:
    """Rows are (step, time, total_mass, front_x-or-None) tuples."""
    lines = [DIAG_HEADER]
    columns = "step,time,total_mass" + (",front_x" if include_front else "")
    lines.append(columns)
    for step, time, mass, front_x in rows:
        line = f"{step},{time!r},{mass!r}"
        if include_front:
            line += f",{float('nan') if front_x is None else front_x!r}"
        lines.append(line)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_diagnostics(path):
    """Inverse of ``write_diagnostics``; absent fronts come back as None."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != DIAG_HEADER:
        raise SgipError(f"{path}: missing '{DIAG_HEADER}' header")
    columns = lines[1].split(",")
    rows = []
    for ln in lines[2:]:
        parts = ln.split(",")
        step, time, mass = int(parts[0]), float(parts[1]), float(parts[2])
        front_x = None
        if "front_x" in columns:
            val = float(parts[3])
            front_x = None if np.isnan(val) else val
        rows.append((step, time, mass, front_x))
    return rows


# ---------------------------------------------------------------------------
# Run output directory


class RunWriter:
    """Owns one run's output directory: snapshots, CSV and a manifest.

    On abnormal termination the manifest records the partial outputs and the
    error message, so downstream tools can tell a truncated run from a
    completed one.
    """

    def __init__(self, output_dir, producer: str):
        self.output_dir = str(output_dir)
        self.producer = producer
        os.makedirs(self.output_dir, exist_ok=True)
        self._snapshots = []

    def write_snapshot(self, step: int, field: DensityField) -> str:
        name = f"snapshot_{step:06d}.sgrd"
        path = os.path.join(self.output_dir, name)
        write_snapshot(field, self.producer, path)
        self._snapshots.append(name)
        return path

    def _write_manifest(self, status: str, error: str | None):
        manifest = {
            "producer": self.producer,
            "status": status,
            "error": error,
            "snapshots": self._snapshots,
            "diagnostics": "diagnostics.csv",
        }
        with open(os.path.join(self.output_dir, "manifest.json"), "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def _write_rows(self, result):
        include_front = getattr(result.config, "front_threshold", None) is not None
        write_diagnostics(
            result.diagnostics,
            os.path.join(self.output_dir, "diagnostics.csv"),
            include_front,
        )

    def finish(self, result) -> None:
        self._write_rows(result)
        self._write_manifest(result.status, None)

    def abort(self, result, err: Exception) -> None:
        self._write_rows(result)
        self._write_manifest("aborted", f"{type(err).__name__}: {err}")
