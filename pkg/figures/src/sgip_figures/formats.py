"""Readers for the simulator's on-disk formats.

This package deliberately re-implements the parsers from the documented
format specs instead of importing the simulator: it must work against the
files alone.

Snapshot files (``*.sgrd``) carry a 64-byte little-endian header::

    magic "SGRD" | version u32 | dim u8 | bins-per-dim u32 | half-width f64
    | time f64 | producer u8 (0 = SGIP, 1 = FDM) | zero padding to 64

followed by ``8 * M^d`` bytes of row-major float64 bin values (axis 0
slowest).  Diagnostics CSVs start with ``# sgip-diag v1``; front-series CSVs
with ``# sgip-front v1`` and columns ``t,front_x``.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"SGRD"
FORMAT_VERSION = 1
HEADER_BYTES = 64
_HEADER = struct.Struct("<4sIBIddB")
PRODUCERS = {0: "SGIP", 1: "FDM"}


class FormatError(Exception):
    pass


@dataclass(frozen=True)
class Snapshot:
    dim: int
    bins_per_dim: int
    half_width: float
    time: float
    producer: str
    values: np.ndarray  # shaped (M,) * dim

    @property
    def bin_size(self) -> float:
        return 2.0 * self.half_width / self.bins_per_dim

    def axis_centers(self) -> np.ndarray:
        k = np.arange(self.bins_per_dim)
        return -self.half_width + (k + 0.5) * self.bin_size

    def grid_key(self) -> tuple:
        return (self.dim, self.bins_per_dim, self.half_width)


def read_snapshot(path) -> Snapshot:
    with open(path, "rb") as fh:
        header = fh.read(HEADER_BYTES)
        if len(header) < HEADER_BYTES:
            raise FormatError(f"{path}: truncated header")
        magic, version, dim, m, half_width, time, producer = _HEADER.unpack(
            header[: _HEADER.size]
        )
        if magic != MAGIC:
            raise FormatError(f"{path}: bad magic {magic!r}")
        if version != FORMAT_VERSION:
            raise FormatError(f"{path}: unsupported format version {version}")
        if dim not in (1, 2, 3) or m < 2:
            raise FormatError(f"{path}: invalid header (dim={dim}, M={m})")
        expected = 8 * m**dim
        payload = fh.read(expected)
        if len(payload) < expected:
            raise FormatError(f"{path}: truncated payload")
    values = np.frombuffer(payload, dtype="<f8").reshape((m,) * dim)
    return Snapshot(dim, m, half_width, time, PRODUCERS.get(producer, "?"), values)


def read_series_csv(path, header_prefix: str = "# sgip-") -> np.ndarray:
    """Two-column (t, x) series; NaNs mark absent values."""
    rows = []
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or not lines[0].startswith(header_prefix):
        raise FormatError(f"{path}: missing '{header_prefix}*' header line")
    for ln in lines[1:]:
        if ln.startswith("#") or ln[0].isalpha() or ln.startswith("t,"):
            continue
        parts = ln.split(",")
        rows.append((float(parts[0]), float(parts[1])))
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return np.asarray(rows)
