"""Shared domain types: bin lattices, particle ensembles, density fields.

Conventions used throughout the package:

* The computational domain is the cube ``[-L, L]^d`` with ``d`` in {1, 2, 3}.
* Bins are indexed 0-based and flattened row-major with axis 0 slowest,
  i.e. ``flat = (k_0 * M + k_1) * M + k_2`` for a 3-d grid.
* A coordinate exactly at ``+L`` belongs to the last bin along its axis, so
  every point of the closed domain maps to exactly one bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Flat bin indices are kept within int32-addressable range; a grid larger
# than this would not fit in memory as a float64 field anyway.
MAX_TOTAL_BINS = 2**31


class SgipError(Exception):
    """Base class for errors raised by this package."""


@dataclass(frozen=True)
class GridSpec:
    """Uniform Cartesian bin lattice on ``[-L, L]^dim``.

    ``bin_size`` is derived as ``2 * half_width / bins_per_dim``.
    """

    dim: int
    half_width: float
    bins_per_dim: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if not (np.isfinite(self.half_width) and self.half_width > 0):
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if int(self.bins_per_dim) != self.bins_per_dim or self.bins_per_dim < 2:
            raise ValueError(f"bins_per_dim must be an integer >= 2, got {self.bins_per_dim}")
        if self.bins_per_dim**self.dim > MAX_TOTAL_BINS:
            raise ValueError(
                f"grid of {self.bins_per_dim}^{self.dim} bins exceeds the "
                f"addressable limit of {MAX_TOTAL_BINS}"
            )

    @property
    def bin_size(self) -> float:
        return 2.0 * self.half_width / self.bins_per_dim

    @property
    def bin_volume(self) -> float:
        return self.bin_size**self.dim

    @property
    def total_bins(self) -> int:
        return self.bins_per_dim**self.dim

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.bins_per_dim,) * self.dim

    def axis_centers(self) -> np.ndarray:
        """Bin-center coordinates along one axis (all axes are identical)."""
        k = np.arange(self.bins_per_dim)
        return -self.half_width + (k + 0.5) * self.bin_size


@dataclass(frozen=True)
class ParticleEnsemble:
    """N particle positions plus the single mass shared by all particles.

    ``total_mass`` is exactly ``n * particle_mass`` by construction; the
    per-bin resampling step resets every particle to the same mass each step,
    so no per-particle mass array is kept.
    """

    positions: np.ndarray  # shape (n, dim), float64
    particle_mass: float

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 2 or pos.shape[1] not in (1, 2, 3):
            raise ValueError(f"positions must have shape (n, dim<=3), got {pos.shape}")
        if pos.shape[0] < 1:
            raise ValueError("ensemble must contain at least one particle")
        if not (np.isfinite(self.particle_mass) and self.particle_mass >= 0):
            raise ValueError(f"particle_mass must be finite and >= 0, got {self.particle_mass}")
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @property
    def total_mass(self) -> float:
        return self.particle_mass * self.n


@dataclass(frozen=True)
class DensityField:
    """Per-bin non-negative density values at one time stamp.

    ``values`` is the flat row-major array of length ``grid.total_bins``.
    """

    grid: GridSpec
    values: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size != self.grid.total_bins:
            raise ValueError(
                f"values must be a flat array of length {self.grid.total_bins}, "
                f"got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("density values must be finite")
        if vals.size and vals.min() < 0.0:
            raise ValueError(f"density values must be >= 0, min is {vals.min()}")
        if not (np.isfinite(self.time) and self.time >= 0.0):
            raise ValueError(f"time must be finite and >= 0, got {self.time}")
        object.__setattr__(self, "values", vals)

    def reshaped(self) -> np.ndarray:
        """Values as a ``dim``-dimensional array (view, axis 0 slowest)."""
        return self.values.reshape(self.grid.shape)


def bin_index(position, grid: GridSpec) -> np.ndarray:
    """Flat bin index of a point, or of an (n, dim) batch of points.

    Per-axis index is ``floor((x + L) / dx)`` clamped to ``[0, M - 1]``; the
    clamp puts coordinates exactly at ``+L`` into the last bin.
    """
    x = np.asarray(position, dtype=np.float64)
    if x.shape[-1] != grid.dim:
        raise ValueError(f"position has {x.shape[-1]} coordinates, grid dim is {grid.dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite coordinate in position")
    m = grid.bins_per_dim
    # Multiplying by M / (2L) is exact for the common case of round L and M,
    # where dividing by the inexact dx would land just below an integer.
    scale = m / (2.0 * grid.half_width)
    k = np.floor((x + grid.half_width) * scale).astype(np.int64)
    np.clip(k, 0, m - 1, out=k)
    flat = k[..., 0]
    for axis in range(1, grid.dim):
        flat = flat * m + k[..., axis]
    return flat


def bin_center(index, grid: GridSpec) -> np.ndarray:
    """Center point of a flat bin index (inverse of ``bin_index`` on centers)."""
    idx = np.asarray(index, dtype=np.int64)
    if np.any(idx < 0) or np.any(idx >= grid.total_bins):
        raise ValueError(f"bin index out of range [0, {grid.total_bins})")
    m = grid.bins_per_dim
    k = np.empty(idx.shape + (grid.dim,), dtype=np.int64)
    rem = idx.copy()
    for axis in range(grid.dim - 1, -1, -1):
        k[..., axis] = rem % m
        rem //= m
    return -grid.half_width + (k + 0.5) * grid.bin_size


def bin_lower_corner(index, grid: GridSpec) -> np.ndarray:
    """Lower corner of a bin's axis-aligned box (used for uniform sampling)."""
    return bin_center(index, grid) - 0.5 * grid.bin_size


def field_total_mass(field: DensityField) -> float:
    """Total mass ``sum_j u_j * dx^d``.

    Single NumPy reduction in a fixed (pairwise) order, so single-threaded
    runs are bit-reproducible.
    """
    return float(np.sum(field.values)) * field.grid.bin_volume
