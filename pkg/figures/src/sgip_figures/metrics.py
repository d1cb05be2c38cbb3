"""Quantitative checks on rendered-figure inputs, kept separate from the
drawing code so tests can assert on geometry without parsing images.
"""

from __future__ import annotations

import numpy as np
from contourpy import contour_generator

from .formats import Snapshot


def box_smooth(values: np.ndarray) -> np.ndarray:
    """One pass of 3x3 nearest-neighbor averaging (edges replicated)."""
    padded = np.pad(values, 1, mode="edge")
    out = np.zeros_like(values, dtype=np.float64)
    for di in (0, 1, 2):
        for dj in (0, 1, 2):
            out += padded[di:di + values.shape[0], dj:dj + values.shape[1]]
    return out / 9.0


def contour_radius_ratio(snap: Snapshot, level: float, smooth: bool = True) -> float:
    """Max/min radius of the longest ``u = level`` contour about the
    field's center of mass; 1.0 means a perfect circle.

    A single smoothing pass (on by default) suppresses single-bin
    statistical spikes that would otherwise fray the contour.
    """
    if snap.dim != 2:
        raise ValueError("contour_radius_ratio needs a 2-d snapshot")
    values = box_smooth(snap.values) if smooth else np.asarray(snap.values, float)
    mass = values.sum()
    if mass <= 0:
        raise ValueError("field has no mass")
    centers = snap.axis_centers()
    cx = (values.sum(axis=1) * centers).sum() / mass
    cy = (values.sum(axis=0) * centers).sum() / mass
    gen = contour_generator(x=centers, y=centers, z=values.T)
    lines = gen.lines(level)
    if not lines:
        raise ValueError(f"no contour at level {level}")
    longest = max(lines, key=len)
    radii = np.hypot(longest[:, 0] - cx, longest[:, 1] - cy)
    return float(radii.max() / radii.min())
