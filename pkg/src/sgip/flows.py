"""Closed-form velocity fields evaluated pointwise.

All fields are steady; ``velocity`` still takes a time argument so that
user-supplied time-dependent fields can implement the same interface.
The particle drift convention is ``dX = +v dt``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import SgipError


class FlowDimensionError(SgipError, ValueError):
    """Point dimensionality does not match the flow field."""


class FlowField:
    """Base class; subclasses implement ``_eval`` on batched points."""

    #: required point dimension, or None when the field works in any dimension
    dim: int | None = None

    def velocity(self, x, t: float = 0.0) -> np.ndarray:
        """Velocity vector(s) at point(s) ``x`` of shape (..., d)."""
        pt = np.asarray(x, dtype=np.float64)
        if pt.ndim == 0:
            raise FlowDimensionError("points must carry a coordinate axis")
        d = pt.shape[-1]
        if self.dim is not None and d != self.dim:
            raise FlowDimensionError(
                f"{type(self).__name__} is {self.dim}-dimensional, point has {d} coordinates"
            )
        return self._eval(pt, t)

    def _eval(self, x: np.ndarray, t: float) -> np.ndarray:
        raise NotImplementedError

    def max_speed(self) -> float:
        """Upper bound on any velocity component's magnitude (CFL checks)."""
        raise NotImplementedError


@dataclass(frozen=True)
class Zero(FlowField):
    """No advection."""

    def _eval(self, x, t):
        return np.zeros_like(x)

    def max_speed(self):
        return 0.0


@dataclass(frozen=True)
class Constant(FlowField):
    """Spatially uniform drift."""

    c: tuple[float, ...]

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.c))
        if len(c) not in (1, 2, 3) or not all(np.isfinite(c)):
            raise ValueError(f"constant velocity must be a finite 1-3 vector, got {self.c}")
        object.__setattr__(self, "c", c)

    @property
    def dim(self):
        return len(self.c)

    def _eval(self, x, t):
        return np.broadcast_to(np.asarray(self.c), x.shape).copy()

    def max_speed(self):
        return max(abs(v) for v in self.c)


@dataclass(frozen=True)
class Shear(FlowField):
    """2-d shear: v = (sin y, 0)."""

    dim = 2

    def _eval(self, x, t):
        out = np.zeros_like(x)
        out[..., 0] = np.sin(x[..., 1])
        return out

    def max_speed(self):
        return 1.0


@dataclass(frozen=True)
class Cellular(FlowField):
    """2-d cellular vortices: v = (-sin x cos y, cos x sin y)."""

    dim = 2

    def _eval(self, x, t):
        out = np.empty_like(x)
        out[..., 0] = -np.sin(x[..., 0]) * np.cos(x[..., 1])
        out[..., 1] = np.cos(x[..., 0]) * np.sin(x[..., 1])
        return out

    def max_speed(self):
        return 1.0


@dataclass(frozen=True)
class CatsEye(FlowField):
    """Cellular flow plus a shear-like perturbation of strength ``delta``.

    v = (-sin x cos y, cos x sin y) + delta * (cos x sin y, -sin x cos y)
    """

    delta: float = 2.0
    dim = 2

    def __post_init__(self):
        if not np.isfinite(self.delta):
            raise ValueError("delta must be finite")

    def _eval(self, x, t):
        sx, cx = np.sin(x[..., 0]), np.cos(x[..., 0])
        sy, cy = np.sin(x[..., 1]), np.cos(x[..., 1])
        out = np.empty_like(x)
        out[..., 0] = -sx * cy + self.delta * cx * sy
        out[..., 1] = cx * sy - self.delta * sx * cy
        return out

    def max_speed(self):
        return 1.0 + abs(self.delta)


@dataclass(frozen=True)
class ABC(FlowField):
    """Arnold-Beltrami-Childress flow, the classical 3-d chaotic field.

    v = (a sin z + c cos y, b sin x + a cos z, c sin y + b cos x)
    """

    a: float = 1.0
    b: float = np.sqrt(2.0 / 3.0)
    c: float = np.sqrt(1.0 / 3.0)
    dim = 3

    def __post_init__(self):
        if not all(np.isfinite(v) for v in (self.a, self.b, self.c)):
            raise ValueError("ABC coefficients must be finite")

    def _eval(self, x, t):
        out = np.empty_like(x)
        out[..., 0] = self.a * np.sin(x[..., 2]) + self.c * np.cos(x[..., 1])
        out[..., 1] = self.b * np.sin(x[..., 0]) + self.a * np.cos(x[..., 2])
        out[..., 2] = self.c * np.sin(x[..., 1]) + self.b * np.cos(x[..., 0])
        return out

    def max_speed(self):
        return abs(self.a) + abs(self.b) + abs(self.c)


def velocity(flow: FlowField, x, t: float = 0.0) -> np.ndarray:
    """Evaluate ``flow`` at point(s) ``x`` and time ``t``."""
    return flow.velocity(x, t)


def numerical_divergence(flow: FlowField, x, h: float, t: float = 0.0) -> float:
    """Central-difference divergence at a single point (test helper).

    All the built-in analytic fields are divergence free, so this should be
    O(h^2) small for them.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    pt = np.asarray(x, dtype=np.float64)
    d = pt.shape[-1]
    div = 0.0
    for axis in range(d):
        step = np.zeros(d)
        step[axis] = h
        vp = flow.velocity(pt + step, t)[..., axis]
        vm = flow.velocity(pt - step, t)[..., axis]
        div += (vp - vm) / (2.0 * h)
    return float(div)
