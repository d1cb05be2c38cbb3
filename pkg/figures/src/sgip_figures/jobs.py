"""Figure jobs: profile overlays, front-position plots, 2-d contours and
3-d coordinate-plane slices.

Rendering is a pure function of the input files: fixed style, fixed canvas,
no timestamps or software tags embedded, so re-rendering reproduces output
bytes exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .formats import FormatError, Snapshot, read_series_csv, read_snapshot

KINDS = ("profile", "front", "contour2d", "slice3d")
DEFAULT_LEVELS = (0.1, 0.5, 0.9)
_PLANE_AXES = {"x": 0, "y": 1, "z": 2}
_FIGSIZE = (6.4, 4.8)
_DPI = 110
_SAVE_KWARGS = {"metadata": {"Software": None}}


class JobError(Exception):
    pass


@dataclass(frozen=True)
class FigureJob:
    kind: str
    inputs: tuple[str, ...]
    output: str
    levels: tuple[float, ...] = DEFAULT_LEVELS
    plane: str = "x"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise JobError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.inputs:
            raise JobError("a figure job needs at least one input file")
        if self.plane not in _PLANE_AXES:
            raise JobError(f"plane must be x, y or z, got {self.plane!r}")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))


def _load_snapshots(job: FigureJob, want_dim: int, same_grid: bool = True) -> list[Snapshot]:
    snaps = [read_snapshot(path) for path in job.inputs]
    for snap, path in zip(snaps, job.inputs):
        if snap.dim != want_dim:
            raise JobError(
                f"{job.kind} needs {want_dim}-d snapshots, {path} is {snap.dim}-d"
            )
    if same_grid:
        keys = {snap.grid_key() for snap in snaps}
        if len(keys) != 1:
            raise JobError(f"overlaid snapshots disagree on their grids: {sorted(keys)}")
    else:
        # 1-d profile curves may come from different resolutions (e.g.
        # particle vs reference runs) but must share the domain
        domains = {(snap.dim, snap.half_width) for snap in snaps}
        if len(domains) != 1:
            raise JobError(f"overlaid snapshots disagree on their domains: {sorted(domains)}")
    return snaps


def _new_axes():
    fig, ax = plt.subplots(figsize=_FIGSIZE, dpi=_DPI)
    return fig, ax


def _finish(fig, ax, job: FigureJob, title: str):
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(job.output, **_SAVE_KWARGS)
    plt.close(fig)


def _render_profile(job: FigureJob):
    snaps = _load_snapshots(job, 1, same_grid=False)
    fig, ax = _new_axes()
    for snap, path in zip(snaps, job.inputs):
        ax.plot(snap.axis_centers(), snap.values,
                label=f"{snap.producer} (t={snap.time:g})", lw=1.2)
    ax.set_xlabel("x")
    ax.set_ylabel("u")
    ax.legend()
    _finish(fig, ax, job, "density profile")


def _render_front(job: FigureJob):
    fig, ax = _new_axes()
    for path in job.inputs:
        series = read_series_csv(path)
        keep = np.isfinite(series[:, 1])
        ax.plot(series[keep, 0], series[keep, 1], marker="o", ms=2.5, lw=1.0,
                label=path.rsplit("/", 1)[-1])
    ax.set_xlabel("t")
    ax.set_ylabel("front position")
    ax.legend()
    _finish(fig, ax, job, "front position vs time")


def _render_contour2d(job: FigureJob):
    snaps = _load_snapshots(job, 2)
    fig, ax = _new_axes()
    x = snaps[0].axis_centers()
    linestyles = ("solid", "dashed", "dotted", "dashdot")
    for k, (snap, path) in enumerate(zip(snaps, job.inputs)):
        style = linestyles[k % len(linestyles)]
        cs = ax.contour(x, x, snap.values.T, levels=sorted(job.levels),
                        linestyles=style)
        ax.plot([], [], linestyle=style, color="k",
                label=f"{snap.producer} (t={snap.time:g})")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_aspect("equal")
    ax.legend()
    levels = ", ".join(f"{v:g}" for v in sorted(job.levels))
    _finish(fig, ax, job, f"contours at u = {levels}")


def _render_slice3d(job: FigureJob):
    snaps = _load_snapshots(job, 3)
    if len(snaps) != 1:
        raise JobError("slice3d renders exactly one snapshot")
    snap = snaps[0]
    axis = _PLANE_AXES[job.plane]
    centers = snap.axis_centers()
    plane_index = int(np.argmin(np.abs(centers)))  # nearest bin-center plane
    cut = np.take(snap.values, plane_index, axis=axis)
    other = [name for name in ("x", "y", "z") if name != job.plane]
    fig, ax = _new_axes()
    half = snap.half_width
    im = ax.imshow(cut.T, origin="lower", extent=(-half, half, -half, half),
                   aspect="equal", cmap="viridis")
    fig.colorbar(im, ax=ax, label="u")
    ax.set_xlabel(other[0])
    ax.set_ylabel(other[1])
    _finish(fig, ax, job,
            f"{snap.producer} slice {job.plane} = {centers[plane_index]:.3g} "
            f"(t={snap.time:g})")


_RENDERERS = {
    "profile": _render_profile,
    "front": _render_front,
    "contour2d": _render_contour2d,
    "slice3d": _render_slice3d,
}


def render(job: FigureJob) -> str:
    """Render the job to its output image path and return that path."""
    _RENDERERS[job.kind](job)
    return job.output
