"""Quantitative observables: discrete L2 error, front position and speed,
and the particle-vs-reference refinement study.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field

import numpy as np

from .core import DensityField, SgipError


class DiagnosticsError(SgipError):
    pass


def l2_norm(field: DensityField) -> float:
    """Discrete L2 norm sqrt(sum_j dx^d * u_j^2)."""
    return float(np.sqrt(field.grid.bin_volume * np.sum(field.values**2)))


def l2_error(a: DensityField, b: DensityField) -> float:
    """Discrete L2 distance between two fields on the same grid."""
    if a.grid != b.grid:
        raise DiagnosticsError(f"grid mismatch: {a.grid} vs {b.grid}")
    diff = a.values - b.values
    return float(np.sqrt(a.grid.bin_volume * np.sum(diff * diff)))


def relative_l2(a: DensityField, reference: DensityField) -> float:
    """l2_error(a, reference) normalized by the reference norm."""
    denom = l2_norm(reference)
    if denom == 0.0:
        raise DiagnosticsError("reference field has zero norm")
    return l2_error(a, reference) / denom


def axis_trace(field: DensityField, axis: int = 0) -> np.ndarray:
    """1-d trace along ``axis`` through the domain-center bins."""
    if not 0 <= axis < field.grid.dim:
        raise DiagnosticsError(f"axis {axis} out of range for dim {field.grid.dim}")
    cube = field.reshaped()
    mid = field.grid.bins_per_dim // 2
    index = [mid] * field.grid.dim
    index[axis] = slice(None)
    return np.ascontiguousarray(cube[tuple(index)])


def smooth_trace(trace: np.ndarray) -> np.ndarray:
    """One pass of 3-point nearest-neighbor averaging (ends mirrored)."""
    padded = np.concatenate(([trace[0]], trace, [trace[-1]]))
    return (padded[:-2] + padded[1:-1] + padded[2:]) / 3.0


def front_position(
    field: DensityField, threshold: float, axis: int = 0, smooth: bool = False
) -> float | None:
    """Rightmost downward crossing of ``threshold`` along the center trace.

    The crossing between adjacent bin centers where the trace passes from
    >= threshold to < threshold is located by linear interpolation.  Returns
    None when the trace never crosses (all above or all below).
    """
    if not 0.0 < threshold < 1.0:
        raise DiagnosticsError(f"threshold must lie in (0, 1), got {threshold}")
    trace = axis_trace(field, axis)
    if smooth:
        trace = smooth_trace(trace)
    left, right = trace[:-1], trace[1:]
    crossings = np.flatnonzero((left >= threshold) & (right < threshold))
    if len(crossings) == 0:
        return None
    i = int(crossings[-1])
    centers = field.grid.axis_centers()
    frac = (trace[i] - threshold) / (trace[i] - trace[i + 1])
    return float(centers[i] + frac * field.grid.bin_size)


def front_speed(series) -> float:
    """Least-squares slope of front position against time.

    ``series`` is an iterable of (t, x) pairs; at least three are required.
    """
    pts = np.asarray(list(series), dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise DiagnosticsError("front_speed needs at least 3 (t, x) points")
    if not np.all(np.isfinite(pts)):
        raise DiagnosticsError("front series contains non-finite entries")
    slope, _ = np.polyfit(pts[:, 0], pts[:, 1], 1)
    return float(slope)


# ---------------------------------------------------------------------------
# Refinement study


@dataclass(frozen=True)
class ScheduleLevel:
    time_step: float
    bin_size: float
    particles: int


@dataclass(frozen=True)
class ConvergenceSchedule:
    """Refinement levels with the CFL-like ratios recorded per level.

    kappa = dx / dt and nu = 1 / (sqrt(N dx^d) dt) must both be
    non-increasing along the schedule; that is the regime in which the error
    law applies.
    """

    dim: int
    levels: tuple[ScheduleLevel, ...]

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("schedule needs at least one level")
        kappas = self.kappa()
        nus = self.nu()
        if np.any(np.diff(kappas) > 1e-12) or np.any(np.diff(nus) > 1e-12):
            raise ValueError(
                f"kappa={kappas} and nu={nus} must be non-increasing along the schedule"
            )

    def kappa(self) -> np.ndarray:
        return np.array([lv.bin_size / lv.time_step for lv in self.levels])

    def nu(self) -> np.ndarray:
        return np.array(
            [
                1.0 / (np.sqrt(lv.particles * lv.bin_size**self.dim) * lv.time_step)
                for lv in self.levels
            ]
        )


@dataclass
class StudyResult:
    schedule: ConvergenceSchedule
    rows: list = dataclass_field(default_factory=list)  # (level, dt, dx, N, seed, l2)
    level_means: list = dataclass_field(default_factory=list)

    @property
    def monotone(self) -> bool:
        return bool(np.all(np.diff(self.level_means) <= 0.0))


def convergence_study(config, schedule: ConvergenceSchedule, seeds,
                      reference: DensityField) -> StudyResult:
    """Mean final-time L2 error of the particle run per refinement level.

    ``reference`` is a fine-grid field (normally from the finite-difference
    solver) at the run's final time; it must be at least 4x finer than the
    finest level and is restricted onto each level's grid by cell averaging.
    """
    from .driver import sgip_run
    from .fdm import restrict_field

    if schedule.dim != config.dim:
        raise DiagnosticsError("schedule dimension does not match the configuration")
    finest = max(
        round(2.0 * config.half_width / lv.bin_size) for lv in schedule.levels
    )
    if reference.grid.bins_per_dim < 4 * finest:
        raise DiagnosticsError(
            f"reference grid ({reference.grid.bins_per_dim} bins) must be at least "
            f"4x finer than the finest level ({finest} bins)"
        )
    result = StudyResult(schedule=schedule)
    for lvl, level in enumerate(schedule.levels):
        m = round(2.0 * config.half_width / level.bin_size)
        run_cfg = config.with_overrides(
            bins_per_dim=m,
            time_step=level.time_step,
            particles=level.particles,
            snapshot_every=max(1, round(config.final_time / level.time_step)),
            output_dir=None,
        )
        ref_level = restrict_field(reference, run_cfg.grid)
        errors = []
        for seed in seeds:
            run = sgip_run(run_cfg.with_overrides(seed=int(seed)))
            err = l2_error(run.final_field, ref_level)
            errors.append(err)
            result.rows.append(
                (lvl, level.time_step, level.bin_size, level.particles, int(seed), err)
            )
        result.level_means.append(float(np.mean(errors)))
    return result
