"""Finite-difference reference solver for the same problem family.

Space: second-order central diffusion with homogeneous Neumann ghost cells,
first-order upwind advection on the conservative flux (central differencing
behind a flag).  Time: IMEX Euler — advection and reaction explicit,
diffusion implicit by dimension-split backward Euler (one tridiagonal solve
per axis).  Implicit diffusion keeps the solver stable at the large diffusion
numbers the reference resolutions imply, where a fully explicit step would
blow up; a fully explicit diffusion mode is available behind a flag and then
the parabolic stability bound is enforced at construction.

The advection sign matches the particle drift convention:
u_t = -div(v u) + D lap(u) + r(u).

Boundary fluxes (advective and diffusive) are zero, so with r = 0 the total
grid mass is conserved to rounding.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .core import DensityField, GridSpec, SgipError, bin_index, field_total_mass
from .driver import (
    CustomDensity,
    IndicatorBall,
    IndicatorBox,
    IndicatorInterval,
    InitSpec,
    RunResult,
)
from .flows import FlowField, Zero
from .reactions import (
    Arrhenius,
    BackwardEuler,
    CrankNicolson,
    Cubic,
    FKPP,
    Linear,
    Polynomial,
    ReactionModel,
    react_values,
)

try:
    from . import _fdm_kernels
    from ._fdm_kernels import FLUSH_THRESHOLD as _FLUSH

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _fdm_kernels = None
    _FLUSH = 1e-250
    HAVE_NUMBA = False


class FdmError(SgipError):
    pass


class StabilityError(FdmError):
    pass


NAN_CHECK_EVERY = 100


@dataclass(frozen=True)
class FdmConfig:
    """Reference-solver run description.

    ``cell_size`` must divide the domain width 2L evenly.  The advective CFL
    number dt * max|v| / dx may not exceed 1; with ``diffusion_scheme =
    "explicit"`` the parabolic bound dt <= dx^2 / (2 d D) is enforced too.
    """

    dim: int
    half_width: float
    cell_size: float
    time_step: float
    final_time: float
    diffusion: float
    flow: FlowField
    reaction: ReactionModel | None
    init: InitSpec
    snapshot_every: int = 1
    output_dir: str | None = None
    front_threshold: float | None = None
    advection: str = "upwind"          # or "central"
    diffusion_scheme: str = "implicit"  # or "explicit"
    reaction_mode: str = "explicit"     # or "implicit"
    reaction_scheme: BackwardEuler | CrankNicolson = BackwardEuler()

    def __post_init__(self):
        if not (np.isfinite(self.cell_size) and self.cell_size > 0):
            raise ValueError(f"cell_size must be > 0, got {self.cell_size}")
        cells = round(2.0 * self.half_width / self.cell_size)
        if cells < 2 or abs(cells * self.cell_size - 2.0 * self.half_width) > 1e-9 * self.half_width:
            raise ValueError(
                f"cell_size {self.cell_size} must divide the domain width "
                f"{2 * self.half_width} into at least 2 cells"
            )
        grid = self.grid  # validates dim/L/M combination
        if not (np.isfinite(self.time_step) and self.time_step > 0):
            raise ValueError(f"time_step must be > 0, got {self.time_step}")
        if not (np.isfinite(self.final_time) and self.final_time >= 0):
            raise ValueError(f"final_time must be >= 0, got {self.final_time}")
        if not (np.isfinite(self.diffusion) and self.diffusion >= 0):
            raise ValueError(f"diffusion must be >= 0, got {self.diffusion}")
        if self.advection not in ("upwind", "central"):
            raise ValueError(f"advection must be 'upwind' or 'central', got {self.advection}")
        if self.diffusion_scheme not in ("implicit", "explicit"):
            raise ValueError(f"diffusion_scheme must be 'implicit' or 'explicit'")
        if self.reaction_mode not in ("explicit", "implicit"):
            raise ValueError(f"reaction_mode must be 'explicit' or 'implicit'")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.flow.dim is not None and self.flow.dim != self.dim:
            raise ValueError(
                f"flow is {self.flow.dim}-dimensional but the run is {self.dim}-dimensional"
            )
        if self.init.dim != self.dim:
            raise ValueError("initial condition dimension mismatch")
        if self.front_threshold is not None and not 0.0 < self.front_threshold < 1.0:
            raise ValueError("front_threshold must lie in (0, 1)")
        dx = grid.bin_size
        cfl = self.time_step * self.flow.max_speed() / dx
        if cfl > 1.0 + 1e-12:
            raise StabilityError(
                f"advective CFL {cfl:.3f} exceeds 1 (dt={self.time_step}, dx={dx})"
            )
        if self.diffusion_scheme == "explicit" and self.diffusion > 0:
            bound = dx * dx / (2.0 * self.dim * self.diffusion)
            if self.time_step > bound * (1.0 + 1e-12):
                raise StabilityError(
                    f"explicit diffusion needs dt <= dx^2/(2 d D) = {bound:.3e}, "
                    f"got dt = {self.time_step}"
                )

    @property
    def cells_per_dim(self) -> int:
        return round(2.0 * self.half_width / self.cell_size)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.dim, self.half_width, self.cells_per_dim)

    @property
    def n_steps(self) -> int:
        return int(round(self.final_time / self.time_step))

    def with_overrides(self, **kwargs) -> "FdmConfig":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# Initial field on the solver grid


def initial_field(config: FdmConfig) -> np.ndarray:
    """Cell-average initial data where separable, center samples otherwise."""
    grid = config.grid
    init = config.init
    if isinstance(init, (IndicatorInterval, IndicatorBox)):
        bounds = init.support_bounds()
        edges = np.linspace(-grid.half_width, grid.half_width, grid.bins_per_dim + 1)
        fracs = []
        for lo, hi in bounds:
            overlap = np.minimum(hi, edges[1:]) - np.maximum(lo, edges[:-1])
            fracs.append(np.clip(overlap, 0.0, None) / grid.bin_size)
        u = fracs[0]
        for f in fracs[1:]:
            u = np.multiply.outer(u, f)
        return np.ascontiguousarray(u)
    if isinstance(init, IndicatorBall):
        centers = grid.axis_centers()
        mesh = np.meshgrid(*([centers] * grid.dim), indexing="ij")
        r2 = sum((m - c) ** 2 for m, c in zip(mesh, init.center))
        return (r2 <= init.radius**2).astype(np.float64)
    if isinstance(init, CustomDensity):
        centers = grid.axis_centers()
        mesh = np.meshgrid(*([centers] * grid.dim), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        coarse = init.field
        vals = coarse.values[bin_index(pts, coarse.grid)]
        return vals.reshape(grid.shape)
    raise FdmError(f"unsupported initial condition {type(init).__name__}")


# ---------------------------------------------------------------------------
# Spatial operators (NumPy reference path, any dimension)


def _face_velocities(config: FdmConfig) -> list[np.ndarray]:
    """Per-axis arrays of the face-normal velocity component.

    Axis a's array has shape like the field but cells+1 along axis a; the
    built-in fields are steady so these are computed once per run.
    """
    grid = config.grid
    if isinstance(config.flow, Zero):
        return []
    centers = grid.axis_centers()
    edges = np.linspace(-grid.half_width, grid.half_width, grid.bins_per_dim + 1)
    out = []
    for axis in range(grid.dim):
        coords = [centers] * grid.dim
        coords[axis] = edges
        mesh = np.meshgrid(*coords, indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=-1)
        v = config.flow.velocity(pts, 0.0)[:, axis]
        out.append(np.ascontiguousarray(v.reshape(mesh[0].shape)))
    return out


def _flux_divergence(u: np.ndarray, faces: list[np.ndarray], dx: float,
                     central: bool) -> np.ndarray:
    """div(v u) with zero boundary fluxes; upwind or central face values."""
    div = np.zeros_like(u)
    for axis, vf_full in enumerate(faces):
        v = np.moveaxis(u, axis, 0)
        vf = np.moveaxis(vf_full, axis, 0)[1:-1]  # interior faces only
        if central:
            face_u = 0.5 * (v[:-1] + v[1:])
        else:
            face_u = np.where(vf > 0.0, v[:-1], v[1:])
        flux = vf * face_u
        dv = np.zeros_like(v)
        dv[:-1] += flux  # outgoing through the cell's right face
        dv[1:] -= flux   # incoming through the cell's left face
        div += np.moveaxis(dv, 0, axis)
    return div / dx


def _laplacian(u: np.ndarray, dx: float) -> np.ndarray:
    """Central Laplacian with mirror (Neumann) ghost cells."""
    lap = np.zeros_like(u)
    for axis in range(u.ndim):
        v = np.moveaxis(u, axis, 0)
        lv = np.moveaxis(lap, axis, 0)
        lv[1:-1] += v[2:] - 2.0 * v[1:-1] + v[:-2]
        lv[0] += v[1] - v[0]
        lv[-1] += v[-2] - v[-1]
    return lap / (dx * dx)


def _diffusion_factor(n: int, theta: float):
    """Cholesky factor of I - dt D lap (tridiagonal, Neumann ends)."""
    ab = np.zeros((2, n))
    ab[0, 1:] = -theta
    ab[1, :] = 1.0 + 2.0 * theta
    ab[1, 0] = ab[1, -1] = 1.0 + theta
    return cholesky_banded(ab, lower=False)


def _implicit_diffuse_numpy(u: np.ndarray, factor) -> np.ndarray:
    for axis in range(u.ndim):
        v = np.moveaxis(u, axis, 0)
        shape = v.shape
        flat = np.ascontiguousarray(v).reshape(shape[0], -1)
        sol = cho_solve_banded((factor, False), flat)
        u = np.moveaxis(sol.reshape(shape), 0, axis)
    return np.ascontiguousarray(u)


_DUMMY = np.zeros(1)


def _kernel_reaction(model) -> tuple[float, float, float, float]:
    """Kernel encoding: Horner cubic (c1, c2, c3) or an activation energy.

    The logistic, linear and cubic kinetics are cubics in u; the Arrhenius
    law is flagged through a positive activation energy instead.
    """
    if model is None:
        return 0.0, 0.0, 0.0, 0.0
    if isinstance(model, FKPP):
        return 1.0, -1.0, 0.0, 0.0
    if isinstance(model, Linear):
        return model.coeff, 0.0, 0.0, 0.0
    if isinstance(model, Cubic):
        return 0.0, 1.0, -1.0, 0.0
    if isinstance(model, Arrhenius):
        return 0.0, 0.0, 0.0, model.activation_energy
    raise FdmError(f"no kernel encoding for {type(model).__name__}")


# ---------------------------------------------------------------------------
# Stepper


class FdmSolver:
    """Precomputes per-run operators and advances the field in place."""

    def __init__(self, config: FdmConfig):
        self.config = config
        self.grid = config.grid
        self.faces = _face_velocities(config)
        self.dx = self.grid.bin_size
        theta = config.diffusion * config.time_step / (self.dx * self.dx)
        self.theta = theta
        self._factor = None
        self._thomas = None
        if config.diffusion > 0 and config.diffusion_scheme == "implicit":
            n = self.grid.bins_per_dim
            self._factor = _diffusion_factor(n, theta)
            if HAVE_NUMBA and self.grid.dim == 2:
                self._thomas = _fdm_kernels.thomas_coefficients(n, theta)
        self._use_numba_2d = (
            HAVE_NUMBA
            and self.grid.dim == 2
            and config.advection == "upwind"
            and config.reaction_mode == "explicit"
            and (config.diffusion == 0 or config.diffusion_scheme == "implicit")
            and not isinstance(config.reaction, Polynomial)
        )
        if self._use_numba_2d and not self.faces:
            n = self.grid.bins_per_dim
            self.faces = [np.zeros((n + 1, n)), np.zeros((n, n + 1))]

    def step(self, u: np.ndarray, t: float, out: np.ndarray | None = None) -> np.ndarray:
        """Advance one step; ``out`` may supply a reusable output buffer."""
        config = self.config
        dt = config.time_step
        if self._use_numba_2d:
            if out is None or out.shape != u.shape:
                out = np.empty_like(u)
            c1, c2, c3, arr_e = _kernel_reaction(config.reaction)
            vxf, vyf = self.faces
            solve = self._thomas is not None
            inv, thinv = self._thomas if solve else (_DUMMY, _DUMMY)
            _fdm_kernels.fused_step_rows(
                u, out, vxf, vyf, dt / self.dx, dt, c1, c2, c3, arr_e,
                inv, thinv, solve,
            )
            if solve:
                _fdm_kernels.sweep_axis0(out, inv, thinv)
            return out

        # NumPy reference path (any dimension, all option combinations).
        out = u.copy()
        if self.faces:
            out -= dt * _flux_divergence(u, self.faces, self.dx,
                                         config.advection == "central")
        if config.reaction is not None and config.reaction_mode == "explicit":
            out += dt * np.asarray(config.reaction.rate(u))
        if config.diffusion > 0:
            if config.diffusion_scheme == "implicit":
                out = _implicit_diffuse_numpy(out, self._factor)
                # Same subnormal-halo flush as the fast kernels apply.
                out[np.abs(out) < _FLUSH] = 0.0
            else:
                out += dt * config.diffusion * _laplacian(u, self.dx)
        if config.reaction is not None and config.reaction_mode == "implicit":
            out = np.asarray(
                react_values(out.ravel(), config.reaction, config.reaction_scheme, dt)
            ).reshape(out.shape)
        return out


def fdm_step(field: DensityField, config: FdmConfig) -> DensityField:
    """Advance one time step; convenience wrapper constructing the solver."""
    if field.grid != config.grid:
        raise FdmError("field grid does not match the configuration grid")
    solver = FdmSolver(config)
    u = solver.step(field.reshaped().copy(), field.time)
    _check_finite(u, 0)
    return DensityField(config.grid, np.maximum(u, 0.0).ravel(),
                        field.time + config.time_step)


def _check_finite(u: np.ndarray, step: int):
    if not np.all(np.isfinite(u)):
        bad = int(np.flatnonzero(~np.isfinite(u.ravel()))[0])
        raise FdmError(f"non-finite value at cell {bad} after step {step}")


def fdm_run(config: FdmConfig) -> RunResult:
    """March to the final time, recording snapshots like the particle runs.

    Diagnostics rows are recorded at snapshot cadence (the per-step global
    reductions would dominate large runs otherwise).
    """
    from . import io as sgip_io
    from .diagnostics import front_position

    writer = sgip_io.RunWriter(config.output_dir, "FDM") if config.output_dir else None
    result = RunResult(config=config)
    solver = FdmSolver(config)
    u = initial_field(config)
    t = 0.0
    n_steps = config.n_steps

    def record(step, u, t):
        field = DensityField(config.grid, np.maximum(u, 0.0).ravel(), t)
        front = None
        if config.front_threshold is not None:
            front = front_position(field, config.front_threshold)
        result.diagnostics.append((step, t, field_total_mass(field), front))
        result.times.append(t)
        result.fields.append(field)
        if writer:
            result.snapshot_paths.append(writer.write_snapshot(step, field))

    try:
        record(0, u, t)
        tic = _time.perf_counter()
        spare = np.empty_like(u)
        for step in range(1, n_steps + 1):
            nxt = solver.step(u, t, out=spare)
            spare = u if nxt is not u else spare
            u = nxt
            t = step * config.time_step
            if step % NAN_CHECK_EVERY == 0:
                _check_finite(u, step)
            if step % config.snapshot_every == 0 or step == n_steps:
                _check_finite(u, step)
                record(step, u, t)
        result.step_seconds.append((_time.perf_counter() - tic) / max(n_steps, 1))
        if writer:
            writer.finish(result)
    except Exception as err:
        if writer:
            writer.abort(result, err)
        raise
    return result


# ---------------------------------------------------------------------------
# Grid transfer


def restrict_field(field: DensityField, coarse: GridSpec) -> DensityField:
    """Cell-average restriction onto a coarser grid (mass conservative).

    Works for any resolution ratio via exact interval overlaps, applied
    separably along each axis.
    """
    fine = field.grid
    if fine.dim != coarse.dim:
        raise FdmError("restriction requires matching dimensions")
    if abs(fine.half_width - coarse.half_width) > 1e-12 * coarse.half_width:
        raise FdmError("restriction requires matching domains")
    if fine.bins_per_dim < coarse.bins_per_dim:
        raise FdmError("target grid must be coarser than the source grid")
    ec = np.linspace(-coarse.half_width, coarse.half_width, coarse.bins_per_dim + 1)
    ef = np.linspace(-fine.half_width, fine.half_width, fine.bins_per_dim + 1)
    overlap = np.minimum(ec[1:, None], ef[None, 1:]) - np.maximum(
        ec[:-1, None], ef[None, :-1]
    )
    weights = np.clip(overlap, 0.0, None) / coarse.bin_size
    u = field.reshaped()
    for axis in range(fine.dim):
        u = np.moveaxis(np.tensordot(weights, np.moveaxis(u, axis, 0), axes=(1, 0)),
                        0, axis)
    return DensityField(coarse, np.maximum(u, 0.0).ravel(), field.time)
