"""Main simulation loop: initialization and the advect-bin-react-resample
pipeline, with snapshot and diagnostics emission.

The per-step stream schedule is fixed so runs are reproducible from the seed
alone: stream 0 initializes the particles, and step ``n`` (0-based) uses
stream ``1 + 2n`` for advection-diffusion and ``2 + 2n`` for resampling.

The "solution at t_n" emitted by a run is the post-reaction Eulerian field;
the resampled ensemble is internal state for the next step.
"""

from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np

from .core import DensityField, GridSpec, ParticleEnsemble, SgipError, field_total_mass
from .flows import FlowField
from .reactions import (
    ClosedForm,
    FKPP,
    IntegratorScheme,
    Linear,
    ReactionModel,
    integrate_reaction_field,
)
from .resampling import ExtinctionError, resample
from .transport import RngStream, advect_diffuse_step, estimate_density

STREAM_INIT = 0


def advect_stream(step: int) -> int:
    return 1 + 2 * step


def resample_stream(step: int) -> int:
    return 2 + 2 * step


# ---------------------------------------------------------------------------
# Initial conditions


class InitSpec:
    """Base class for initial density descriptions."""

    dim: int

    @property
    def initial_mass(self) -> float:
        raise NotImplementedError

    def sample(self, n: int, gen: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def support_bounds(self) -> np.ndarray:
        """(dim, 2) array of per-axis support bounds, for domain checks."""
        raise NotImplementedError


@dataclass(frozen=True)
class IndicatorInterval(InitSpec):
    """1-d indicator of [lo, hi]."""

    lo: float
    hi: float
    dim = 1

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.hi > self.lo):
            raise ValueError(f"need lo < hi, got [{self.lo}, {self.hi}]")

    @property
    def initial_mass(self):
        return self.hi - self.lo

    def sample(self, n, gen):
        return self.lo + (self.hi - self.lo) * gen.random((n, 1))

    def support_bounds(self):
        return np.array([[self.lo, self.hi]])


@dataclass(frozen=True)
class IndicatorBox(InitSpec):
    """Indicator of a product of per-axis intervals."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(b) not in (1, 2, 3):
            raise ValueError("box needs 1-3 axis intervals")
        for lo, hi in b:
            if not (np.isfinite(lo) and np.isfinite(hi) and hi > lo):
                raise ValueError(f"degenerate box interval [{lo}, {hi}]")
        object.__setattr__(self, "bounds", b)

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def initial_mass(self):
        return float(np.prod([hi - lo for lo, hi in self.bounds]))

    def sample(self, n, gen):
        b = np.asarray(self.bounds)
        return b[:, 0] + (b[:, 1] - b[:, 0]) * gen.random((n, self.dim))

    def support_bounds(self):
        return np.asarray(self.bounds, dtype=np.float64)


_BALL_VOLUME = {1: 2.0, 2: math.pi, 3: 4.0 * math.pi / 3.0}

# Rejection sampling gives up after this many proposals per requested sample.
MAX_REJECTION_FACTOR = 10_000


@dataclass(frozen=True)
class IndicatorBall(InitSpec):
    """Indicator of a ball; sampled by rejection from its bounding box."""

    center: tuple[float, ...]
    radius: float

    def __post_init__(self):
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        if len(c) not in (1, 2, 3) or not all(np.isfinite(c)):
            raise ValueError(f"ball center must be a finite 1-3 vector, got {self.center}")
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"ball radius must be > 0, got {self.radius}")
        object.__setattr__(self, "center", c)

    @property
    def dim(self):
        return len(self.center)

    @property
    def initial_mass(self):
        return _BALL_VOLUME[self.dim] * self.radius**self.dim

    def sample(self, n, gen):
        center = np.asarray(self.center)
        out = np.empty((n, self.dim))
        got = 0
        proposed = 0
        limit = MAX_REJECTION_FACTOR * n
        while got < n:
            batch = max(n - got, 1024)
            if proposed + batch > limit:
                raise SgipError("rejection sampler exceeded its proposal budget")
            pts = center + self.radius * (2.0 * gen.random((batch, self.dim)) - 1.0)
            proposed += batch
            keep = pts[np.sum((pts - center) ** 2, axis=1) <= self.radius**2]
            take = min(len(keep), n - got)
            out[got : got + take] = keep[:take]
            got += take
        return out

    def support_bounds(self):
        c = np.asarray(self.center)
        return np.stack([c - self.radius, c + self.radius], axis=1)


@dataclass(frozen=True)
class CustomDensity(InitSpec):
    """Initial density given as samples on a grid; sampled bin-wise.

    A bin is chosen by inverse CDF over bin masses, then the position is
    uniform inside that bin.
    """

    field: DensityField

    def __post_init__(self):
        if field_total_mass(self.field) <= 0:
            raise ValueError("custom initial density has zero mass")

    @property
    def dim(self):
        return self.field.grid.dim

    @property
    def initial_mass(self):
        return field_total_mass(self.field)

    def sample(self, n, gen):
        from .core import bin_lower_corner
        from .resampling import bin_probabilities

        grid = self.field.grid
        cdf = np.cumsum(bin_probabilities(self.field))
        bins = np.searchsorted(cdf, gen.random(n), side="right")
        np.clip(bins, 0, grid.total_bins - 1, out=bins)
        corners = bin_lower_corner(bins, grid)
        return corners + gen.random((n, grid.dim)) * grid.bin_size

    def support_bounds(self):
        L = self.field.grid.half_width
        return np.array([[-L, L]] * self.dim)


def init_particles(init: InitSpec, n: int, rng: RngStream) -> ParticleEnsemble:
    """Draw n i.i.d. positions from the normalized initial density.

    Each particle carries mass M0 / n, where M0 is the support measure.
    """
    if n < 1:
        raise ValueError("need at least one particle")
    positions = init.sample(n, rng.generator())
    return ParticleEnsemble(positions, init.initial_mass / n)


# ---------------------------------------------------------------------------
# Run configuration


@dataclass(frozen=True)
class SimConfig:
    """Full description of one particle run."""

    dim: int
    half_width: float
    bins_per_dim: int
    particles: int
    time_step: float
    final_time: float
    diffusion: float
    flow: FlowField
    reaction: ReactionModel
    scheme: IntegratorScheme
    init: InitSpec
    seed: int
    snapshot_every: int = 1
    output_dir: str | None = None
    front_threshold: float | None = None

    def __post_init__(self):
        grid = self.grid  # validates dim, L, M
        if self.particles < 1:
            raise ValueError("particles must be >= 1")
        if not (np.isfinite(self.time_step) and self.time_step > 0):
            raise ValueError(f"time_step must be > 0, got {self.time_step}")
        if not (np.isfinite(self.final_time) and self.final_time >= 0):
            raise ValueError(f"final_time must be >= 0, got {self.final_time}")
        if not (np.isfinite(self.diffusion) and self.diffusion >= 0):
            raise ValueError(f"diffusion must be >= 0, got {self.diffusion}")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.flow.dim is not None and self.flow.dim != self.dim:
            raise ValueError(
                f"flow is {self.flow.dim}-dimensional but the run is {self.dim}-dimensional"
            )
        if self.init.dim != self.dim:
            raise ValueError(
                f"initial condition is {self.init.dim}-dimensional, run is {self.dim}"
            )
        bounds = self.init.support_bounds()
        if bounds.min() < -grid.half_width or bounds.max() > grid.half_width:
            raise ValueError("initial support must lie inside [-L, L]^d")
        if isinstance(self.scheme, ClosedForm) and not isinstance(self.reaction, (FKPP, Linear)):
            raise ValueError("closed-form integration requires FKPP or Linear kinetics")
        if self.front_threshold is not None and not 0.0 < self.front_threshold < 1.0:
            raise ValueError("front_threshold must lie in (0, 1)")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.dim, self.half_width, self.bins_per_dim)

    @property
    def n_steps(self) -> int:
        return int(round(self.final_time / self.time_step))

    def with_overrides(self, **kwargs) -> "SimConfig":
        return replace(self, **kwargs)


# ---------------------------------------------------------------------------
# Stepping


def sgip_step(
    ensemble: ParticleEnsemble, t: float, step: int, config: SimConfig
) -> tuple[ParticleEnsemble, DensityField, float, float]:
    """One pipeline step: advect/diffuse, bin, react, resample.

    Returns (next ensemble, post-reaction field stamped t + dt, next time,
    total mass after reaction).  The post-reaction field is the step's
    density output; resampling only regenerates the particle state.
    """
    dt = config.time_step
    try:
        star = advect_diffuse_step(
            ensemble, config.flow, config.diffusion, dt, t,
            RngStream(config.seed, advect_stream(step)), config.half_width,
        )
        field_star = estimate_density(star, config.grid, time=t + dt)
        field_next, m_next = integrate_reaction_field(
            field_star, config.reaction, config.scheme, dt
        )
        if m_next <= 0.0:
            raise ExtinctionError(f"population extinct after step {step}")
        ens_next = resample(
            star, field_next, m_next, RngStream(config.seed, resample_stream(step))
        )
    except ExtinctionError:
        raise
    except SgipError as err:
        raise type(err)(f"step {step}: {err}") from err
    return ens_next, field_next, t + dt, m_next


# ---------------------------------------------------------------------------
# Whole runs


@dataclass
class RunResult:
    """In-memory artifact of a run; files are also written when configured."""

    config: SimConfig
    status: str = "completed"  # or "extinct"
    times: list = dataclass_field(default_factory=list)
    fields: list = dataclass_field(default_factory=list)
    diagnostics: list = dataclass_field(default_factory=list)  # (step, t, mass, front_x)
    snapshot_paths: list = dataclass_field(default_factory=list)
    step_seconds: list = dataclass_field(default_factory=list)
    final_ensemble: ParticleEnsemble | None = None

    @property
    def final_field(self) -> DensityField:
        return self.fields[-1]

    def front_series(self) -> np.ndarray:
        """(t, front_x) rows from the diagnostics, skipping absent fronts."""
        rows = [(t, fx) for (_, t, _, fx) in self.diagnostics if fx is not None]
        return np.asarray(rows, dtype=np.float64)


def sgip_run(config: SimConfig) -> RunResult:
    """Run the full pipeline for round(T / dt) steps.

    A snapshot is kept at step 0, every ``snapshot_every`` steps, and at the
    final step; a diagnostics row is kept every step.  With an output
    directory configured, snapshots, the diagnostics CSV and a manifest are
    written as well (see sgip.io for the formats).
    """
    from . import io as sgip_io

    writer = sgip_io.RunWriter(config.output_dir, "SGIP") if config.output_dir else None
    result = RunResult(config=config)
    try:
        ensemble = init_particles(
            config.init, config.particles, RngStream(config.seed, STREAM_INIT)
        )
        t = 0.0
        n_steps = config.n_steps
        field = estimate_density(ensemble, config.grid, time=0.0)
        _record(result, writer, 0, field, emit_snapshot=True)
        for step in range(n_steps):
            tic = _time.perf_counter()
            try:
                ensemble, field, t, _ = sgip_step(ensemble, t, step, config)
            except ExtinctionError:
                result.status = "extinct"
                break
            result.step_seconds.append(_time.perf_counter() - tic)
            emit = ((step + 1) % config.snapshot_every == 0) or (step + 1 == n_steps)
            _record(result, writer, step + 1, field, emit_snapshot=emit)
        result.final_ensemble = ensemble
        if writer:
            writer.finish(result)
    except Exception as err:
        if writer:
            writer.abort(result, err)
        raise
    return result


def _record(result: RunResult, writer, step: int, field: DensityField,
            emit_snapshot: bool):
    config = result.config
    front_x = None
    if config.front_threshold is not None:
        from .diagnostics import front_position

        front_x = front_position(field, config.front_threshold)
    result.diagnostics.append((step, field.time, field_total_mass(field), front_x))
    if emit_snapshot:
        result.times.append(field.time)
        result.fields.append(field)
        if writer:
            result.snapshot_paths.append(writer.write_snapshot(step, field))
