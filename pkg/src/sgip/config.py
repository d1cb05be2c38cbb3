"""Flat key=value configuration files for particle and reference runs.

Example (the 1-d logistic benchmark):

    dim = 1
    L = 60
    M = 150
    N = 1000000
    dt = 0.5
    T = 20
    D = 1
    flow = zero
    reaction = fkpp
    scheme = closed_form
    init = interval:0,1
    seed = 1

Flow, reaction and scheme parameters use dotted keys (``flow.delta = 2``,
``reaction.E = 0.5``).  Unknown keys are errors so typos never pass silently.
Reference-solver configs use ``dx`` instead of ``M``/``N`` and may add
``fdm.advection``, ``fdm.diffusion`` and ``fdm.reaction`` scheme switches.
"""

from __future__ import annotations

import numpy as np

from .core import SgipError
from .diagnostics import ConvergenceSchedule, ScheduleLevel
from .driver import (
    CustomDensity,
    IndicatorBall,
    IndicatorBox,
    IndicatorInterval,
    SimConfig,
)
from .fdm import FdmConfig
from .flows import ABC, CatsEye, Cellular, Constant, Shear, Zero
from .reactions import (
    Arrhenius,
    BackwardEuler,
    ClosedForm,
    CrankNicolson,
    Cubic,
    FKPP,
    Linear,
    Polynomial,
)


class ConfigError(SgipError):
    def __init__(self, message, key=None, line=None):
        where = ""
        if key is not None:
            where += f" (key '{key}'"
            where += f", line {line})" if line is not None else ")"
        elif line is not None:
            where += f" (line {line})"
        super().__init__(message + where)
        self.key = key
        self.line = line


_SGIP_REQUIRED = {"dim", "L", "M", "N", "dt", "T", "D", "flow", "reaction",
                  "scheme", "init", "seed"}
_FDM_REQUIRED = {"dim", "L", "dx", "dt", "T", "D", "flow", "reaction", "init"}


def _parse_lines(text: str) -> dict[str, tuple[str, int]]:
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"empty key or value in {raw.strip()!r}", line=lineno)
        if key in entries:
            raise ConfigError(f"duplicate key '{key}'", key=key, line=lineno)
        entries[key] = (value, lineno)
    return entries


class _Entries:
    def __init__(self, entries):
        self.entries = entries
        self.used = set()

    def take(self, key, kind=str, default=None, required=False):
        if key not in self.entries:
            if required:
                raise ConfigError(f"missing required key '{key}'", key=key)
            return default
        self.used.add(key)
        value, lineno = self.entries[key]
        try:
            if kind is bool:
                if value.lower() not in ("true", "false", "0", "1"):
                    raise ValueError(value)
                return value.lower() in ("true", "1")
            return kind(value)
        except ValueError:
            raise ConfigError(
                f"cannot parse value {value!r} as {kind.__name__}", key=key, line=lineno
            ) from None

    def line(self, key):
        return self.entries[key][1] if key in self.entries else None

    def unknown(self):
        # Anything not consumed while building is either a typo or a
        # parameter for a different variant; both are rejected.
        return sorted(set(self.entries) - self.used)


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(part) for part in text.split(","))


def _build_flow(ent: _Entries):
    name = ent.take("flow", str, required=True).lower()
    param = lambda key, kind=float, default=None: ent.take(key, kind, default)
    if name == "zero":
        return Zero()
    if name == "constant":
        vec = param("flow.v", _float_list)
        if vec is None:
            raise ConfigError("constant flow needs flow.v = c1[,c2[,c3]]", key="flow.v")
        return Constant(vec)
    if name == "shear":
        return Shear()
    if name == "cellular":
        return Cellular()
    if name == "catseye":
        return CatsEye(delta=param("flow.delta", float, 2.0))
    if name == "abc":
        return ABC(
            a=param("flow.a", float, 1.0),
            b=param("flow.b", float, float(np.sqrt(2.0 / 3.0))),
            c=param("flow.c", float, float(np.sqrt(1.0 / 3.0))),
        )
    raise ConfigError(f"unknown flow '{name}'", key="flow", line=ent.line("flow"))


def _build_reaction(ent: _Entries):
    name = ent.take("reaction", str, required=True).lower()
    if name == "fkpp":
        return FKPP()
    if name == "linear":
        return Linear(coeff=ent.take("reaction.lambda", float, 1.0))
    if name == "cubic":
        return Cubic()
    if name == "arrhenius":
        return Arrhenius(activation_energy=ent.take("reaction.E", float, 0.5))
    if name == "polynomial":
        coeffs = ent.take("reaction.coeffs", _float_list)
        if coeffs is None:
            raise ConfigError("polynomial reaction needs reaction.coeffs = a0,a1,...",
                              key="reaction.coeffs")
        return Polynomial(coeffs)
    raise ConfigError(f"unknown reaction '{name}'", key="reaction",
                      line=ent.line("reaction"))


def _build_scheme(ent: _Entries, required: bool):
    name = ent.take("scheme", str, default="backward_euler", required=required)
    name = name.lower()
    kwargs = {}
    tol = ent.take("scheme.tol", float)
    max_iter = ent.take("scheme.max_iter", int)
    u_max = ent.take("scheme.u_max", float)
    if tol is not None:
        kwargs["tol"] = tol
    if max_iter is not None:
        kwargs["max_iter"] = max_iter
    if u_max is not None:
        kwargs["u_max"] = u_max
    if name == "closed_form":
        if kwargs:
            raise ConfigError("closed_form takes no scheme.* parameters", key="scheme")
        return ClosedForm()
    if name == "backward_euler":
        return BackwardEuler(**kwargs)
    if name == "crank_nicolson":
        return CrankNicolson(**kwargs)
    raise ConfigError(f"unknown scheme '{name}'", key="scheme", line=ent.line("scheme"))


def _build_init(ent: _Entries):
    from . import io as sgip_io

    spec = ent.take("init", str, required=True)
    kind, _, args = spec.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "interval":
            lo, hi = _float_list(args)
            return IndicatorInterval(lo, hi)
        if kind == "box":
            vals = _float_list(args)
            if len(vals) % 2 or not vals:
                raise ValueError("box needs lo,hi pairs per axis")
            bounds = tuple((vals[i], vals[i + 1]) for i in range(0, len(vals), 2))
            return IndicatorBox(bounds)
        if kind == "ball":
            vals = _float_list(args)
            if len(vals) < 2:
                raise ValueError("ball needs center coordinates and a radius")
            return IndicatorBall(tuple(vals[:-1]), vals[-1])
        if kind == "custom":
            field, _ = sgip_io.read_snapshot(args.strip())
            return CustomDensity(field)
        raise ValueError(f"unknown init kind '{kind}'")
    except (ValueError, OSError) as err:
        raise ConfigError(f"invalid init spec {spec!r}: {err}", key="init",
                          line=ent.line("init")) from None


def parse_config_text(text: str, kind: str = "sgip"):
    """Parse config text into a SimConfig ('sgip') or FdmConfig ('fdm')."""
    if kind not in ("sgip", "fdm"):
        raise ValueError("kind must be 'sgip' or 'fdm'")
    ent = _Entries(_parse_lines(text))
    required = _SGIP_REQUIRED if kind == "sgip" else _FDM_REQUIRED
    for key in sorted(required):
        if key not in ent.entries:
            raise ConfigError(f"missing required key '{key}'", key=key)

    common = dict(
        dim=ent.take("dim", int, required=True),
        half_width=ent.take("L", float, required=True),
        time_step=ent.take("dt", float, required=True),
        final_time=ent.take("T", float, required=True),
        diffusion=ent.take("D", float, required=True),
        flow=_build_flow(ent),
        reaction=_build_reaction(ent),
        init=_build_init(ent),
        snapshot_every=ent.take("snapshot_every", int, 1),
        output_dir=ent.take("output", str),
        front_threshold=ent.take("front_threshold", float),
    )
    try:
        if kind == "sgip":
            config = SimConfig(
                bins_per_dim=ent.take("M", int, required=True),
                particles=ent.take("N", int, required=True),
                scheme=_build_scheme(ent, required=True),
                seed=ent.take("seed", int, required=True),
                **common,
            )
        else:
            ent.take("seed", int, 0)  # accepted for symmetry; deterministic solver
            config = FdmConfig(
                cell_size=ent.take("dx", float, required=True),
                advection=ent.take("fdm.advection", str, "upwind"),
                diffusion_scheme=ent.take("fdm.diffusion", str, "implicit"),
                reaction_mode=ent.take("fdm.reaction", str, "explicit"),
                reaction_scheme=_ensure_implicit(_build_scheme(ent, required=False)),
                **common,
            )
    except (ValueError, SgipError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err

    bad = ent.unknown()
    if bad:
        lines = ", ".join(f"'{k}' (line {ent.line(k)})" for k in bad)
        raise ConfigError(f"unknown key(s): {lines}", key=bad[0], line=ent.line(bad[0]))
    return config


def _ensure_implicit(scheme):
    if isinstance(scheme, ClosedForm):
        raise ConfigError(
            "the reference solver's implicit reaction option uses backward_euler "
            "or crank_nicolson, not closed_form", key="scheme",
        )
    return scheme


def parse_config(path, kind: str = "sgip"):
    with open(path) as fh:
        return parse_config_text(fh.read(), kind)


# ---------------------------------------------------------------------------
# Serialization (round-trips through parse_config_text)


def _flow_lines(flow):
    if isinstance(flow, Zero):
        return ["flow = zero"]
    if isinstance(flow, Constant):
        return ["flow = constant", f"flow.v = {','.join(repr(v) for v in flow.c)}"]
    if isinstance(flow, Shear):
        return ["flow = shear"]
    if isinstance(flow, Cellular):
        return ["flow = cellular"]
    if isinstance(flow, CatsEye):
        return ["flow = catseye", f"flow.delta = {flow.delta!r}"]
    if isinstance(flow, ABC):
        return ["flow = abc", f"flow.a = {flow.a!r}", f"flow.b = {flow.b!r}",
                f"flow.c = {flow.c!r}"]
    raise ConfigError(f"cannot serialize flow {flow!r}")


def _reaction_lines(reaction):
    if isinstance(reaction, FKPP):
        return ["reaction = fkpp"]
    if isinstance(reaction, Linear):
        return ["reaction = linear", f"reaction.lambda = {reaction.coeff!r}"]
    if isinstance(reaction, Cubic):
        return ["reaction = cubic"]
    if isinstance(reaction, Arrhenius):
        return ["reaction = arrhenius", f"reaction.E = {reaction.activation_energy!r}"]
    if isinstance(reaction, Polynomial):
        return ["reaction = polynomial",
                f"reaction.coeffs = {','.join(repr(c) for c in reaction.coeffs)}"]
    raise ConfigError(f"cannot serialize reaction {reaction!r}")


def _scheme_lines(scheme):
    if isinstance(scheme, ClosedForm):
        return ["scheme = closed_form"]
    name = "backward_euler" if isinstance(scheme, BackwardEuler) else "crank_nicolson"
    return [f"scheme = {name}", f"scheme.tol = {scheme.tol!r}",
            f"scheme.max_iter = {scheme.max_iter}", f"scheme.u_max = {scheme.u_max!r}"]


def _init_line(init):
    if isinstance(init, IndicatorInterval):
        return f"init = interval:{init.lo!r},{init.hi!r}"
    if isinstance(init, IndicatorBox):
        flat = ",".join(f"{lo!r},{hi!r}" for lo, hi in init.bounds)
        return f"init = box:{flat}"
    if isinstance(init, IndicatorBall):
        return f"init = ball:{','.join(repr(c) for c in init.center)},{init.radius!r}"
    raise ConfigError(f"cannot serialize init {init!r} (custom fields are file-backed)")


def serialize_config(config) -> str:
    """Canonical text form; parsing it back yields an equivalent config."""
    is_fdm = isinstance(config, FdmConfig)
    lines = [
        f"dim = {config.dim}",
        f"L = {config.half_width!r}",
        f"dt = {config.time_step!r}",
        f"T = {config.final_time!r}",
        f"D = {config.diffusion!r}",
    ]
    if is_fdm:
        lines.append(f"dx = {config.cell_size!r}")
        lines += [f"fdm.advection = {config.advection}",
                  f"fdm.diffusion = {config.diffusion_scheme}",
                  f"fdm.reaction = {config.reaction_mode}"]
        lines += _scheme_lines(config.reaction_scheme)
    else:
        lines.append(f"M = {config.bins_per_dim}")
        lines.append(f"N = {config.particles}")
        lines.append(f"seed = {config.seed}")
        lines += _scheme_lines(config.scheme)
    lines += _flow_lines(config.flow)
    lines += _reaction_lines(config.reaction)
    lines.append(_init_line(config.init))
    lines.append(f"snapshot_every = {config.snapshot_every}")
    if config.output_dir is not None:
        lines.append(f"output = {config.output_dir}")
    if config.front_threshold is not None:
        lines.append(f"front_threshold = {config.front_threshold!r}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Refinement schedule files: one "dt, dx, N" triple per line


def parse_schedule_text(text: str, dim: int) -> ConvergenceSchedule:
    levels = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for chunk in line.split(",") for p in chunk.split()]
        if len(parts) != 3:
            raise ConfigError(f"schedule line needs 'dt dx N', got {raw.strip()!r}",
                              line=lineno)
        dt, dx, n = float(parts[0]), float(parts[1]), int(float(parts[2]))
        levels.append(ScheduleLevel(dt, dx, n))
    if not levels:
        raise ConfigError("schedule file has no levels")
    return ConvergenceSchedule(dim, tuple(levels))


def parse_schedule(path, dim: int) -> ConvergenceSchedule:
    with open(path) as fh:
        return parse_schedule_text(fh.read(), dim)
