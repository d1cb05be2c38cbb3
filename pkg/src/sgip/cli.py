"""Command-line entry points.

Subcommands::

    sgip run <config> [--out DIR]          particle run
    sgip fdm <config> [--out DIR]          finite-difference reference run
    sgip compare <snapA> <snapB>           L2 distance after grid restriction
    sgip front <snapshot|run-dir> --threshold T [--axis A] [--smooth]
    sgip converge <config> --schedule FILE --seeds K [--ref-dx X] [--ref-dt T]

All commands are non-interactive; they exit 0 on success and print a single
machine-readable ``error: <Kind>: <message>`` line to stderr on failure.
"""

from __future__ import annotations

import argparse
import glob
import os
import sys

from .core import SgipError
from .config import parse_config, parse_schedule
from .diagnostics import convergence_study, front_position, l2_error
from .driver import sgip_run
from .fdm import FdmConfig, fdm_run, restrict_field
from .io import read_snapshot

FRONT_HEADER = "# sgip-front v1"
CONVERGE_HEADER = "# sgip-converge v1"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sgip")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the particle solver")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides the config)")

    p_fdm = sub.add_parser("fdm", help="run the finite-difference reference solver")
    p_fdm.add_argument("config")
    p_fdm.add_argument("--out", help="output directory (overrides the config)")

    p_cmp = sub.add_parser("compare", help="L2 distance between two snapshots")
    p_cmp.add_argument("snap_a")
    p_cmp.add_argument("snap_b")

    p_front = sub.add_parser("front", help="front-position series from snapshots")
    p_front.add_argument("target", help="snapshot file or run directory")
    p_front.add_argument("--threshold", type=float, default=0.2)
    p_front.add_argument("--axis", type=int, default=0)
    p_front.add_argument("--smooth", action="store_true",
                         help="average neighbors once before extraction")

    p_conv = sub.add_parser("converge", help="refinement study against a reference")
    p_conv.add_argument("config")
    p_conv.add_argument("--schedule", required=True, help="file of 'dt dx N' lines")
    p_conv.add_argument("--seeds", type=int, default=5, help="number of seeds per level")
    p_conv.add_argument("--ref-dx", type=float, default=None)
    p_conv.add_argument("--ref-dt", type=float, default=None)
    p_conv.add_argument("--out", help="write the per-seed CSV table here")
    return parser


def _cmd_run(args) -> int:
    config = parse_config(args.config, kind="sgip")
    if args.out:
        config = config.with_overrides(output_dir=args.out)
    if config.output_dir is None:
        raise SgipError("no output directory: set 'output' in the config or pass --out")
    result = sgip_run(config)
    print(f"{result.status}: {len(result.snapshot_paths)} snapshot(s) in {config.output_dir}")
    return 0


def _cmd_fdm(args) -> int:
    config = parse_config(args.config, kind="fdm")
    if args.out:
        config = config.with_overrides(output_dir=args.out)
    if config.output_dir is None:
        raise SgipError("no output directory: set 'output' in the config or pass --out")
    result = fdm_run(config)
    print(f"{result.status}: {len(result.snapshot_paths)} snapshot(s) in {config.output_dir}")
    return 0


def _cmd_compare(args) -> int:
    field_a, _ = read_snapshot(args.snap_a)
    field_b, _ = read_snapshot(args.snap_b)
    if field_a.grid.bins_per_dim > field_b.grid.bins_per_dim:
        field_a = restrict_field(field_a, field_b.grid)
    elif field_b.grid.bins_per_dim > field_a.grid.bins_per_dim:
        field_b = restrict_field(field_b, field_a.grid)
    print(f"{l2_error(field_a, field_b):.17g}")
    return 0


def _snapshot_series(target):
    if os.path.isdir(target):
        paths = sorted(glob.glob(os.path.join(target, "snapshot_*.sgrd")))
        if not paths:
            raise SgipError(f"no snapshot_*.sgrd files in {target}")
        return paths
    return [target]


def _cmd_front(args) -> int:
    print(FRONT_HEADER)
    print("t,front_x")
    for path in _snapshot_series(args.target):
        field, _ = read_snapshot(path)
        x = front_position(field, args.threshold, axis=args.axis, smooth=args.smooth)
        print(f"{field.time!r},{float('nan') if x is None else x!r}")
    return 0


def _cmd_converge(args) -> int:
    config = parse_config(args.config, kind="sgip")
    schedule = parse_schedule(args.schedule, config.dim)
    if args.seeds < 1:
        raise SgipError("--seeds must be >= 1")
    finest_dx = min(level.bin_size for level in schedule.levels)
    ref_dx = args.ref_dx if args.ref_dx is not None else finest_dx / 4.0
    ref_dt = args.ref_dt if args.ref_dt is not None else ref_dx / 4.0
    ref_config = FdmConfig(
        dim=config.dim,
        half_width=config.half_width,
        cell_size=ref_dx,
        time_step=ref_dt,
        final_time=config.final_time,
        diffusion=config.diffusion,
        flow=config.flow,
        reaction=config.reaction,
        init=config.init,
        snapshot_every=max(1, round(config.final_time / ref_dt)),
    )
    reference = fdm_run(ref_config).final_field
    seeds = [config.seed + i for i in range(args.seeds)]
    study = convergence_study(config, schedule, seeds, reference)

    kappas, nus = schedule.kappa(), schedule.nu()
    print("level  dt        dx        N         kappa     nu          mean_l2")
    for lvl, level in enumerate(schedule.levels):
        print(
            f"{lvl:<6d} {level.time_step:<9g} {level.bin_size:<9g} "
            f"{level.particles:<9d} {kappas[lvl]:<9g} {nus[lvl]:<11.4g} "
            f"{study.level_means[lvl]:.6g}"
        )
    print(f"monotone: {'yes' if study.monotone else 'no'}")
    if args.out:
        lines = [CONVERGE_HEADER, "level,dt,dx,N,seed,l2_error"]
        for level, dt, dx, n, seed, err in study.rows:
            lines.append(f"{level},{dt!r},{dx!r},{n},{seed},{err!r}")
        with open(args.out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0


_COMMANDS = {
    "run": _cmd_run,
    "fdm": _cmd_fdm,
    "compare": _cmd_compare,
    "front": _cmd_front,
    "converge": _cmd_converge,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (SgipError, OSError, ValueError) as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
