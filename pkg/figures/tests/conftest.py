"""Test inputs are produced by driving the simulator's CLI, the same way any
external tool would; this package never imports the simulator.
"""

import subprocess
import sys

import pytest

SGIP_1D = """
dim = 1
L = 60
M = 150
N = 20000
dt = 0.5
T = 5
D = 1
flow = zero
reaction = fkpp
scheme = closed_form
init = interval:0,1
seed = 3
"""

FDM_1D = """
dim = 1
L = 60
dx = 0.1
dt = 0.1
T = 5
D = 1
flow = zero
reaction = fkpp
init = interval:0,1
snapshot_every = 10
"""

SGIP_2D = """
dim = 2
L = 60
M = 150
N = 400000
dt = 0.5
T = 8
D = 1
flow = zero
reaction = fkpp
scheme = closed_form
init = box:0,1,0,1
seed = 1
snapshot_every = 16
"""

SGIP_3D = """
dim = 3
L = 60
M = 30
N = 50000
dt = 0.5
T = 2
D = 1
flow = abc
reaction = fkpp
scheme = closed_form
init = ball:0,0,0,2
seed = 1
snapshot_every = 4
"""


def run_cli(*args):
    proc = subprocess.run(
        [sys.executable, "-m", "sgip.cli", *args],
        capture_output=True, text=True, timeout=600,
    )
    assert proc.returncode == 0, f"sgip {' '.join(args)} failed: {proc.stderr}"
    return proc.stdout


def simulate(tmp, name, config_text, command):
    config = tmp / f"{name}.cfg"
    config.write_text(config_text)
    out = tmp / name
    run_cli(command, str(config), "--out", str(out))
    snaps = sorted(out.glob("snapshot_*.sgrd"))
    assert snaps, f"no snapshots written for {name}"
    return out, snaps


@pytest.fixture(scope="session")
def sim_outputs(tmp_path_factory):
    """Snapshot/CSV inputs for every figure kind, generated once."""
    tmp = tmp_path_factory.mktemp("sim")
    out_1d, snaps_1d = simulate(tmp, "sgip1d", SGIP_1D, "run")
    ref_1d, ref_snaps = simulate(tmp, "fdm1d", FDM_1D, "fdm")
    out_2d, snaps_2d = simulate(tmp, "sgip2d", SGIP_2D, "run")
    out_3d, snaps_3d = simulate(tmp, "sgip3d", SGIP_3D, "run")
    front_csv = tmp / "front_1d.csv"
    front_csv.write_text(run_cli("front", str(out_1d), "--threshold", "0.2"))
    return {
        "profile_pair": (snaps_1d[-1], ref_snaps[-1]),
        "snaps_1d": snaps_1d,
        "front_csv": front_csv,
        "snap_2d": snaps_2d[-1],
        "snap_3d": snaps_3d[-1],
        "tmp": tmp,
    }
