import json
import os

import pytest

from sgip.cli import main
from sgip.io import read_snapshot

RUN_CONFIG = """
dim = 1
L = 60
M = 150
N = 5000
dt = 0.5
T = 2
D = 1
flow = zero
reaction = fkpp
scheme = closed_form
init = interval:0,1
seed = 3
"""

FDM_CONFIG = """
dim = 1
L = 60
dx = 0.1
dt = 0.1
T = 2
D = 1
flow = zero
reaction = fkpp
init = interval:0,1
snapshot_every = 10
"""


@pytest.fixture
def run_dir(tmp_path):
    config = tmp_path / "run.cfg"
    config.write_text(RUN_CONFIG)
    out = tmp_path / "out"
    assert main(["run", str(config), "--out", str(out)]) == 0
    return out


class TestRunCommand:
    def test_outputs_and_manifest(self, run_dir):
        snaps = sorted(p for p in os.listdir(run_dir) if p.endswith(".sgrd"))
        assert len(snaps) == 5  # steps 0..4
        manifest = json.loads((run_dir / "manifest.json").read_text())
        assert manifest["status"] == "completed"
        assert manifest["producer"] == "SGIP"
        assert manifest["snapshots"] == snaps
        assert (run_dir / "diagnostics.csv").exists()

    def test_cubic_run_emits_41_snapshots_over_t20(self, tmp_path):
        # the 1-d cubic-reaction benchmark: T = 20 at dt = 0.5 means 40
        # steps, so snapshot_every = 1 yields the initial field plus 40 more
        config = tmp_path / "run.cfg"
        config.write_text(
            RUN_CONFIG.replace("T = 2", "T = 20")
            .replace("N = 5000", "N = 2000")
            .replace("reaction = fkpp", "reaction = cubic")
            .replace("scheme = closed_form", "scheme = backward_euler")
        )
        out = tmp_path / "long"
        assert main(["run", str(config), "--out", str(out)]) == 0
        snaps = [p for p in os.listdir(out) if p.endswith(".sgrd")]
        assert len(snaps) == 41

    def test_missing_output_dir_is_an_error(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text(RUN_CONFIG)
        assert main(["run", str(config)]) == 2
        assert capsys.readouterr().err.startswith("error: ")

    def test_config_error_exit_code(self, tmp_path, capsys):
        config = tmp_path / "broken.cfg"
        config.write_text(RUN_CONFIG.replace("dt = 0.5\n", ""))
        assert main(["run", str(config), "--out", str(tmp_path / "x")]) == 2
        err = capsys.readouterr().err
        assert err.startswith("error: ") and "dt" in err


class TestFdmCommand:
    def test_fdm_run(self, tmp_path):
        config = tmp_path / "fdm.cfg"
        config.write_text(FDM_CONFIG)
        out = tmp_path / "ref"
        assert main(["fdm", str(config), "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["producer"] == "FDM"
        field, producer = read_snapshot(out / manifest["snapshots"][-1])
        assert producer == "FDM"
        assert field.time == pytest.approx(2.0)


class TestCompareCommand:
    def test_self_compare_is_zero(self, run_dir, capsys):
        snap = sorted(run_dir.glob("*.sgrd"))[0]
        assert main(["compare", str(snap), str(snap)]) == 0
        assert float(capsys.readouterr().out.strip()) == 0.0

    def test_cross_resolution_compare(self, run_dir, tmp_path, capsys):
        config = tmp_path / "fdm.cfg"
        config.write_text(FDM_CONFIG)
        out = tmp_path / "ref"
        main(["fdm", str(config), "--out", str(out)])
        a = sorted(run_dir.glob("*.sgrd"))[-1]
        b = sorted(out.glob("*.sgrd"))[-1]
        assert main(["compare", str(a), str(b)]) == 0
        val = float(capsys.readouterr().out.strip().splitlines()[-1])
        assert 0.0 < val < 5.0


class TestFrontCommand:
    def test_series_from_run_dir(self, run_dir, capsys):
        assert main(["front", str(run_dir), "--threshold", "0.2"]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert out[0] == "# sgip-front v1"
        assert out[1] == "t,front_x"
        assert len(out) == 2 + 5

    def test_bad_threshold_rejected(self, run_dir, capsys):
        assert main(["front", str(run_dir), "--threshold", "1.5"]) == 2
        assert "error:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        assert main(["front", str(tmp_path / "nope.sgrd")]) == 2


class TestConvergeCommand:
    def test_two_level_study(self, tmp_path, capsys):
        config = tmp_path / "conv.cfg"
        config.write_text(
            RUN_CONFIG.replace("T = 2", "T = 1").replace("N = 5000", "N = 4000")
        )
        schedule = tmp_path / "schedule.txt"
        schedule.write_text("0.5 0.8 4000\n0.25 0.4 32000\n")
        table = tmp_path / "table.csv"
        code = main([
            "converge", str(config), "--schedule", str(schedule), "--seeds", "2",
            "--ref-dx", "0.1", "--ref-dt", "0.025", "--out", str(table),
        ])
        assert code == 0
        printed = capsys.readouterr().out
        assert "mean_l2" in printed and "monotone" in printed
        lines = table.read_text().strip().splitlines()
        assert lines[0] == "# sgip-converge v1"
        assert lines[1] == "level,dt,dx,N,seed,l2_error"
        assert len(lines) == 2 + 2 * 2  # two levels x two seeds
