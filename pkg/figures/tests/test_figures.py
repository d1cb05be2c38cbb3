import struct

import numpy as np
import pytest

from sgip_figures import (
    FigureJob,
    FormatError,
    JobError,
    contour_radius_ratio,
    read_series_csv,
    read_snapshot,
    render,
)
from sgip_figures.cli import main

PNG_MAGIC = b"\x89PNG"


def assert_png(path):
    data = open(path, "rb").read()
    assert data[:4] == PNG_MAGIC and len(data) > 1000


class TestFormats:
    def test_snapshot_reader(self, sim_outputs):
        snap = read_snapshot(sim_outputs["snap_2d"])
        assert snap.dim == 2
        assert snap.values.shape == (150, 150)
        assert snap.producer == "SGIP"
        assert snap.half_width == 60.0
        assert snap.time == pytest.approx(8.0)

    def test_front_series_reader(self, sim_outputs):
        series = read_series_csv(sim_outputs["front_csv"])
        assert series.shape[1] == 2
        assert series[-1, 0] == pytest.approx(5.0)

    def test_bad_file_rejected(self, tmp_path):
        bad = tmp_path / "bad.sgrd"
        bad.write_bytes(b"NOPE" + b"\x00" * 100)
        with pytest.raises(FormatError):
            read_snapshot(bad)


class TestRenderJobs:
    def test_profile_overlay(self, sim_outputs, tmp_path):
        out = tmp_path / "profile.png"
        job = FigureJob("profile", sim_outputs["profile_pair"], str(out))
        render(job)
        assert_png(out)

    def test_profile_coincident_curves(self, sim_outputs, tmp_path):
        # the same snapshot twice renders two coincident curves
        snap = sim_outputs["snaps_1d"][-1]
        out = tmp_path / "twice.png"
        render(FigureJob("profile", (snap, snap), str(out)))
        assert_png(out)

    def test_front_plot(self, sim_outputs, tmp_path):
        out = tmp_path / "front.png"
        render(FigureJob("front", (sim_outputs["front_csv"],), str(out)))
        assert_png(out)

    def test_contour2d(self, sim_outputs, tmp_path):
        out = tmp_path / "contour.png"
        render(FigureJob("contour2d", (sim_outputs["snap_2d"],), str(out),
                         levels=(0.1, 0.5, 0.9)))
        assert_png(out)

    def test_slice3d_all_planes(self, sim_outputs, tmp_path):
        for plane in ("x", "y", "z"):
            out = tmp_path / f"slice_{plane}.png"
            render(FigureJob("slice3d", (sim_outputs["snap_3d"],), str(out),
                             plane=plane))
            assert_png(out)

    def test_rendering_is_deterministic(self, sim_outputs, tmp_path):
        a = tmp_path / "a.png"
        b = tmp_path / "b.png"
        for out in (a, b):
            render(FigureJob("contour2d", (sim_outputs["snap_2d"],), str(out)))
        assert a.read_bytes() == b.read_bytes()

    def test_slice3d_rejects_2d_snapshot(self, sim_outputs, tmp_path):
        job = FigureJob("slice3d", (sim_outputs["snap_2d"],),
                        str(tmp_path / "x.png"))
        with pytest.raises(JobError):
            render(job)

    def test_dimension_mismatch_rejected(self, sim_outputs, tmp_path):
        job = FigureJob("profile",
                        (sim_outputs["snaps_1d"][-1], sim_outputs["snap_2d"]),
                        str(tmp_path / "x.png"))
        with pytest.raises(JobError):
            render(job)

    def test_contour_grid_mismatch_rejected(self, sim_outputs, tmp_path):
        # synthesize a second 2-d snapshot on a different lattice
        other = tmp_path / "other.sgrd"
        header = struct.pack("<4sIBIddB", b"SGRD", 1, 2, 10, 60.0, 0.0, 0)
        other.write_bytes(header + b"\x00" * (64 - len(header))
                          + np.zeros(100).tobytes())
        job = FigureJob("contour2d", (sim_outputs["snap_2d"], str(other)),
                        str(tmp_path / "x.png"))
        with pytest.raises(JobError):
            render(job)

    def test_unknown_kind_rejected(self, tmp_path):
        with pytest.raises(JobError):
            FigureJob("surface", ("a.sgrd",), str(tmp_path / "x.png"))


class TestCircularSymmetry:
    def test_expanding_front_is_circular(self, sim_outputs):
        # acceptance gate: the u = 0.5 contour of the 2-d logistic run stays
        # circular to within a 1.1 max/min radius ratio
        snap = read_snapshot(sim_outputs["snap_2d"])
        ratio = contour_radius_ratio(snap, 0.5)
        print(f"[acceptance] criterion 12 (contour circularity): "
              f"{'PASS' if ratio <= 1.1 else 'FAIL'} - max/min radius ratio "
              f"{ratio:.4f} (<= 1.1)")
        assert ratio <= 1.1


class TestCli:
    def test_cli_renders(self, sim_outputs, tmp_path, capsys):
        out = tmp_path / "cli.png"
        code = main(["slice3d", str(sim_outputs["snap_3d"]), "-o", str(out),
                     "--plane", "y"])
        assert code == 0
        assert_png(out)

    def test_cli_error_line(self, sim_outputs, tmp_path, capsys):
        code = main(["slice3d", str(sim_outputs["snap_2d"]),
                     "-o", str(tmp_path / "x.png")])
        assert code == 2
        assert capsys.readouterr().err.startswith("error: ")
