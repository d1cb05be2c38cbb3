import numpy as np
import pytest

from sgip.core import (
    DensityField,
    GridSpec,
    ParticleEnsemble,
    bin_center,
    bin_index,
    bin_lower_corner,
    field_total_mass,
)

from conftest import make_field


class TestGridSpec:
    def test_bin_size_is_derived(self):
        grid = GridSpec(1, 60.0, 150)
        assert grid.bin_size == pytest.approx(0.8, abs=1e-15)
        assert grid.bin_size * grid.bins_per_dim == pytest.approx(120.0, abs=1e-12)

    def test_rejects_bad_parameters(self):
        with pytest.raises(ValueError):
            GridSpec(4, 1.0, 10)
        with pytest.raises(ValueError):
            GridSpec(1, -1.0, 10)
        with pytest.raises(ValueError):
            GridSpec(2, 1.0, 1)

    def test_rejects_unaddressable_grids(self):
        with pytest.raises(ValueError):
            GridSpec(3, 1.0, 2000)  # 8e9 bins

    def test_shapes(self):
        grid = GridSpec(3, 1.0, 4)
        assert grid.total_bins == 64
        assert grid.shape == (4, 4, 4)


class TestBinIndex:
    def test_lower_corner_maps_to_bin_zero(self, grid_1d):
        assert bin_index(np.array([-60.0]), grid_1d) == 0

    def test_origin_maps_to_bin_75(self, grid_1d):
        # floor((0 + 60) / 0.8) = 75 in exact arithmetic
        assert bin_index(np.array([0.0]), grid_1d) == 75

    def test_upper_boundary_clamps_to_last_bin(self, grid_1d):
        assert bin_index(np.array([60.0]), grid_1d) == 149

    def test_non_finite_coordinate_rejected(self, grid_1d):
        with pytest.raises(ValueError):
            bin_index(np.array([np.nan]), grid_1d)

    def test_row_major_order_in_3d(self):
        grid = GridSpec(3, 1.0, 4)
        # axis 0 slowest: incrementing z moves by 1, y by 4, x by 16
        base = bin_index(np.array([-0.9, -0.9, -0.9]), grid)
        assert bin_index(np.array([-0.9, -0.9, -0.4]), grid) == base + 1
        assert bin_index(np.array([-0.9, -0.4, -0.9]), grid) == base + 4
        assert bin_index(np.array([-0.4, -0.9, -0.9]), grid) == base + 16

    def test_partition_property(self, rng):
        # every sampled point lands in exactly one valid bin
        grid = GridSpec(2, 3.0, 7)
        pts = rng.uniform(-3.0, 3.0, size=(5000, 2))
        idx = bin_index(pts, grid)
        assert idx.min() >= 0 and idx.max() < grid.total_bins
        centers = bin_center(idx, grid)
        assert np.all(np.abs(pts - centers) <= grid.bin_size / 2 + 1e-12)


class TestBinCenter:
    def test_first_bin_center(self, grid_1d):
        assert bin_center(0, grid_1d)[0] == pytest.approx(-59.6, abs=1e-12)

    def test_bin_75_center(self, grid_1d):
        # -60 + 75.5 * 0.8
        assert bin_center(75, grid_1d)[0] == pytest.approx(0.4, abs=1e-12)

    def test_round_trip_all_bins(self):
        for grid in (GridSpec(1, 5.0, 10), GridSpec(2, 2.5, 9), GridSpec(3, 1.0, 5)):
            idx = np.arange(grid.total_bins)
            assert np.array_equal(bin_index(bin_center(idx, grid), grid), idx)

    def test_out_of_range_rejected(self, grid_1d):
        with pytest.raises(ValueError):
            bin_center(150, grid_1d)
        with pytest.raises(ValueError):
            bin_center(-1, grid_1d)

    def test_lower_corner(self, grid_1d):
        corner = bin_lower_corner(0, grid_1d)
        assert corner[0] == pytest.approx(-60.0, abs=1e-12)


class TestFieldTotalMass:
    def test_zero_field(self, grid_1d):
        assert field_total_mass(make_field(grid_1d, np.zeros(150))) == 0.0

    def test_uniform_field_in_each_dim(self):
        # integral of u = 1 over [-60, 60]^d is 120^d
        for dim, m in ((1, 150), (2, 40), (3, 12)):
            grid = GridSpec(dim, 60.0, m)
            field = make_field(grid, np.ones(grid.total_bins))
            assert field_total_mass(field) == pytest.approx(120.0**dim, rel=1e-12)

    def test_single_bin(self, grid_1d):
        values = np.zeros(150)
        values[10] = 1.25
        assert field_total_mass(make_field(grid_1d, values)) == pytest.approx(1.0, rel=1e-14)

    def test_linearity(self, grid_1d, rng):
        values = rng.random(150)
        f1 = make_field(grid_1d, values)
        f3 = make_field(grid_1d, 3.0 * values)
        assert field_total_mass(f3) == pytest.approx(3.0 * field_total_mass(f1), rel=1e-13)


class TestDensityField:
    def test_rejects_negative_values(self, grid_1d):
        values = np.zeros(150)
        values[0] = -1e-6
        with pytest.raises(ValueError):
            make_field(grid_1d, values)

    def test_rejects_wrong_length(self, grid_1d):
        with pytest.raises(ValueError):
            make_field(grid_1d, np.zeros(149))

    def test_reshaped_view(self):
        grid = GridSpec(2, 1.0, 3)
        field = make_field(grid, np.arange(9, dtype=float))
        assert field.reshaped().shape == (3, 3)
        assert field.reshaped()[1, 2] == 5.0


class TestParticleEnsemble:
    def test_total_mass_identity(self):
        ens = ParticleEnsemble(np.zeros((1000, 2)), 0.25)
        assert ens.total_mass == pytest.approx(250.0, rel=1e-15)
        assert ens.n == 1000 and ens.dim == 2

    def test_rejects_bad_shapes(self):
        with pytest.raises(ValueError):
            ParticleEnsemble(np.zeros((10,)), 1.0)
        with pytest.raises(ValueError):
            ParticleEnsemble(np.zeros((0, 1)), 1.0)
        with pytest.raises(ValueError):
            ParticleEnsemble(np.zeros((10, 1)), -1.0)
