import numpy as np
import pytest

from gwhp.grid import Grid, ScalarField, VectorField, DEFAULT_GRID
from gwhp import grid as grid_mod


class TestGrid:
    def test_defaults(self):
        g = DEFAULT_GRID
        assert (g.nx, g.ny) == (64, 64)
        assert g.extent_x == 128.0 and g.extent_y == 128.0
        assert g.cell_volume == 2.0 * 2.0 * 1.0

    def test_cell_center_is_midpoint(self):
        g = Grid(nx=4, ny=3, dx=2.0, dy=4.0)
        assert g.cell_center(0, 0) == (1.0, 2.0)
        assert g.cell_center(3, 2) == (7.0, 10.0)

    def test_cell_center_bounds(self):
        g = Grid(nx=4, ny=3)
        with pytest.raises(IndexError):
            g.cell_center(4, 0)
        with pytest.raises(IndexError):
            g.cell_center(0, -1)

    def test_center_cell_even_and_odd(self):
        assert Grid(nx=64, ny=64).center_cell_index() == (32, 32)
        g = Grid(nx=63, ny=63)
        assert g.center_cell_index() == (31, 31)
        # odd grid: the center cell midpoint is the exact domain center
        cx, cy = g.cell_center(31, 31)
        assert cx == g.extent_x / 2 and cy == g.extent_y / 2

    def test_flat_index_round_trip(self):
        g = Grid(nx=5, ny=7)
        for i in (0, 2, 4):
            for j in (0, 3, 6):
                assert g.cell_of_flat(g.flat_index(i, j)) == (i, j)

    def test_validation(self):
        with pytest.raises(ValueError):
            Grid(nx=0)
        with pytest.raises(ValueError):
            Grid(dx=-1.0)
        with pytest.raises(ValueError):
            Grid(thickness=0.0)

    def test_module_level_ops_match_methods(self):
        g = Grid(nx=9, ny=9)
        assert grid_mod.cell_center(g, 4, 4) == g.cell_center(4, 4)
        assert grid_mod.center_cell_index(g) == g.center_cell_index()


class TestFields:
    def test_scalar_accepts_flat_and_2d(self):
        g = Grid(nx=3, ny=2)
        flat = np.arange(6, dtype=float)
        f = ScalarField(g, flat)
        assert f.values.shape == (2, 3)
        assert f.at(2, 1) == 5.0
        np.testing.assert_array_equal(f.flat, flat)

    def test_scalar_rejects_bad_shape_and_nonfinite(self):
        g = Grid(nx=3, ny=2)
        with pytest.raises(ValueError):
            ScalarField(g, np.zeros((3, 2)))
        bad = np.zeros((2, 3))
        bad[0, 0] = np.nan
        with pytest.raises(ValueError):
            ScalarField(g, bad)

    def test_with_values_keeps_grid_and_unit(self):
        g = Grid(nx=3, ny=3)
        f = ScalarField(g, np.zeros((3, 3)), unit="Pa")
        f2 = f.with_values(np.ones((3, 3)))
        assert f2.unit == "Pa" and f2.grid == g
        assert f2.values.sum() == 9.0

    def test_vector_magnitude(self):
        g = Grid(nx=2, ny=2)
        v = VectorField(g, np.full((2, 2), 3.0), np.full((2, 2), 4.0))
        np.testing.assert_allclose(v.magnitude(), 5.0)
        assert v.at(0, 0) == (3.0, 4.0)

    def test_center_mesh_matches_cell_centers(self):
        g = Grid(nx=4, ny=3, dx=1.5, dy=2.5)
        X, Y = g.center_mesh()
        assert X.shape == (3, 4)
        assert (X[2, 1], Y[2, 1]) == g.cell_center(1, 2)
