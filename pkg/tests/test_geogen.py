import json

import numpy as np
import pytest
from scipy.interpolate import RBFInterpolator

from gwhp import geogen
from gwhp.geogen import (GeologySpec, ControlPointSet, control_lattice,
                         sample_control_points, tps_solve, tps_evaluate,
                         tps_interpolate, permeability_field,
                         sample_pressure_gradient, realize_geology,
                         PERM_MIN_DEFAULT, PERM_MAX_DEFAULT)
from gwhp.grid import Grid, DEFAULT_GRID


class TestGeologySpec:
    def test_control_grid_size_domain(self):
        for size in (4, 6, 8):
            GeologySpec(seed=1, control_grid_size=size)
        with pytest.raises(ValueError):
            GeologySpec(seed=1, control_grid_size=5)

    def test_perm_bounds_validated(self):
        with pytest.raises(ValueError):
            GeologySpec(seed=1, perm_min=0.0)
        with pytest.raises(ValueError):
            GeologySpec(seed=1, perm_min=2e-8, perm_max=1e-8)

    def test_control_values_length_checked(self):
        GeologySpec(seed=1, control_grid_size=4, control_values=tuple([3e-9] * 16))
        with pytest.raises(ValueError):
            GeologySpec(seed=1, control_grid_size=4, control_values=(3e-9,) * 15)

    def test_json_round_trip(self):
        spec = GeologySpec(seed=42, control_grid_size=6, gradient_x=12.5, gradient_y=-3.0)
        again = GeologySpec.from_json(json.loads(json.dumps(spec.to_json())))
        assert again == spec

    def test_json_rejects_unknown_keys(self):
        doc = GeologySpec(seed=1).to_json()
        doc["permeability"] = 1.0
        with pytest.raises(ValueError):
            GeologySpec.from_json(doc)


class TestControlLattice:
    def test_half_spacing_margin(self):
        pts = control_lattice(4, DEFAULT_GRID)
        # 128 m domain, 4x4 lattice: spacing 32 m, first point at 16 m
        assert pts[0] == pytest.approx((16.0, 16.0))
        assert pts[-1] == pytest.approx((112.0, 112.0))
        assert len(pts) == 16

    def test_row_major_order(self):
        pts = control_lattice(4, DEFAULT_GRID)
        # second point advances in x, not y
        assert pts[1][0] > pts[0][0]
        assert pts[1][1] == pts[0][1]

    def test_all_points_strictly_inside(self):
        for size in (4, 6, 8):
            pts = np.asarray(control_lattice(size, DEFAULT_GRID))
            assert pts.min() > 0.0
            assert pts.max() < DEFAULT_GRID.extent_x


class TestSampling:
    def test_values_within_bounds(self):
        spec = GeologySpec(seed=11, control_grid_size=8)
        points = sample_control_points(spec)
        assert points.values.min() >= spec.perm_min
        assert points.values.max() <= spec.perm_max

    def test_seeded_determinism(self):
        a = sample_control_points(GeologySpec(seed=5, control_grid_size=6))
        b = sample_control_points(GeologySpec(seed=5, control_grid_size=6))
        np.testing.assert_array_equal(a.values, b.values)

    def test_explicit_control_values_pass_through(self):
        vals = tuple(np.linspace(3e-9, 3e-8, 16))
        spec = GeologySpec(seed=1, control_grid_size=4, control_values=vals)
        points = sample_control_points(spec)
        np.testing.assert_array_equal(points.values, np.asarray(vals))

    def test_gradient_within_limit(self):
        for seed in range(40):
            gx, gy = sample_pressure_gradient(GeologySpec(seed=seed), limit=150.0)
            assert abs(gx) <= 150.0 and abs(gy) <= 150.0

    def test_streams_are_independent(self):
        # same seed: the gradient draw must not depend on the control grid size
        g1 = sample_pressure_gradient(GeologySpec(seed=9, control_grid_size=4))
        g2 = sample_pressure_gradient(GeologySpec(seed=9, control_grid_size=8))
        assert g1 == g2

    def test_realize_geology_deterministic(self):
        a = realize_geology(123)
        b = realize_geology(123)
        assert a == b
        assert a.control_grid_size in (4, 6, 8)
        assert abs(a.gradient_x) <= geogen.GRADIENT_LIMIT_DEFAULT


class TestTps:
    """Thin-plate spline solve/evaluate against closed forms and a dense
    independent oracle."""

    def _points(self, rng, n=16):
        pos = rng.uniform(5.0, 123.0, size=(n, 2))
        vals = rng.uniform(1.0, 3.0, size=n)
        return ControlPointSet(positions=pos, values=vals)

    def test_exact_at_control_points(self):
        rng = np.random.default_rng(0)
        pts = self._points(rng)
        w, affine = tps_solve(pts)
        got = tps_evaluate(pts, w, affine, pts.positions)
        np.testing.assert_allclose(got, pts.values, rtol=1e-9)

    def test_affine_reproduction(self):
        # data from a plane: the spline must return the plane itself
        pos = np.asarray(control_lattice(4, DEFAULT_GRID))
        plane = 2.0 + 0.03 * pos[:, 0] - 0.011 * pos[:, 1]
        pts = ControlPointSet(positions=pos, values=plane)
        w, affine = tps_solve(pts)
        X, Y = DEFAULT_GRID.center_mesh()
        query = np.column_stack([X.ravel(), Y.ravel()])
        got = tps_evaluate(pts, w, affine, query)
        expect = 2.0 + 0.03 * query[:, 0] - 0.011 * query[:, 1]
        np.testing.assert_allclose(got, expect, rtol=1e-8)

    def test_matches_dense_oracle(self):
        rng = np.random.default_rng(3)
        pts = self._points(rng, n=36)
        w, affine = tps_solve(pts)
        X, Y = DEFAULT_GRID.center_mesh()
        query = np.column_stack([X.ravel(), Y.ravel()])
        ours = tps_evaluate(pts, w, affine, query)
        oracle = RBFInterpolator(pts.positions, pts.values,
                                 kernel="thin_plate_spline")(query)
        scale = np.abs(oracle).max()
        np.testing.assert_allclose(ours, oracle, atol=1e-8 * scale, rtol=1e-8)

    def test_too_few_points_rejected(self):
        pts = ControlPointSet(positions=np.array([[0.0, 0.0], [1.0, 1.0]]),
                              values=np.array([1.0, 2.0]))
        with pytest.raises(ValueError):
            tps_solve(pts)

    def test_interpolate_clamps_at_floor(self):
        # alternating extremes overshoot below the data range; the clamp floor
        # must hold everywhere
        size = 4
        vals = np.empty(16)
        vals[0::2] = 1.0
        vals[1::2] = 100.0
        pos = np.asarray(control_lattice(size, DEFAULT_GRID))
        pts = ControlPointSet(positions=pos, values=vals)
        field = tps_interpolate(pts, DEFAULT_GRID, floor=0.5)
        assert field.values.min() >= 0.5
        assert np.isfinite(field.values).all()


class TestPermeabilityField:
    def test_positive_and_in_plausible_range(self):
        spec = GeologySpec(seed=21, control_grid_size=6)
        K = permeability_field(spec)
        assert K.values.min() > 0.0
        assert K.values.min() >= spec.perm_min / 10.0
        # interpolation can overshoot, but not wildly
        assert K.values.max() < 10.0 * PERM_MAX_DEFAULT

    def test_deterministic(self):
        spec = GeologySpec(seed=8, control_grid_size=4)
        np.testing.assert_array_equal(permeability_field(spec).values,
                                      permeability_field(spec).values)

    def test_interpolates_control_values(self):
        spec = GeologySpec(seed=31, control_grid_size=4)
        pts = sample_control_points(spec)
        K = permeability_field(spec)
        # nearest grid cell to each control point should sit close to its value
        g = DEFAULT_GRID
        for (x, y), v in zip(pts.positions, pts.values):
            i = int(x / g.dx)
            j = int(y / g.dy)
            assert abs(K.values[j, i] - v) < 0.35 * (PERM_MAX_DEFAULT - PERM_MIN_DEFAULT)
