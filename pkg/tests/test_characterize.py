"""Gain fields, energy vectors, reconstruction, and data exports."""

import csv
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.polynomial import legendre as npleg

from shoviz.characterize import (
    ResponseField,
    characterize_field,
    directional_gain,
    energy_vector,
    field_to_json,
    raster_to_csv,
    re_max,
    reconstruct_operator,
    response,
    responses_over_grid,
)
from shoviz.grids import builtin_tdesign, display_tdesign, equirect_raster
from shoviz.operators import (
    Rotation3,
    SHOperator,
    compose,
    identity_op,
    identity_plus_mirror_op,
    rotation_op,
)
from shoviz.sph import Direction, dirac_excitation, n_coeffs

scale_st = st.floats(min_value=-5.0, max_value=5.0).filter(
    lambda c: abs(c) > 1e-3
)


def random_direction(rng) -> Direction:
    vec = rng.standard_normal(3)
    return Direction(vec / np.linalg.norm(vec))


class TestLocalizationBound:
    def test_matches_reference_polynomial_roots(self):
        for n in range(1, 12):
            roots = npleg.legroots([0.0] * (n + 1) + [1.0])
            assert abs(re_max(n) - roots.max()) < 1e-12

    def test_order_zero_has_no_directivity(self):
        assert re_max(0) == 0.0


class TestIdentity:
    @pytest.mark.parametrize("order", range(1, 9))
    def test_unit_gain_and_energy_vector_norm(self, order):
        op = identity_op(order)
        grid = display_tdesign()
        quad = builtin_tdesign(2 * order)
        for q in range(0, grid.q, 24):
            d = Direction(grid.points[q])
            assert abs(directional_gain(op, d) - 1.0) < 1e-10
            r = energy_vector(op, d, quad)
            assert abs(np.linalg.norm(r) - order / (order + 1)) < 1e-10
            # centroid points along the excitation direction
            assert np.abs(r / np.linalg.norm(r) - d.vec).max() < 1e-10


class TestGainProperties:
    @given(scale_st)
    def test_homogeneous_in_operator_scale(self, c):
        base = identity_op(3)
        scaled = SHOperator(3, 3, c * base.matrix)
        d = Direction.from_spherical(1.0, -0.5)
        assert abs(
            directional_gain(scaled, d) - abs(c) * directional_gain(base, d)
        ) < 1e-10

    def test_matches_response_norm(self, rng):
        op = SHOperator(3, 2, rng.standard_normal((9, 16)))
        d = random_direction(rng)
        out = response(op, d)
        assert out.order == 2
        assert abs(directional_gain(op, d) - out.norm()) < 1e-14

    def test_rotation_equivariance(self, rng):
        base = SHOperator(3, 3, rng.standard_normal((16, 16)))
        rot = Rotation3.from_axis_angle(rng.standard_normal(3), 1.3)
        pre = compose(base, rotation_op(rot, 3))
        quad = builtin_tdesign(6)
        for _ in range(4):
            d = random_direction(rng)
            rotated = Direction(rot.matrix @ d.vec)
            assert abs(
                directional_gain(pre, d) - directional_gain(base, rotated)
            ) < 1e-10
            r_pre = energy_vector(pre, d, quad)
            r_base = energy_vector(base, rotated, quad)
            assert np.abs(r_pre - r_base).max() < 1e-10

    def test_output_rotation_rotates_energy_vector(self, rng):
        base = SHOperator(3, 3, rng.standard_normal((16, 16)))
        rot = Rotation3.from_axis_angle(rng.standard_normal(3), -0.9)
        post = compose(rotation_op(rot, 3), base)
        quad = builtin_tdesign(6)
        d = random_direction(rng)
        r_post = energy_vector(post, d, quad)
        r_base = energy_vector(base, d, quad)
        assert np.abs(r_post - rot.matrix @ r_base).max() < 1e-10


class TestEnergyVector:
    def test_bounded_by_order_limit(self, rng):
        quad = builtin_tdesign(6)
        bound = re_max(3) + 1e-12
        for _ in range(40):
            op = SHOperator(3, 3, rng.standard_normal((16, 16)))
            d = random_direction(rng)
            assert np.linalg.norm(energy_vector(op, d, quad)) <= bound

    def test_antipodal_superposition_is_undefined(self):
        op = identity_plus_mirror_op(4)
        quad = builtin_tdesign(8)
        for d in (Direction.from_spherical(0.3, 1.0),
                  Direction.from_spherical(2.0, -2.5)):
            assert np.linalg.norm(energy_vector(op, d, quad)) < 1e-10

    def test_requires_exact_quadrature(self):
        op = identity_op(4)
        with pytest.raises(ValueError):
            energy_vector(op, Direction.from_spherical(1.0, 0.0),
                          builtin_tdesign(4))


class TestReconstruction:
    def test_round_trip_square(self, rng):
        op = SHOperator(4, 4, rng.standard_normal((25, 25)))
        grid = builtin_tdesign(8)
        rebuilt = reconstruct_operator(responses_over_grid(op, grid), grid, 4)
        err = np.linalg.norm(rebuilt.matrix - op.matrix)
        assert err / np.linalg.norm(op.matrix) < 1e-12

    def test_round_trip_rectangular(self, rng):
        op = SHOperator(3, 5, rng.standard_normal((36, 16)))
        grid = builtin_tdesign(6)
        rebuilt = reconstruct_operator(responses_over_grid(op, grid), grid, 3)
        assert rebuilt.n_out == 5
        err = np.linalg.norm(rebuilt.matrix - op.matrix)
        assert err / np.linalg.norm(op.matrix) < 1e-12

    def test_grid_degree_must_cover_input_order(self, rng):
        op = SHOperator(4, 4, rng.standard_normal((25, 25)))
        grid = builtin_tdesign(6)
        with pytest.raises(ValueError):
            reconstruct_operator(responses_over_grid(op, grid), grid, 4)


class TestFieldAssembly:
    def test_default_shapes(self):
        field = characterize_field(identity_op(2))
        assert field.display_grid.q == 144
        assert field.eta.shape == (144,)
        assert field.re_vec.shape == (144, 3)
        assert field.raster_eta.shape == (field.raster_grid.q,)
        assert field.raster_grid.q == 180 * 90
        assert field.re_bound == pytest.approx(re_max(2))
        assert field.re_reference == pytest.approx(2.0 / 3.0)

    def test_undefined_directions_have_zero_unit_vector(self):
        field = characterize_field(identity_plus_mirror_op(3))
        assert not field.re_defined.any()
        assert np.all(field.re_unit == 0.0)

    def test_thread_count_does_not_change_results(self):
        op = identity_plus_mirror_op(3)
        one = characterize_field(op, threads=1)
        four = characterize_field(op, threads=4)
        assert np.array_equal(one.eta, four.eta)
        assert np.array_equal(one.re_vec, four.re_vec)
        assert np.array_equal(one.raster_eta, four.raster_eta)

    def test_rejects_insufficient_quad_grid(self):
        with pytest.raises(ValueError):
            characterize_field(identity_op(4), quad_grid=builtin_tdesign(4))


class TestExports:
    def test_raster_csv_layout(self, tmp_path):
        field = characterize_field(identity_op(1), raster=equirect_raster(30.0))
        path = tmp_path / "gain.csv"
        raster_to_csv(field, path)
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["theta_deg", "phi_deg", "eta"]
        assert len(rows) == 1 + 12 * 6
        assert float(rows[1][2]) == pytest.approx(1.0, abs=1e-12)

    def test_field_json_layout(self, tmp_path):
        field = characterize_field(identity_op(1), raster=equirect_raster(30.0))
        path = tmp_path / "field.json"
        field_to_json(field, path)
        payload = json.loads(path.read_text())
        assert payload["n_in"] == 1 and payload["n_out"] == 1
        assert len(payload["display_points"]) == 144
        assert len(payload["eta"]) == 144
        assert len(payload["re_vec"]) == 144
        assert payload["re_bound"] == pytest.approx(re_max(1))
        first = payload["display_points"][0]
        assert set(first) == {"theta_rad", "phi_rad"}
