"""Operator constructors: structural, rotation, warp, noise reduction, files."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shoviz.grids import builtin_tdesign
from shoviz.operators import (
    ConvergenceError,
    Rotation3,
    SceneSource,
    SHOperator,
    SourceScene,
    apply,
    compose,
    identity_op,
    identity_plus_mirror_op,
    mirror_op,
    nr_dp_op,
    nr_pm_op,
    op_from_file,
    op_from_json,
    op_to_file,
    op_to_json,
    rotation_op,
    rotation_op_oracle,
    scene_covariances,
    scene_from_file,
    scene_preset,
    scene_to_file,
    three_source_scene,
    warp_f,
    warp_f_inv,
    warp_g,
    warp_op,
)
from shoviz.sph import Direction, SHVector, dirac_excitation, n_coeffs

axis_st = st.tuples(
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=-1.0, max_value=1.0),
    st.floats(min_value=0.1, max_value=1.0),
)
angle_st = st.floats(min_value=-math.pi, max_value=math.pi)


def random_direction(rng) -> Direction:
    vec = rng.standard_normal(3)
    return Direction(vec / np.linalg.norm(vec))


class TestStructuralOperators:
    def test_identity_matrix(self):
        op = identity_op(3)
        assert np.array_equal(op.matrix, np.eye(16))

    def test_mirror_is_involution(self):
        op = mirror_op(4)
        assert np.array_equal(compose(op, op).matrix, np.eye(25))

    def test_mirror_reflects_impulse(self, rng):
        d = random_direction(rng)
        out = apply(mirror_op(4), dirac_excitation(d, 4))
        expected = dirac_excitation(Direction(-d.vec), 4)
        assert np.abs(out.coeffs - expected.coeffs).max() < 1e-12

    def test_superposition_doubles_on_second_application(self):
        op = identity_plus_mirror_op(4)
        assert np.abs(compose(op, op).matrix - 2.0 * op.matrix).max() < 1e-15

    def test_operator_validation(self):
        with pytest.raises(ValueError):
            SHOperator(2, 2, np.zeros((9, 8)))
        with pytest.raises(ValueError):
            SHOperator(1, 1, np.full((4, 4), np.nan))

    def test_matrix_is_immutable(self):
        op = identity_op(2)
        with pytest.raises(ValueError):
            op.matrix[0, 0] = 7.0

    def test_apply_checks_order(self):
        with pytest.raises(ValueError):
            apply(identity_op(2), SHVector(3, np.zeros(16)))

    def test_compose_checks_orders(self):
        with pytest.raises(ValueError):
            compose(identity_op(2), identity_op(3))


class TestRotation3:
    def test_axis_angle_matches_z_rotation(self):
        rot = Rotation3.from_axis_angle((0, 0, 1), math.pi / 2)
        assert np.allclose(rot.matrix @ [1, 0, 0], [0, 1, 0], atol=1e-15)

    def test_rejects_non_orthogonal(self):
        with pytest.raises(ValueError):
            Rotation3(np.eye(3) * 2.0)

    def test_rejects_reflections(self):
        with pytest.raises(ValueError):
            Rotation3(np.diag([1.0, 1.0, -1.0]))

    def test_rejects_zero_axis(self):
        with pytest.raises(ValueError):
            Rotation3.from_axis_angle((0, 0, 0), 1.0)

    @given(axis_st, angle_st)
    def test_axis_angle_always_proper(self, axis, angle):
        rot = Rotation3.from_axis_angle(axis, angle)
        assert np.abs(rot.matrix.T @ rot.matrix - np.eye(3)).max() < 1e-12
        assert abs(np.linalg.det(rot.matrix) - 1.0) < 1e-12

    def test_inverse_matrix(self):
        rot = Rotation3.from_axis_angle((1, 2, 3), 0.7)
        assert np.abs(rot.matrix @ rot.inverse_matrix - np.eye(3)).max() < 1e-15


class TestRotationOperator:
    def test_is_orthogonal(self):
        rot = Rotation3.from_axis_angle((1, 1, 1), math.radians(60))
        op = rotation_op(rot, 4)
        assert np.abs(op.matrix.T @ op.matrix - np.eye(25)).max() < 1e-12

    def test_block_diagonal_per_order(self):
        rot = Rotation3.from_axis_angle((2, -1, 0.5), 1.1)
        op = rotation_op(rot, 3)
        n = np.repeat(np.arange(4), 2 * np.arange(4) + 1)
        off_block = op.matrix[n[:, None] != n[None, :]]
        assert np.abs(off_block).max() < 1e-15

    def test_matches_quadrature_reference(self, rng):
        grid = builtin_tdesign(8)
        for _ in range(5):
            vec = rng.standard_normal(3)
            rot = Rotation3.from_axis_angle(vec, rng.uniform(-math.pi, math.pi))
            fast = rotation_op(rot, 4)
            slow = rotation_op_oracle(rot, 4, grid)
            assert np.abs(fast.matrix - slow.matrix).max() < 1e-12

    def test_composition_homomorphism(self, rng):
        r1 = Rotation3.from_axis_angle(rng.standard_normal(3), 0.9)
        r2 = Rotation3.from_axis_angle(rng.standard_normal(3), -1.7)
        combined = Rotation3(r1.matrix @ r2.matrix)
        direct = rotation_op(combined, 3)
        composed = compose(rotation_op(r1, 3), rotation_op(r2, 3))
        assert np.abs(direct.matrix - composed.matrix).max() < 1e-12

    def test_steers_impulse_to_rotated_direction(self, rng):
        rot = Rotation3.from_axis_angle(rng.standard_normal(3), 0.8)
        op = rotation_op(rot, 4)
        d = random_direction(rng)
        out = apply(op, dirac_excitation(d, 4))
        expected = dirac_excitation(Direction(rot.matrix @ d.vec), 4)
        assert np.abs(out.coeffs - expected.coeffs).max() < 1e-12

    def test_oracle_requires_exact_grid(self):
        rot = Rotation3.from_axis_angle((0, 0, 1), 0.5)
        with pytest.raises(ValueError):
            rotation_op_oracle(rot, 4, builtin_tdesign(5))


class TestWarpMap:
    def test_zero_alpha_is_identity_map(self, rng):
        # arccos(cos(theta)) round-trip noise grows near the poles
        thetas = rng.uniform(0, math.pi, 32)
        assert np.abs(warp_f(thetas, 0.0) - thetas).max() < 1e-12
        assert np.abs(warp_g(thetas, 0.0) - 1.0).max() < 1e-15

    def test_poles_are_fixed_points(self):
        for alpha in (-0.7, 0.3, 0.9):
            assert warp_f(0.0, alpha) == 0.0
            assert abs(warp_f(math.pi, alpha) - math.pi) < 1e-12

    def test_inverse_round_trip(self, rng):
        thetas = rng.uniform(0, math.pi, 64)
        for alpha in (-0.6, 0.25, 0.8):
            back = warp_f_inv(warp_f(thetas, alpha), alpha)
            assert np.abs(back - thetas).max() < 1e-10

    def test_monotone(self, rng):
        thetas = np.sort(rng.uniform(0, math.pi, 64))
        warped = warp_f(thetas, 0.8)
        assert np.all(np.diff(warped) > 0)

    def test_gain_is_positive(self, rng):
        thetas = rng.uniform(0, math.pi, 64)
        assert np.all(warp_g(thetas, 0.8) > 0)

    def test_alpha_domain(self):
        for alpha in (1.0, -1.0, 1.5, np.nan):
            with pytest.raises(ValueError):
                warp_f(0.5, alpha)


class TestWarpOperator:
    def test_zero_alpha_gives_identity(self):
        op = warp_op(0.0, 3, 3)
        assert np.abs(op.matrix - np.eye(16)).max() < 1e-12

    def test_convergence_metadata(self):
        op = warp_op(0.8, 4, 4)
        assert op.meta["alpha"] == 0.8
        assert op.meta["quadrature_residual"] < 1e-9

    def test_round_trip_for_gentle_warps(self):
        # composing with the opposite warp recovers identity up to the
        # band-limit leakage, which grows quadratically with alpha
        alpha = 0.04
        forward = warp_op(alpha, 4, 4)
        backward = warp_op(-alpha, 4, 4)
        err = np.linalg.norm(compose(backward, forward).matrix - np.eye(25))
        assert err < 3e-2

    def test_explicit_design_grid_path(self):
        grid = builtin_tdesign(21)
        op = warp_op(0.3, 4, 4, grid=grid)
        default = warp_op(0.3, 4, 4)
        assert np.abs(op.matrix - default.matrix).max() < 1e-9
        assert op.meta["quadrature_residual"] < 1e-6

    def test_explicit_grid_rejects_low_degree(self):
        with pytest.raises(ValueError):
            warp_op(0.3, 4, 4, grid=builtin_tdesign(7))

    def test_strong_warp_exceeds_design_grid_resolution(self):
        # the integrand's spectrum decays like alpha**degree, so the
        # deepest embedded design cannot certify alpha=0.8 at 1e-6
        with pytest.raises(ConvergenceError):
            warp_op(0.8, 4, 4, grid=builtin_tdesign(21))

    def test_rectangular_orders(self):
        op = warp_op(0.5, 4, 2)
        assert op.matrix.shape == (9, 25)


class TestNoiseReduction:
    def test_scene_validation(self):
        with pytest.raises(ValueError):
            SceneSource(-1.0, 0.5, 0.5)
        with pytest.raises(ValueError):
            SourceScene(sources=(), snr_db=0.0, mu=1.0)
        with pytest.raises(ValueError):
            SourceScene(
                sources=(SceneSource(1.0, 0.5, 0.5),), snr_db=0.0, mu=0.0
            )

    def test_preset_lookup(self):
        scene = scene_preset("table2", snr_db=0.0, mu=1.0)
        assert len(scene.sources) == 3
        with pytest.raises(ValueError):
            scene_preset("unknown")

    def test_covariance_shapes_and_noise_level(self):
        scene = three_source_scene(snr_db=0.0, mu=1.0)
        phi_d, phi_nu = scene_covariances(scene, 4)
        assert phi_d.shape == phi_nu.shape == (25, 25)
        # 0 dB: noise trace equals signal trace
        assert abs(np.trace(phi_nu) - np.trace(phi_d)) < 1e-12
        assert np.abs(phi_d - phi_d.T).max() < 1e-15

    @pytest.mark.parametrize("builder", [nr_dp_op, nr_pm_op])
    def test_symmetric_contraction(self, builder):
        op = builder(three_source_scene(), 4)
        mat = op.matrix
        assert np.abs(mat - mat.T).max() < 1e-12
        eigs = np.linalg.eigvalsh(mat)
        assert eigs.min() > -1e-10
        assert eigs.max() < 1.0 + 1e-9

    def test_projection_variant_has_source_count_rank(self):
        op = nr_pm_op(three_source_scene(), 4)
        singulars = np.linalg.svd(op.matrix, compute_uv=False)
        assert int((singulars > 1e-8 * singulars[0]).sum()) == 3

    def test_less_regularization_attenuates_less(self):
        gentle = nr_dp_op(three_source_scene(mu=0.1), 4)
        strong = nr_dp_op(three_source_scene(mu=10.0), 4)
        norm = lambda op: np.linalg.svd(op.matrix, compute_uv=False)[0]
        assert norm(gentle) > norm(strong)

    def test_quadrature_convergence_metadata(self):
        op = nr_dp_op(three_source_scene(), 3)
        assert op.meta["quadrature_residual"] < 1e-9


class TestSerialization:
    def test_operator_round_trip_is_exact(self, rng, tmp_path):
        op = SHOperator(3, 2, rng.standard_normal((9, 16)))
        path = tmp_path / "op.json"
        op_to_file(op, path)
        loaded = op_from_file(path)
        assert loaded.n_in == 3 and loaded.n_out == 2
        assert np.array_equal(loaded.matrix, op.matrix)

    def test_json_text_round_trip(self, rng):
        op = SHOperator(2, 2, rng.standard_normal((9, 9)))
        assert np.array_equal(op_from_json(op_to_json(op)).matrix, op.matrix)

    def test_rejects_wrong_version(self, tmp_path):
        path = tmp_path / "op.json"
        payload = json.loads(op_to_json(identity_op(1)))
        payload["version"] = 99
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError):
            op_from_file(path)

    def test_rejects_shape_mismatch(self, tmp_path):
        path = tmp_path / "op.json"
        payload = json.loads(op_to_json(identity_op(1)))
        payload["n_out"] = 2
        path.write_text(json.dumps(payload))
        with pytest.raises(ValueError):
            op_from_file(path)

    def test_scene_round_trip(self, tmp_path):
        scene = three_source_scene(snr_db=-3.0, mu=2.5)
        path = tmp_path / "scene.json"
        scene_to_file(scene, path)
        loaded = scene_from_file(path)
        assert loaded == scene

    def test_missing_operator_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            op_from_file(tmp_path / "absent.json")


class TestCompose:
    def test_rotation_inverse_composes_to_identity(self):
        rot = Rotation3.from_axis_angle((1, -2, 0.3), 1.2)
        forward = rotation_op(rot, 3)
        backward = rotation_op(Rotation3(rot.inverse_matrix), 3)
        assert np.abs(compose(backward, forward).matrix - np.eye(16)).max() < 1e-12

    def test_rectangular_chain(self, rng):
        a = SHOperator(4, 2, rng.standard_normal((9, 25)))
        b = SHOperator(2, 3, rng.standard_normal((16, 9)))
        chained = compose(b, a)
        assert chained.n_in == 4 and chained.n_out == 3
        assert chained.matrix.shape == (n_coeffs(3), n_coeffs(4))
