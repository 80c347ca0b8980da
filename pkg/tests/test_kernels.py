"""Kernel, lattice, and featurization tests."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from bdfield import (
    CapacityError,
    InvalidArgumentError,
    KernelSpec,
    build_grid,
    featurize,
    featurize_sparse,
    kernel_matrix,
    se_kernel,
)
from bdfield.kernels import lattice_axis, lattice_count

coords = st.floats(-5.0, 5.0, allow_nan=False, allow_infinity=False)
gammas = st.floats(0.01, 200.0, allow_nan=False, allow_infinity=False)
point3 = st.tuples(coords, coords, coords)


class TestKernelSpec:
    def test_isotropic(self):
        spec = KernelSpec.isotropic(10.0)
        assert spec.gammas == (10.0, 10.0, 10.0)
        assert spec.is_isotropic

    def test_anisotropic_flag(self):
        assert not KernelSpec((100.0, 0.1, 0.1)).is_isotropic

    @pytest.mark.parametrize("bad", [(0.0, 1, 1), (-1, 1, 1), (float("nan"), 1, 1), (float("inf"), 1, 1)])
    def test_rejects_nonpositive(self, bad):
        with pytest.raises(InvalidArgumentError):
            KernelSpec(bad)

    def test_rejects_wrong_arity(self):
        with pytest.raises(InvalidArgumentError):
            KernelSpec((1.0, 2.0))


class TestSeKernel:
    def test_self_similarity_is_one(self):
        a = np.array([0.3, -1.2, 4.0])
        assert se_kernel(a, a, KernelSpec.isotropic(7.0)) == 1.0

    def test_unit_gamma_unit_offsets(self):
        # unit displacement on each axis with unit gammas
        value = se_kernel((0, 0, 0), (1, 1, 1), KernelSpec((1.0, 1.0, 1.0)))
        assert_allclose(value, math.exp(-3.0), rtol=1e-15)

    def test_per_axis_bandwidths(self):
        spec = KernelSpec((100.0, 0.1, 0.1))
        along_x = se_kernel((0, 0, 0), (0.1, 0, 0), spec)
        along_y = se_kernel((0, 0, 0), (0, 0.1, 0), spec)
        assert_allclose(along_x, math.exp(-1.0), rtol=1e-15)
        assert_allclose(along_y, math.exp(-0.001), rtol=1e-15)
        assert along_x < along_y

    def test_hand_value(self):
        got = se_kernel((0.0, 0.0, 0.0), (0.2, 0.0, 0.0), KernelSpec.isotropic(10.0))
        assert_allclose(got, math.exp(-10 * 0.2**2), rtol=1e-15)

    @given(point3, point3, gammas)
    def test_symmetry_bitwise(self, a, b, g):
        spec = KernelSpec.isotropic(g)
        assert se_kernel(a, b, spec) == se_kernel(b, a, spec)

    @given(point3, point3, gammas, gammas, gammas)
    def test_bounds(self, a, b, gx, gy, gz):
        value = se_kernel(a, b, KernelSpec((gx, gy, gz)))
        assert 0.0 <= value <= 1.0
        if a == b:
            assert value == 1.0

    def test_monotone_in_distance(self):
        spec = KernelSpec.isotropic(3.0)
        distances = np.linspace(0.1, 2.0, 15)
        values = [se_kernel((0, 0, 0), (d, 0, 0), spec) for d in distances]
        assert all(u > v for u, v in zip(values, values[1:]))

    @given(point3, point3, gammas)
    def test_isotropic_reduces_to_radial_form(self, a, b, g):
        spec = KernelSpec.isotropic(g)
        radial = math.exp(-g * sum((x - y) ** 2 for x, y in zip(a, b)))
        assert_allclose(se_kernel(a, b, spec), radial, rtol=1e-14, atol=0)


class TestLattice:
    def test_counts(self):
        assert lattice_count(-1.0, 1.0, 0.2) == 11
        assert lattice_count(-1.0, 1.0, 1.0) == 3
        assert lattice_count(0.0, 1.0, 0.3) == 4  # 0, .3, .6, .9
        assert lattice_count(0.0, 0.0, 0.5) == 1  # degenerate axis

    def test_inclusive_upper_bound_on_exact_multiple(self):
        # 0.6 / 0.2 is 2.9999... in floats; the count rule must still
        # include the endpoint.
        assert lattice_count(0.0, 0.6, 0.2) == 4

    def test_rejects_bad_inputs(self):
        with pytest.raises(InvalidArgumentError):
            lattice_count(1.0, 0.0, 0.5)
        with pytest.raises(InvalidArgumentError):
            lattice_count(0.0, 1.0, 0.0)

    def test_axis_values(self):
        axis = lattice_axis(-1.0, 1.0, 0.5)
        assert_allclose(axis, [-1.0, -0.5, 0.0, 0.5, 1.0], atol=1e-15)


class TestBuildGrid:
    def test_coarse_cube(self):
        basis = build_grid(((-1, 1),) * 3, 1.0, KernelSpec.isotropic(1.0))
        assert basis.m_features == 27

    def test_degenerate_axis(self):
        basis = build_grid(((0, 1), (0, 1), (0, 0)), 0.5, KernelSpec.isotropic(1.0))
        assert basis.m_features == 9
        assert basis.grid_meta.counts == (3, 3, 1)
        assert_array_equal(basis.fixed_points[:, 2], np.zeros(9))

    def test_standard_cube(self):
        basis = build_grid(((-1, 1),) * 3, 0.2, KernelSpec.isotropic(10.0))
        assert basis.m_features == 1331
        assert basis.grid_meta.counts == (11, 11, 11)

    def test_point_ordering_z_fastest(self):
        basis = build_grid(((0, 1),) * 3, 0.5, KernelSpec.isotropic(1.0))
        assert_allclose(basis.fixed_points[0], [0, 0, 0])
        assert_allclose(basis.fixed_points[1], [0, 0, 0.5])
        assert_allclose(basis.fixed_points[3], [0, 0.5, 0])
        assert_allclose(basis.fixed_points[-1], [1, 1, 1])

    def test_capacity_cap(self):
        with pytest.raises(CapacityError):
            build_grid(((-1, 1),) * 3, 0.01, KernelSpec.isotropic(1.0))

    def test_rejects_inverted_bounds(self):
        with pytest.raises(InvalidArgumentError):
            build_grid(((1, -1), (-1, 1), (-1, 1)), 0.5, KernelSpec.isotropic(1.0))


@pytest.fixture(scope="module")
def small_basis():
    return build_grid(((-1, 1),) * 3, 0.4, KernelSpec.isotropic(10.0))


class TestFeaturize:
    def test_matches_scalar_oracle(self, rng, small_basis):
        points = rng.uniform(-1, 1, (7, 3))
        feats = featurize(points, small_basis)
        for i in range(7):
            for j in range(0, small_basis.m_features, 17):
                expected = se_kernel(points[i], small_basis.fixed_points[j], small_basis.kernel)
                assert_allclose(feats[i, j], expected, rtol=1e-15)

    def test_hand_two_by_three(self):
        basis = build_grid(((0, 1), (0, 0), (0, 0)), 0.5, KernelSpec((1.0, 1.0, 1.0)))
        feats = featurize(np.array([[0.0, 0.0, 0.0], [1.0, 1.0, 0.0]]), basis)
        expected = np.array(
            [

                [1.0, math.exp(-0.25), math.exp(-1.0)],
                [math.exp(-2.0), math.exp(-1.25), math.exp(-1.0)],
            ]
        )
        assert_allclose(feats, expected, rtol=1e-15)

    def test_fixed_points_give_unit_diagonal(self, small_basis):
        feats = featurize(small_basis.fixed_points, small_basis)
        assert_array_equal(np.diag(feats), np.ones(small_basis.m_features))

    def test_far_point_row_is_tiny(self, small_basis):
        feats = featurize(np.array([[9.0, 9.0, 9.0]]), small_basis)
        assert (feats < 2e-22).all()

    def test_single_point_promotes(self, small_basis):
        row = featurize(np.array([0.1, 0.2, 0.3]), small_basis)
        assert row.shape == (1, small_basis.m_features)

    def test_empty_rejected(self, small_basis):
        with pytest.raises(InvalidArgumentError):
            featurize(np.empty((0, 3)), small_basis)

    def test_nonfinite_rejected(self, small_basis):
        with pytest.raises(InvalidArgumentError):
            featurize(np.array([[np.nan, 0, 0]]), small_basis)

    def test_batch_rows_are_exact(self, rng, small_basis):
        # row content must not depend on which batch a point arrived in
        points = rng.uniform(-1.2, 1.2, (300, 3))
        whole = featurize(points, small_basis)
        parts = np.vstack([featurize(points[:113], small_basis),
                           featurize(points[113:], small_basis)])
        assert_array_equal(whole, parts)

    def test_kernel_matrix_symmetric_on_same_set(self, rng):
        points = rng.uniform(-1, 1, (40, 3))
        gram = kernel_matrix(points, points, KernelSpec((30.0, 5.0, 1.0)))
        assert_array_equal(gram, gram.T)
        assert_array_equal(np.diag(gram), np.ones(40))


class TestFeaturizeSparse:
    def test_equals_thresholded_dense(self, rng, small_basis):
        points = rng.uniform(-1.3, 1.3, (250, 3))
        for tau in (1e-3, 1e-6, 1e-9):
            dense = featurize(points, small_basis)
            sparse = featurize_sparse(points, small_basis, tau)
            assert_array_equal(sparse.toarray(), np.where(dense >= tau, dense, 0.0))

    def test_equals_thresholded_dense_anisotropic(self, rng):
        basis = build_grid(((-1, 1), (-1, 1), (0, 0.8)), (0.25, 0.5, 0.2),
                           KernelSpec((80.0, 3.0, 15.0)))
        points = rng.uniform(-1.5, 1.5, (200, 3))
        dense = featurize(points, basis)
        sparse = featurize_sparse(points, basis, 1e-6)
        assert_array_equal(sparse.toarray(), np.where(dense >= 1e-6, dense, 0.0))

    def test_points_on_lattice(self, small_basis):
        feats = featurize_sparse(small_basis.fixed_points[:50], small_basis, 1e-6)
        dense = featurize(small_basis.fixed_points[:50], small_basis)
        assert_array_equal(feats.toarray(), np.where(dense >= 1e-6, dense, 0.0))

    def test_far_point_gives_empty_row(self, small_basis):
        feats = featurize_sparse(np.array([[50.0, 0.0, 0.0]]), small_basis, 1e-6)
        assert feats.nnz == 0

    def test_threshold_validation(self, small_basis):
        for bad in (0.0, 1.0, -1e-3, np.nan):
            with pytest.raises(InvalidArgumentError):
                featurize_sparse(np.zeros((1, 3)), small_basis, bad)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**31 - 1), st.floats(0.5, 60.0), st.sampled_from([1e-4, 1e-6, 1e-8]))
    def test_dense_sparse_agreement_property(self, seed, gamma, tau):
        basis = build_grid(((-1, 1),) * 3, 0.5, KernelSpec.isotropic(gamma))
        points = np.random.default_rng(seed).uniform(-1.4, 1.4, (20, 3))
        dense = featurize(points, basis)
        sparse = featurize_sparse(points, basis, tau)
        assert_array_equal(sparse.toarray(), np.where(dense >= tau, dense, 0.0))


def test_blob_featurization_is_mostly_sparse():
    # at gamma 10 and spacing 0.2 most kernel responses are negligible
    from bdfield import generate_blobs

    basis = build_grid(((-1, 1),) * 3, 0.2, KernelSpec.isotropic(10.0))
    feats = featurize(generate_blobs(2000, seed=3).positions, basis)
    assert (feats < 1e-6).mean() >= 0.5
