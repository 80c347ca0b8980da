"""Conjugate posterior, prediction, oracle agreement, rescaling."""

import math

import numpy as np
import pytest
import scipy.sparse
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from bdfield import (
    GaussianState,
    InvalidArgumentError,
    NoiseModel,
    NumericalError,
    batch_statistics,
    brute_force_posterior,
    make_prior,
    posterior_covariance,
    posterior_mean,
    posterior_update,
    predict,
    rescale_check,
)
from bdfield.inference import cholesky_factor, cholesky_with_jitter


def random_instance(seed, m_max=50, n_max=200):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, m_max + 1))
    n = int(rng.integers(0, n_max + 1))
    features = rng.normal(size=(n, m))
    labels = rng.normal(size=n)
    alpha = float(rng.uniform(0.1, 2.0))
    beta = float(rng.uniform(0.5, 20.0))
    return m, features, labels, alpha, beta


class TestNoiseModel:
    def test_defaults(self):
        noise = NoiseModel()
        assert noise.alpha == 1e-2
        assert noise.beta == 1e2
        assert noise.noise_variance == 1e-2

    @pytest.mark.parametrize("kwargs", [{"beta": 0}, {"beta": -1}, {"alpha": 0}, {"alpha": float("nan")}])
    def test_validation(self, kwargs):
        with pytest.raises(InvalidArgumentError):
            NoiseModel(**kwargs)


class TestPrior:
    def test_structure(self):
        prior = make_prior(3, 0.01)
        assert_array_equal(prior.precision, 0.01 * np.eye(3))
        assert_array_equal(prior.info, np.zeros(3))

    def test_covariance_of_diagonal_prior(self):
        # alpha 4 inverts exactly in binary floating point
        cov = posterior_covariance(make_prior(2, 4.0))
        assert_array_equal(cov, np.diag([0.25, 0.25]))

    def test_unit_prior_mean_and_variance(self):
        prior = make_prior(1, 1.0)
        means, variances = predict(prior, np.array([[1.0]]), beta=1.0)
        assert means[0] == 0.0
        assert_allclose(variances[0], 2.0, rtol=1e-14)  # 1/beta + 1/alpha

    def test_prior_predictive_variance(self, rng):
        alpha, beta = 0.3, 7.0
        prior = make_prior(12, alpha)
        phi = rng.normal(size=(5, 12))
        means, variances = predict(prior, phi, beta)
        assert_array_equal(means, np.zeros(5))
        expected = 1.0 / beta + (phi**2).sum(axis=1) / alpha
        assert_allclose(variances, expected, rtol=1e-12)

    @pytest.mark.parametrize("m,alpha", [(0, 1.0), (-2, 1.0), (3, 0.0), (3, -1.0)])
    def test_validation(self, m, alpha):
        with pytest.raises(InvalidArgumentError):
            make_prior(m, alpha)


class TestPosteriorUpdate:
    def test_scalar_conjugate_example(self):
        # alpha=1, one observation phi=1, v=2, beta=1:
        # posterior mean beta*phi*v / (alpha + beta*phi^2) = 1, variance 1/2
        post = posterior_update(make_prior(1, 1.0), np.array([[1.0]]), np.array([2.0]), 1.0)
        assert_allclose(posterior_mean(post), [1.0], rtol=1e-14)
        assert_allclose(posterior_covariance(post), [[0.5]], rtol=1e-14)
        means, variances = predict(post, np.array([[1.0]]), beta=1.0)
        assert_allclose(means, [1.0], rtol=1e-14)
        assert_allclose(variances, [1.5], rtol=1e-14)

    def test_empty_batch_is_identity(self):
        prior = make_prior(4, 1.0)
        assert posterior_update(prior, np.empty((0, 4)), np.empty(0), 2.0) is prior

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            posterior_update(make_prior(3, 1.0), np.ones((2, 4)), np.ones(2), 1.0)

    def test_label_count_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            posterior_update(make_prior(3, 1.0), np.ones((2, 3)), np.ones(3), 1.0)

    def test_rejects_bad_beta(self):
        with pytest.raises(InvalidArgumentError):
            posterior_update(make_prior(2, 1.0), np.ones((1, 2)), np.ones(1), 0.0)

    def test_sparse_features_match_dense(self, rng):
        dense = rng.normal(size=(30, 8)) * (rng.uniform(size=(30, 8)) > 0.6)
        labels = rng.normal(size=30)
        post_dense = posterior_update(make_prior(8, 0.5), dense, labels, 3.0)
        post_sparse = posterior_update(
            make_prior(8, 0.5), scipy.sparse.csr_matrix(dense), labels, 3.0
        )
        assert_allclose(post_dense.precision, post_sparse.precision, rtol=1e-12)
        assert_allclose(post_dense.info, post_sparse.info, rtol=1e-12)

    @given(st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_sequential_equals_batch(self, seed):
        m, features, labels, alpha, beta = random_instance(seed, m_max=12, n_max=60)
        cut = len(labels) // 2
        chained = posterior_update(
            posterior_update(make_prior(m, alpha), features[:cut], labels[:cut], beta),
            features[cut:], labels[cut:], beta,
        )
        单 = posterior_update(make_prior(m, alpha), features, labels, beta)
        assert_allclose(chained.precision, 单.precision, rtol=1e-12, atol=1e-12)
        assert_allclose(posterior_mean(chained), posterior_mean(单), atol=1e-6)

    def test_contraction(self, rng):
        # epistemic term at a fixed query never grows with more evidence
        state = make_prior(6, 0.2)
        phi = rng.normal(size=(1, 6))
        last = predict(state, phi, 5.0)[1][0]
        for _ in range(8):
            state = posterior_update(state, rng.normal(size=(10, 6)), rng.normal(size=10), 5.0)
            current = predict(state, phi, 5.0)[1][0]
            assert current <= last + 1e-12
            last = current


class TestBruteForceOracle:
    def test_zero_rows_returns_prior(self):
        mu0 = np.array([1.0, -2.0])
        cov0 = np.diag([2.0, 3.0])
        mean, cov = brute_force_posterior(mu0, cov0, np.empty((0, 2)), np.empty(0), 1.0)
        assert_array_equal(mean, mu0)
        assert_array_equal(cov, cov0)

    def test_scalar_example(self):
        mean, cov = brute_force_posterior(
            np.zeros(1), np.eye(1), np.array([[1.0]]), np.array([2.0]), 1.0
        )
        assert_allclose(mean, [1.0], rtol=1e-14)
        assert_allclose(cov, [[0.5]], rtol=1e-14)

    def test_identity_features_shrink_symmetrically(self):
        m = 5
        mean, cov = brute_force_posterior(
            np.zeros(m), np.eye(m), np.eye(m), np.zeros(m), 1.0
        )
        assert_array_equal(mean, np.zeros(m))
        assert_allclose(cov, 0.5 * np.eye(m), rtol=1e-14)

    def test_dimension_cap(self):
        with pytest.raises(InvalidArgumentError):
            brute_force_posterior(
                np.zeros(201), np.eye(201), np.zeros((1, 201)), np.zeros(1), 1.0
            )

    def test_singular_prior(self):
        with pytest.raises(NumericalError):
            brute_force_posterior(
                np.zeros(2), np.zeros((2, 2)), np.ones((1, 2)), np.ones(1), 1.0
            )

    @pytest.mark.parametrize("seed", range(12))
    def test_factored_path_agrees(self, seed):
        m, features, labels, alpha, beta = random_instance(seed)
        post = posterior_update(make_prior(m, alpha), features, labels, beta)
        mean_b, cov_b = brute_force_posterior(
            np.zeros(m), np.eye(m) / alpha, features, labels, beta
        )
        assert_allclose(posterior_mean(post), mean_b, atol=1e-8)
        assert_allclose(posterior_covariance(post), cov_b, atol=1e-8)


class TestPredict:
    def test_zero_feature_row_hits_floor_exactly(self, rng):
        post = posterior_update(
            make_prior(6, 0.5), rng.normal(size=(40, 6)), rng.normal(size=40), 2.0
        )
        phi = np.vstack([np.zeros(6), rng.normal(size=6)])
        means, variances = predict(post, phi, 2.0)
        assert means[0] == 0.0
        assert variances[0] == 0.5  # exactly 1/beta
        assert variances[1] > 0.5

    def test_variance_floor_everywhere(self, rng):
        post = posterior_update(
            make_prior(10, 0.1), rng.normal(size=(100, 10)), rng.normal(size=100), 4.0
        )
        _, variances = predict(post, rng.normal(size=(200, 10)), 4.0)
        assert (variances >= 0.25).all()

    def test_empty_query_rejected(self):
        with pytest.raises(InvalidArgumentError):
            predict(make_prior(3, 1.0), np.empty((0, 3)), 1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            predict(make_prior(3, 1.0), np.ones((1, 4)), 1.0)

    def test_sparse_queries_match_dense(self, rng):
        post = posterior_update(
            make_prior(9, 0.3), rng.normal(size=(50, 9)), rng.normal(size=50), 2.0
        )
        dense = rng.normal(size=(20, 9)) * (rng.uniform(size=(20, 9)) > 0.5)
        md, vd = predict(post, dense, 2.0)
        ms, vs = predict(post, scipy.sparse.csr_matrix(dense), 2.0)
        assert_allclose(md, ms, rtol=1e-13)
        assert_allclose(vd, vs, rtol=1e-13)


class TestRescaleCheck:
    def test_identity_scale_is_bitwise(self, rng):
        post = posterior_update(
            make_prior(8, 0.4), rng.normal(size=(60, 8)), rng.normal(size=60), 3.0
        )
        feats = rng.normal(size=(25, 8))
        before, after = rescale_check(post, feats, 1.0)
        assert_array_equal(before, after)

    @pytest.mark.parametrize("c", [0.1, 0.5, 2.0, math.exp(-1.0 * 0.1**2)])
    def test_absorption_cancels(self, rng, c):
        post = posterior_update(
            make_prior(8, 0.4), rng.normal(size=(60, 8)), rng.normal(size=60), 3.0
        )
        feats = rng.normal(size=(25, 8))
        before, after = rescale_check(post, feats, c)
        assert np.abs(before - after).max() < 1e-10

    def test_rejects_bad_scale(self):
        with pytest.raises(InvalidArgumentError):
            rescale_check(make_prior(2, 1.0), np.ones((1, 2)), 0.0)


class TestBatchStatistics:
    def test_gram_is_exactly_symmetric(self, rng):
        gram, _ = batch_statistics(rng.normal(size=(80, 15)), rng.normal(size=80), 2.5)
        assert_array_equal(gram, gram.T)

    def test_values(self, rng):
        features = rng.normal(size=(30, 6))
        labels = rng.normal(size=(30, 3))
        beta = 1.7
        gram, moment = batch_statistics(features, labels, beta)
        assert_allclose(gram, beta * features.T @ features, rtol=1e-12)
        assert_allclose(moment, beta * features.T @ labels, rtol=1e-12)

    def test_rejects_mismatched_labels(self, rng):
        with pytest.raises(InvalidArgumentError):
            batch_statistics(rng.normal(size=(5, 3)), np.ones(4), 1.0)

    def test_rejects_nonfinite_labels(self, rng):
        with pytest.raises(InvalidArgumentError):
            batch_statistics(np.ones((2, 3)), np.array([1.0, np.nan]), 1.0)


class TestCholeskyAndState:
    def test_no_jitter_for_healthy_matrix(self):
        matrix = np.diag([2.0, 3.0, 4.0])
        factor, jitter = cholesky_with_jitter(matrix)
        assert jitter == 0.0
        assert_allclose(factor @ factor.T, matrix, rtol=1e-14)

    def test_jitter_rescues_semidefinite(self):
        # rank-1 matrix: singular, but a tiny ridge restores a factorization
        v = np.array([1.0, 1.0, 1.0])
        matrix = np.outer(v, v)
        factor, jitter = cholesky_with_jitter(matrix)
        assert jitter > 0.0
        assert_allclose(factor @ factor.T, matrix + jitter * np.eye(3), atol=1e-10)

    def test_indefinite_fails(self):
        with pytest.raises(NumericalError):
            cholesky_with_jitter(np.diag([1.0, -5.0]))

    def test_state_validation(self, rng):
        post = posterior_update(
            make_prior(5, 0.3), rng.normal(size=(20, 5)), rng.normal(size=20), 2.0
        )
        posterior_mean(post)
        posterior_covariance(post)
        post.validate()

    def test_validate_catches_asymmetry(self):
        precision = np.eye(3)
        precision[0, 1] = 1e-6
        state = GaussianState(precision, np.zeros(3))
        with pytest.raises(NumericalError):
            state.validate()

    def test_state_rejects_nonfinite(self):
        with pytest.raises(InvalidArgumentError):
            GaussianState(np.array([[np.inf]]), np.zeros(1))

    def test_state_rejects_shape_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            GaussianState(np.eye(3), np.zeros(2))

    def test_factor_is_cached(self, rng):
        post = posterior_update(
            make_prior(4, 1.0), rng.normal(size=(10, 4)), rng.normal(size=10), 1.0
        )
        assert cholesky_factor(post) is cholesky_factor(post)
