"""Tests for the shared numeric foundations."""
import math

import numpy as np
import pytest
from scipy import special

from robustqda.core import (
    LocationScatter,
    as_data_matrix,
    chi2_cdf,
    chi2_quantile,
    mahalanobis,
    mvn_sample,
    spd_cholesky,
    substream,
)
from robustqda.errors import (
    DataError,
    DimensionMismatch,
    DomainError,
    NotPositiveDefinite,
)


def chi2_quantile_oracle(dof: int, prob: float) -> float:
    """Independent quantile: bisection on the regularized incomplete gamma."""
    lo, hi = 0.0, 1e4
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if special.gammainc(dof / 2.0, mid / 2.0) < prob:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestAsDataMatrix:
    def test_accepts_lists(self):
        X = as_data_matrix([[1.0, 2.0], [3.0, 4.0]])
        assert X.dtype == np.float64
        assert X.shape == (2, 2)

    def test_rejects_1d(self):
        with pytest.raises(DimensionMismatch):
            as_data_matrix(np.arange(4.0))

    def test_rejects_empty(self):
        with pytest.raises(DataError):
            as_data_matrix(np.empty((0, 3)))

    def test_rejects_nan_with_position(self):
        X = np.ones((4, 3))
        X[2, 1] = np.nan
        with pytest.raises(DataError, match="row 2, column 1"):
            as_data_matrix(X)

    def test_rejects_inf(self):
        X = np.ones((2, 2))
        X[0, 0] = np.inf
        with pytest.raises(DataError):
            as_data_matrix(X)


class TestChi2:
    def test_matches_bisection_oracle(self):
        for dof in (1, 2, 3, 5, 10, 30):
            for prob in (0.01, 0.5, 0.9, 0.975, 0.99):
                got = chi2_quantile(dof, prob)
                want = chi2_quantile_oracle(dof, prob)
                assert got == pytest.approx(want, abs=1e-10 * max(1.0, want))

    def test_frozen_values(self):
        assert chi2_quantile(5, 0.99) == pytest.approx(15.086272469388973, abs=1e-12)
        assert chi2_quantile(1, 0.5) == pytest.approx(0.4549364231195727, abs=1e-12)
        assert chi2_quantile(5, 0.975) == pytest.approx(12.832501994030027, abs=1e-12)
        assert math.sqrt(chi2_quantile(2, 0.99)) == pytest.approx(3.0348542587702925, abs=1e-12)
        assert math.sqrt(chi2_quantile(5, 0.99)) == pytest.approx(3.884105105347819, abs=1e-12)

    def test_cdf_inverts_quantile(self):
        for prob in (0.1, 0.5, 0.99):
            assert chi2_cdf(chi2_quantile(4, prob), 4) == pytest.approx(prob, abs=1e-12)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            chi2_quantile(0, 0.5)
        with pytest.raises(DomainError):
            chi2_quantile(3, 0.0)
        with pytest.raises(DomainError):
            chi2_quantile(3, 1.0)
        with pytest.raises(DomainError):
            chi2_cdf(1.0, -1)


class TestSpdCholesky:
    def test_reconstruction_and_logdet(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            p = int(rng.integers(1, 7))
            A = rng.standard_normal((p, p + 3))
            S = A @ A.T + 0.1 * np.eye(p)
            L, log_det, precision = spd_cholesky(S)
            assert np.allclose(L @ L.T, S, atol=1e-10)
            sign, want = np.linalg.slogdet(S)
            assert sign > 0
            assert log_det == pytest.approx(want, abs=1e-10)
            assert np.allclose(precision @ S, np.eye(p), atol=1e-8)

    def test_rejects_indefinite(self):
        with pytest.raises(NotPositiveDefinite):
            spd_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

    def test_rejects_singular(self):
        v = np.array([1.0, 2.0])
        with pytest.raises(NotPositiveDefinite):
            spd_cholesky(np.outer(v, v))

    def test_rejects_asymmetric(self):
        with pytest.raises(DataError):
            spd_cholesky(np.array([[1.0, 0.5], [0.2, 1.0]]))

    def test_rejects_nonsquare(self):
        with pytest.raises(DimensionMismatch):
            spd_cholesky(np.ones((2, 3)))


class TestLocationScatter:
    def test_distances_match_direct(self):
        rng = np.random.default_rng(1)
        mu = rng.standard_normal(3)
        A = rng.standard_normal((3, 3))
        sigma = A @ A.T + np.eye(3)
        est = LocationScatter.from_sigma(mu, sigma)
        X = rng.standard_normal((50, 3))
        inv = np.linalg.inv(sigma)
        want = np.einsum("ij,jk,ik->i", X - mu, inv, X - mu)
        assert np.allclose(est.squared_distances(X), want, atol=1e-10)
        assert np.allclose(est.distances(X), np.sqrt(want), atol=1e-10)

    def test_mahalanobis_single_point(self):
        est = LocationScatter.from_sigma([0.0, 0.0], np.eye(2))
        assert mahalanobis([3.0, 4.0], est) == pytest.approx(5.0, abs=1e-12)
        with pytest.raises(DimensionMismatch):
            mahalanobis([1.0, 2.0, 3.0], est)

    def test_arrays_are_readonly(self):
        est = LocationScatter.from_sigma([0.0], [[2.0]])
        with pytest.raises(ValueError):
            est.mu[0] = 1.0
        with pytest.raises(ValueError):
            est.sigma[0, 0] = 1.0

    def test_shape_validation(self):
        with pytest.raises(DimensionMismatch):
            LocationScatter.from_sigma([0.0, 0.0], np.eye(3))
        est = LocationScatter.from_sigma([0.0, 0.0], np.eye(2))
        with pytest.raises(DimensionMismatch):
            est.squared_distances(np.ones((4, 3)))


class TestSampling:
    def test_substream_reproducible_and_distinct(self):
        a = substream(7, 3).standard_normal(5)
        b = substream(7, 3).standard_normal(5)
        c = substream(7, 4).standard_normal(5)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_mvn_sample_moments(self):
        mu = np.array([1.0, -2.0, 0.5])
        A = np.array([[2.0, 0.0, 0.0], [0.3, 1.0, 0.0], [-0.2, 0.4, 0.7]])
        est = LocationScatter.from_sigma(mu, A @ A.T)
        X = mvn_sample(substream(11, 0), est, 200000)
        assert np.allclose(X.mean(axis=0), mu, atol=0.02)
        assert np.allclose(np.cov(X.T), A @ A.T, atol=0.05)

    def test_mvn_sample_deterministic(self):
        est = LocationScatter.from_sigma([0.0, 0.0], np.eye(2))
        X1 = mvn_sample(substream(3, 1), est, 10)
        X2 = mvn_sample(substream(3, 1), est, 10)
        assert np.array_equal(X1, X2)

    def test_mvn_sample_rejects_nonpositive_n(self):
        est = LocationScatter.from_sigma([0.0], [[1.0]])
        with pytest.raises(DomainError):
            mvn_sample(substream(0, 0), est, 0)
