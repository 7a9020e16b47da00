import numpy as np
import pytest

from matnet.errors import InvalidInputError
from matnet.linalg import ar1_covariance, inv_sqrt
from matnet.rng import Rng
from matnet.simulate import KroneckerModel, SpatioTemporalSample, sample_matrix_normal
from matnet.whiten import WhiteningMode, no_whitening, temporal_covariance, whiten_data_driven, whiten_oracle


def test_temporal_covariance_formula(null_sample):
    x = null_sample
    expected = sum(x.data[k].T @ x.data[k] for k in range(x.n)) / (x.n * x.p)
    np.testing.assert_allclose(temporal_covariance(x), expected, atol=1e-12)


def test_oracle_whitening_applies_inverse_root(null_sample):
    sigma_t = np.diag(np.arange(1.0, null_sample.q + 1))
    w = whiten_oracle(null_sample, sigma_t)
    assert w.mode is WhiteningMode.ORACLE
    np.testing.assert_allclose(w.y, null_sample.data @ inv_sqrt(sigma_t).matrix)
    assert w.nq == null_sample.n * null_sample.q
    assert w.stacked.shape == (w.nq, w.p)


def test_oracle_whitening_dimension_mismatch(null_sample):
    with pytest.raises(InvalidInputError):
        whiten_oracle(null_sample, np.eye(null_sample.q + 1))


@pytest.mark.parametrize("c", [0.25, 4.0])
def test_data_driven_whitening_is_scale_free(null_sample, c):
    base = whiten_data_driven(null_sample).y
    scaled = whiten_data_driven(null_sample.scaled(np.sqrt(c))).y
    np.testing.assert_allclose(scaled, base, atol=1e-10)


def test_data_driven_floors_rank_deficient_estimate():
    # n p < q: the estimated temporal covariance is singular
    x = SpatioTemporalSample(np.random.default_rng(0).standard_normal((2, 2, 10)))
    w = whiten_data_driven(x)
    assert w.warnings
    assert np.all(np.isfinite(w.y))


def test_no_whitening_is_a_copy(null_sample):
    w = no_whitening(null_sample)
    assert w.mode is WhiteningMode.VECTOR_NORMAL
    np.testing.assert_array_equal(w.y, null_sample.data)
    assert w.y is not null_sample.data


def test_oracle_whitening_removes_temporal_correlation():
    sigma_t = ar1_covariance(6, 0.4)
    x = sample_matrix_normal(KroneckerModel.from_precision(np.eye(10), sigma_t), 1000, Rng(21))
    y = whiten_oracle(x, sigma_t).y
    cov = np.einsum("kil,kim->lm", y, y) / (x.n * x.p)
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    assert np.abs(corr[~np.eye(6, dtype=bool)]).max() <= 0.05


def test_data_driven_single_time_point():
    data = np.arange(1.0, 7.0).reshape(3, 2, 1)
    w = whiten_data_driven(SpatioTemporalSample(data))
    np.testing.assert_allclose(w.y, data / np.sqrt(91.0 / 6.0), rtol=1e-12)
