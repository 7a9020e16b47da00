import numpy as np
import pytest

from matnet.errors import DegenerateDataError
from matnet.rng import Rng
from matnet.simulate import KroneckerModel, ModelKind, build_model, sample_matrix_normal, temporal_model
from matnet.statistics import (
    compute_residuals,
    expand_coefficients,
    fit_nodes,
    pair_statistics,
)
from matnet.tuning import LambdaPolicy, compute_statistics, kappa_lambdas
from matnet.whiten import WhitenedData, WhiteningMode, whiten_data_driven, whiten_oracle


def _whitened(data):
    return WhitenedData(y=np.asarray(data, dtype=float), mode=WhiteningMode.ORACLE)


def test_coefficient_layout():
    compact = np.arange(12, dtype=float).reshape(4, 3)
    full = expand_coefficients(compact)
    assert np.all(np.diag(full) == 0)
    # row 1 skips column 1
    np.testing.assert_array_equal(full[1], [3.0, 0.0, 4.0, 5.0])


def test_three_node_statistics_match_hand_computation():
    gen = np.random.default_rng(3)
    omega = np.array([[1.0, 0.4, 0.0], [0.4, 1.0, -0.3], [0.0, -0.3, 1.0]])
    root = np.linalg.cholesky(np.linalg.inv(omega))
    y = np.einsum("ij,kjl->kil", root, gen.standard_normal((50, 3, 4)))
    w = _whitened(y)

    reg = fit_nodes(w, np.zeros(3), tol=1e-13, n_jobs=1)
    stats = pair_statistics(reg)

    stacked = w.stacked - w.stacked.mean(axis=0)
    coef = np.zeros((3, 3))
    for i in range(3):
        others = [j for j in range(3) if j != i]
        coef[i, others] = np.linalg.lstsq(stacked[:, others], stacked[:, i], rcond=None)[0]
    np.testing.assert_allclose(reg.coefficient_matrix(), coef, atol=1e-7)

    centered = y - y.mean(axis=0, keepdims=True)
    eps = np.stack([centered[:, i, :] - sum(coef[i, j] * centered[:, j, :] for j in range(3) if j != i)
                    for i in range(3)], axis=1)
    r = np.einsum("kil,kjl->ij", eps, eps) / w.nq
    # beta_hat[0] = (b_{0,1}, b_{0,2}); beta_hat[1] = (b_{1,0}, b_{1,2})
    b01, b10 = reg.beta_hat[0, 0], reg.beta_hat[1, 0]
    r_hat_01 = -(r[0, 1] + r[0, 0] * b01 + r[1, 1] * b10)
    t_01 = r_hat_01 / (r[0, 0] * r[1, 1])
    theta_01 = (1 + b01**2 * r[0, 0] / r[1, 1]) / (w.nq * r[0, 0] * r[1, 1])

    np.testing.assert_allclose(stats.r_tilde, r, atol=1e-7)
    assert stats.r_hat[0, 1] == pytest.approx(r_hat_01, abs=1e-7)
    assert stats.t_stat[0, 1] == pytest.approx(t_01, abs=1e-6)
    assert stats.theta_hat[0, 1] == pytest.approx(theta_01, rel=1e-6)
    assert stats.w_stat[0, 1] == pytest.approx(t_01 / np.sqrt(theta_01), rel=1e-5)
    assert np.all(np.tril(stats.w_stat) == 0)


def test_residuals_use_per_time_point_means(model1_sample):
    _, x = model1_sample
    w = whiten_oracle(x, temporal_model(x.q))
    coef = expand_coefficients(np.full((x.p, x.p - 1), 0.1))
    eps = compute_residuals(w.y, coef)
    np.testing.assert_allclose(eps.mean(axis=0), 0.0, atol=1e-12)
    i = 3
    centered = w.y - w.y.mean(axis=0, keepdims=True)
    expected = centered[:, i, :] - 0.1 * (centered.sum(axis=1) - centered[:, i, :])
    np.testing.assert_allclose(eps[:, i, :], expected, atol=1e-12)


@pytest.mark.parametrize("c", [0.25, 4.0])
def test_data_driven_w_is_scale_invariant(c):
    rng = Rng(99)
    model = KroneckerModel.from_precision(build_model(ModelKind.MODEL1, 20, rng), temporal_model(10))
    x = sample_matrix_normal(model, 30, rng.spawn(1))
    base, _ = compute_statistics(whiten_data_driven(x), LambdaPolicy.KAPPA, n_jobs=1)
    scaled, _ = compute_statistics(whiten_data_driven(x.scaled(np.sqrt(c))), LambdaPolicy.KAPPA, n_jobs=1)
    assert np.max(np.abs(scaled.w_stat - base.w_stat)) <= 1e-8


def test_relabeling_permutes_statistics():
    gen = np.random.default_rng(4)
    omega = build_model(ModelKind.MODEL1, 6, Rng(0))
    root = np.linalg.cholesky(np.linalg.inv(omega))
    y = np.einsum("ij,kjl->kil", root, gen.standard_normal((200, 6, 3)))
    perm = np.array([4, 0, 5, 2, 1, 3])

    def full_t(data):
        w = _whitened(data)
        stats = pair_statistics(fit_nodes(w, kappa_lambdas(w), tol=1e-12, n_jobs=1))
        return stats.t_stat + stats.t_stat.T

    original = full_t(y)
    permuted = full_t(y[:, perm, :])
    np.testing.assert_allclose(permuted, original[np.ix_(perm, perm)], atol=1e-6)


def test_parallel_node_fits_match_serial(model1_sample):
    _, x = model1_sample
    w = whiten_oracle(x, temporal_model(x.q))
    lambdas = kappa_lambdas(w)
    serial = fit_nodes(w, lambdas, n_jobs=1)
    parallel = fit_nodes(w, lambdas, n_jobs=2)
    np.testing.assert_allclose(parallel.beta_hat, serial.beta_hat, rtol=0, atol=1e-12)


def test_constant_location_is_degenerate():
    y = np.random.default_rng(0).standard_normal((10, 4, 3))
    y[:, 2, :] = 1.0
    with pytest.raises(DegenerateDataError) as err:
        fit_nodes(_whitened(y), 0.1, n_jobs=1, node_labels=["a", "b", "c", "d"])
    assert err.value.node == "c"
    assert err.value.exit_code == 3


def test_uncorrected_estimator(model1_sample):
    _, x = model1_sample
    stats, _ = compute_statistics(whiten_oracle(x, temporal_model(x.q)), n_jobs=1)
    d = stats.r_tilde_diag
    assert stats.uncorrected_t()[0, 1] == pytest.approx(-stats.r_tilde[0, 1] / (d[0] * d[1]))
    assert np.all(stats.theta_hat[np.triu_indices(stats.p, 1)] > 0)
    assert np.all(np.isfinite(stats.w_values()))


@pytest.mark.slow
def test_null_w_is_approximately_standard_normal():
    values = []
    sigma_t = temporal_model(20)
    model = KroneckerModel.from_precision(np.eye(20), sigma_t)
    for rep in range(60):
        x = sample_matrix_normal(model, 30, Rng(5, (rep,)))
        stats, _ = compute_statistics(whiten_oracle(x, sigma_t), n_jobs=1)
        values.append(stats.w_values())
    w = np.concatenate(values)
    assert w.size >= 10_000
    assert abs(w.mean()) <= 0.1
    assert abs(w.std() - 1.0) <= 0.1


@pytest.mark.slow
def test_bias_correction_beats_uncorrected_estimator():
    omega = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]])
    sigma_t = temporal_model(20)
    model = KroneckerModel.from_precision(omega, sigma_t)
    corrected, uncorrected = [], []
    for rep in range(200):
        x = sample_matrix_normal(model, 250, Rng(8, (rep,)))
        w = whiten_oracle(x, sigma_t)
        stats = pair_statistics(fit_nodes(w, np.zeros(3), n_jobs=1))
        corrected.append(stats.t_stat[0, 1])
        uncorrected.append(stats.uncorrected_t()[0, 1])
    corrected, uncorrected = np.array(corrected), np.array(uncorrected)
    se = corrected.std(ddof=1) / np.sqrt(corrected.size)
    assert abs(corrected.mean() - 0.5) <= 3 * se
    assert abs(corrected.mean() - 0.5) <= abs(uncorrected.mean() - 0.5) / 3


def test_null_coefficients_are_small():
    sigma_t = temporal_model(10)
    x = sample_matrix_normal(KroneckerModel.from_precision(np.eye(10), sigma_t), 300, Rng(4))
    w = whiten_oracle(x, sigma_t)
    reg = fit_nodes(w, kappa_lambdas(w), n_jobs=1)
    assert np.abs(reg.beta_hat).max() <= 0.05


def test_bias_correction_helps_on_a_short_run():
    omega = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 1.0]])
    sigma_t = temporal_model(20)
    model = KroneckerModel.from_precision(omega, sigma_t)
    corrected, uncorrected = [], []
    for rep in range(40):
        x = sample_matrix_normal(model, 250, Rng(81, (rep,)))
        stats = pair_statistics(fit_nodes(whiten_oracle(x, sigma_t), np.zeros(3), n_jobs=1))
        corrected.append(stats.t_stat[0, 1])
        uncorrected.append(stats.uncorrected_t()[0, 1])
    corrected = np.array(corrected)
    se = corrected.std(ddof=1) / np.sqrt(corrected.size)
    assert abs(corrected.mean() - 0.5) <= 4 * se
    assert abs(corrected.mean() - 0.5) < abs(np.mean(uncorrected) - 0.5)
