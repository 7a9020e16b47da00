import numpy as np
import pytest

from matnet.analysis import analyze
from matnet.config import AnalysisConfig, AnalysisMode
from matnet.errors import InvalidInputError
from matnet.ingest import Dataset, SubjectRecord
from matnet.rng import Rng
from matnet.simulate import KroneckerModel, sample_matrix_normal, temporal_model


def dataset_from(sample, groups=None):
    records = [
        SubjectRecord(id=f"s{k}", matrix=sample.data[k], group=None if groups is None else groups[k])
        for k in range(sample.n)
    ]
    return Dataset(records=records, node_labels=[f"ch{k}" for k in range(sample.p)])


def test_true_edges_rank_high(model1_sample):
    model, sample = model1_sample
    report = analyze(dataset_from(sample), AnalysisConfig(n_jobs=1))
    truth = model.edges()
    top = {(e.i, e.j) for e in report.edges.top(25).entries}
    true_pairs = {(int(i), int(j)) for i, j in zip(*np.nonzero(np.triu(truth, k=1)))}
    assert len(true_pairs) == 17
    assert true_pairs <= top
    assert report.global_result.reject
    assert report.b_hat is not None


def test_oracle_mode(model1_sample, tmp_path):
    model, sample = model1_sample
    cfg = AnalysisConfig(mode=AnalysisMode.ORACLE, lambda_policy="kappa", n_jobs=1)
    report = analyze(dataset_from(sample), cfg, sigma_t=model.sigma_t)
    assert report.mode == "oracle" and report.b_hat is None

    path = tmp_path / "sigma_t.csv"
    np.savetxt(path, model.sigma_t, delimiter=",", fmt="%.17g")
    from_file = analyze(dataset_from(sample), cfg.model_copy(update={"sigma_t_path": path}))
    np.testing.assert_array_equal(from_file.stats.w_stat, report.stats.w_stat)

    with pytest.raises(InvalidInputError):
        analyze(dataset_from(sample), cfg)


def test_analysis_is_deterministic(null_sample):
    cfg = AnalysisConfig(n_jobs=1)
    first = analyze(dataset_from(null_sample), cfg).to_dict()
    second = analyze(dataset_from(null_sample), cfg).to_dict()
    assert first == second


def test_window_matches_pre_averaged_data(null_sample):
    ds = dataset_from(null_sample)
    cfg = AnalysisConfig(lambda_policy="kappa", n_jobs=1)
    a = analyze(ds, cfg.model_copy(update={"window": 2}))
    b = analyze(ds.downsample(2), cfg)
    assert a.q == 3
    np.testing.assert_array_equal(a.stats.w_stat, b.stats.w_stat)


def test_group_selection(null_sample):
    groups = ["a"] * (null_sample.n - 1) + ["b"]
    ds = dataset_from(null_sample, groups)
    report = analyze(ds, AnalysisConfig(group="a", lambda_policy="kappa", n_jobs=1))
    assert report.n == null_sample.n - 1 and report.group == "a"
    with pytest.raises(InvalidInputError):
        analyze(ds, AnalysisConfig(group="b", n_jobs=1))


def test_report_document(null_sample):
    report = analyze(dataset_from(null_sample), AnalysisConfig(lambda_policy="kappa", n_jobs=1))
    doc = report.to_dict(top_k=5)
    assert doc["schema_version"] == "1.0"
    assert doc["dimensions"] == {"n": 40, "p": 8, "q": 6}
    assert len(doc["edges"]) == 5
    assert doc["edges"][0]["rank"] == 1
    assert len(doc["global_test"]["argmax_nodes"]) == 2
    assert doc["network"]["n_edges"] == len(doc["fdr_test"]["rejected"])


def test_null_data_rarely_rejected():
    sigma_t = temporal_model(6)
    model = KroneckerModel.from_precision(np.eye(8), sigma_t)
    cfg = AnalysisConfig(mode=AnalysisMode.ORACLE, lambda_policy="kappa", n_jobs=1)
    rejections = 0
    for rep in range(200):
        sample = sample_matrix_normal(model, 40, Rng(31, (rep,)))
        rejections += analyze(dataset_from(sample), cfg, sigma_t=sigma_t).global_result.reject
    assert rejections <= 14
