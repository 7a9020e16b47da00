import json

import pytest
from click.testing import CliRunner

from matnet.cli import cli
from matnet.export import read_edge_csv
from matnet.seed import SIGMA_T_FILE, SUBJECT_DIR


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def demo_dir(runner, tmp_path):
    out = tmp_path / "demo"
    result = runner.invoke(cli, ["simulate", "--experiment", "fdr", "-p", "10", "-n", "20", "-q", "8",
                                 "--seed", "5", "--dataset", str(out)])
    assert result.exit_code == 0, result.output
    return out


def test_simulate_dataset(demo_dir):
    assert len(list((demo_dir / SUBJECT_DIR).glob("*.csv"))) == 20
    assert (demo_dir / SIGMA_T_FILE).exists()


def test_simulate_experiment_writes_report(runner, tmp_path):
    result = runner.invoke(cli, ["simulate", "--experiment", "global_size", "-p", "8", "-n", "6", "-q", "4",
                                 "--reps", "2", "--method", "oracle", "--n-jobs", "1",
                                 "--output-dir", str(tmp_path)])
    assert result.exit_code == 0, result.output
    doc = json.loads(next(tmp_path.glob("*.json")).read_text())
    assert doc["experiment"] == "global_size"
    assert doc["config"]["p"] == 8
    assert list(tmp_path.glob("*_replications.csv"))


def test_config_file_overrides_flags(runner, tmp_path):
    config = tmp_path / "exp.yaml"
    config.write_text("replications: 1\nmethods: [oracle]\nn_jobs: 1\n")
    result = runner.invoke(cli, ["simulate", "--config", str(config), "--experiment", "global_size",
                                 "-p", "8", "-n", "6", "-q", "4", "--reps", "50",
                                 "--output-dir", str(tmp_path)])
    assert result.exit_code == 0, result.output
    doc = json.loads(next(tmp_path.glob("*.json")).read_text())
    assert doc["config"]["replications"] == 1


def test_bad_parameter_exits_2(runner, tmp_path):
    result = runner.invoke(cli, ["simulate", "--alpha", "1.5", "--output-dir", str(tmp_path)])
    assert result.exit_code == 2
    assert "alpha" in result.output


def test_analyze(runner, demo_dir, tmp_path):
    out = tmp_path / "report.json"
    result = runner.invoke(cli, ["analyze", str(demo_dir / SUBJECT_DIR), "--n-jobs", "1", "--top-k", "10",
                                 "--output", str(out)])
    assert result.exit_code == 0, result.output
    doc = json.loads(out.read_text())
    assert doc["mode"] == "data_driven"
    assert len(doc["edges"]) == 10


def test_oracle_global_test(runner, demo_dir):
    result = runner.invoke(cli, ["global-test", str(demo_dir / SUBJECT_DIR), "--sigma-t",
                                 str(demo_dir / SIGMA_T_FILE), "--n-jobs", "1"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.stdout)
    assert doc["reject"] is True
    assert len(doc["argmax_nodes"]) == 2


def test_fdr_test_and_tune(runner, demo_dir):
    result = runner.invoke(cli, ["fdr-test", str(demo_dir / SUBJECT_DIR), "--n-jobs", "1"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["n_rejected"] > 0

    result = runner.invoke(cli, ["tune", str(demo_dir / SUBJECT_DIR), "--n-jobs", "1"])
    assert result.exit_code == 0, result.output
    doc = json.loads(result.stdout)
    assert 1 <= doc["b_hat"] <= 40 and len(doc["lambdas"]) == 10


def test_export(runner, demo_dir, tmp_path):
    target = tmp_path / "edges.csv"
    result = runner.invoke(cli, ["export", str(demo_dir / SUBJECT_DIR), "--format", "csv", "--top-k", "30",
                                 "--n-jobs", "1", "--output", str(target)])
    assert result.exit_code == 0, result.output
    assert len(read_edge_csv(target)) == 30


def test_degenerate_data_exits_3(runner, tmp_path):
    data = tmp_path / "flat"
    data.mkdir()
    for k in range(3):
        (data / f"s{k}.csv").write_text("a,b,c\n" + "\n".join(f"{k + t},0,{t * t}" for t in range(4)) + "\n")
    result = runner.invoke(cli, ["analyze", str(data), "--n-jobs", "1"])
    assert result.exit_code == 3, result.output


def test_bad_data_exits_2(runner, tmp_path):
    data = tmp_path / "bad"
    data.mkdir()
    (data / "s0.csv").write_text("a,b\n1,x\n")
    result = runner.invoke(cli, ["analyze", str(data)])
    assert result.exit_code == 2
    assert "row 2" in result.output
