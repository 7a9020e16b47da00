import numpy as np
import pytest

from matnet.rng import Rng
from matnet.simulate import KroneckerModel, ModelKind, build_model, null_spatial, sample_matrix_normal, temporal_model


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run Monte-Carlo acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def rng():
    return Rng(12345)


@pytest.fixture
def null_sample(rng):
    model = KroneckerModel.from_precision(null_spatial(8), temporal_model(6))
    return sample_matrix_normal(model, 40, rng.spawn(1))


@pytest.fixture
def model1_sample(rng):
    model = KroneckerModel.from_precision(build_model(ModelKind.MODEL1, 10, rng), temporal_model(10))
    return model, sample_matrix_normal(model, 60, rng.spawn(2))


@pytest.fixture
def random_spd():
    def make(dim, seed=0):
        gen = np.random.default_rng(seed)
        a = gen.standard_normal((dim, dim))
        return a @ a.T + dim * np.eye(dim)
    return make
