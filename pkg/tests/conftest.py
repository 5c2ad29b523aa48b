import numpy as np
import pytest

from qmlp.data import generate_car_surrogate, load_car_evaluation, split


@pytest.fixture(scope="session")
def car_csv(tmp_path_factory):
    """Car-acceptability CSV with the canonical schema.

    Prefers the real UCI file at data/car.csv when present; otherwise the
    deterministic surrogate (same schema and similar class imbalance).
    """
    from pathlib import Path

    canonical = Path(__file__).resolve().parent.parent / "data" / "car.csv"
    if canonical.exists():
        return canonical
    path = tmp_path_factory.mktemp("data") / "car_surrogate.csv"
    return generate_car_surrogate(path)


@pytest.fixture(scope="session")
def car_dataset(car_csv):
    return load_car_evaluation(car_csv)


@pytest.fixture(scope="session")
def car_splits(car_dataset):
    return split(car_dataset, 0.8, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
