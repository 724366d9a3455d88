import numpy as np
import pytest

from app.data.csv_io import write_csv
from app.data.synthetic import SynthSpec, generate_synthetic
from app.regression import Dataset


def random_dataset(rng: np.random.Generator, n: int, p: int, noise: float = 1.0, shift: float = 0.0) -> Dataset:
    """Gaussian design with random coefficients and Gaussian errors."""
    features = rng.standard_normal((n, p))
    beta = rng.normal(size=p + 1)
    y = shift + beta[0] + features @ beta[1:] + noise * rng.standard_normal(n)
    return Dataset.with_intercept(features, y, [f"x{j}" for j in range(1, p + 1)], "y")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_data(rng):
    """n=60, p=3, strictly positive response."""
    return random_dataset(rng, 60, 3, noise=1.0, shift=50.0)


@pytest.fixture(scope="session")
def housing():
    """Synthetic housing data at the published size, R^2 about 0.78."""
    return generate_synthetic(SynthSpec(n=1320, seed=7))


@pytest.fixture(scope="session")
def small_housing():
    return generate_synthetic(SynthSpec(n=200, seed=11))


@pytest.fixture(scope="session")
def outlier_housing():
    """Housing data with one row whose price is above twice its fitted value."""
    return generate_synthetic(SynthSpec(n=300, seed=3, positivity_outlier=True))


@pytest.fixture
def small_csv(tmp_path, small_data):
    path = tmp_path / "small.csv"
    write_csv(small_data, path)
    return path


@pytest.fixture
def make_dataset():
    return random_dataset
