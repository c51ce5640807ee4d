from pathlib import Path
from typing import Optional

import numpy as np
import pytest

from random_search.constants import BENCHMARK_SEPARATION
from random_search.datasets import load_objective, synthetic_dataset
from random_search.objectives import FiniteSumObjective, make_logistic, make_quadratic


class FixedIndexRng:
    """Stands in for a Generator when a test needs to choose the minibatch."""

    def __init__(self, *batches):
        self.batches = [np.asarray(b) for b in batches]
        self.calls = 0

    def integers(self, low, high, size=None):
        batch = self.batches[self.calls % len(self.batches)]
        self.calls += 1
        assert batch.shape == (size,) and batch.min() >= low and batch.max() < high
        return batch


class NanObjective(FiniteSumObjective):
    """Every component evaluates to NaN."""

    def __init__(self, n: int = 4, dim: int = 3) -> None:
        self.n = n
        self.dim = dim

    def component_values(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        count = self.n if idx is None else len(idx)
        return np.full(count, np.nan)

    def component_gradients(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        count = self.n if idx is None else len(idx)
        return np.full((count, self.dim), np.nan)


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def logistic():
    return load_objective("synthetic", seed=0)


@pytest.fixture(scope="session")
def benchmark_logistic():
    """The nearly separable task batch sweeps run on by default."""
    return load_objective("synthetic", seed=0, separation=BENCHMARK_SEPARATION)


@pytest.fixture(scope="session")
def small_logistic():
    features, labels = synthetic_dataset(40, 5, np.random.default_rng(3))
    return make_logistic(features, labels, 1.0)


@pytest.fixture(scope="session")
def noisy_quadratic():
    return make_quadratic(np.linspace(0.5, 2.0, 10), 0.5, 200, np.random.default_rng(7))


@pytest.fixture(scope="session")
def unit_quadratic():
    """f(x) = ||x||^2 / 2 in d = 10 with a single noiseless component."""
    return make_quadratic(np.ones(10), 0.0, 1, np.random.default_rng(0))


@pytest.fixture()
def nan_objective():
    return NanObjective()


@pytest.fixture()
def fixed_index_rng():
    return FixedIndexRng
