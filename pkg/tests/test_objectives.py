import math

import numpy as np
import pytest

from random_search.directions import fallback_mu
from random_search.errors import ConfigError, DataError, EmptyDatasetError, InvalidLabelError
from random_search.objectives import (
    ShiftedObjective,
    TheoryConstants,
    estimate_constants,
    make_logistic,
    make_quadratic,
)


def test_full_value_is_mean_of_components(logistic):
    x = np.random.default_rng(0).standard_normal(logistic.dim) * 0.1
    values = logistic.component_values(None, x)
    assert logistic.full_value(x) == float(np.mean(values))
    assert logistic.batch_value(np.arange(logistic.n), x) == pytest.approx(
        logistic.full_value(x), rel=1e-14
    )


def test_logistic_component_formula(small_logistic):
    x = np.linspace(-0.5, 0.5, small_logistic.dim)
    i = 3
    a, y = small_logistic.features[i], small_logistic.labels[i]
    reg = float(x @ x) / (2 * small_logistic.n)
    expected = math.log1p(math.exp(-y * float(a @ x))) + reg
    assert small_logistic.component_value(i, x) == pytest.approx(expected, rel=1e-12)


def test_logistic_gradient_matches_finite_differences(small_logistic):
    x = np.random.default_rng(1).standard_normal(small_logistic.dim) * 0.3
    h = 1e-6
    numeric = np.array(
        [
            (small_logistic.full_value(x + h * e) - small_logistic.full_value(x - h * e)) / (2 * h)
            for e in np.eye(small_logistic.dim)
        ]
    )
    assert np.allclose(small_logistic.full_gradient(x), numeric, atol=1e-6)
    per_component = small_logistic.component_gradients(None, x).mean(axis=0)
    assert np.allclose(small_logistic.full_gradient(x), per_component)


def test_full_values_vectorised(logistic, noisy_quadratic):
    rng = np.random.default_rng(2)
    for obj in (logistic, noisy_quadratic):
        points = 0.2 * rng.standard_normal((5, obj.dim))
        expected = [obj.full_value(p) for p in points]
        assert np.allclose(obj.full_values(points), expected)


def test_make_logistic_validation():
    features = np.ones((3, 2))
    with pytest.raises(InvalidLabelError):
        make_logistic(features, np.array([1.0, 0.5, -1.0]), 1.0)
    with pytest.raises(EmptyDatasetError):
        make_logistic(np.ones((0, 2)), np.array([]), 1.0)
    with pytest.raises(DataError):
        make_logistic(features, np.array([1.0, -1.0]), 1.0)
    with pytest.raises(ConfigError):
        make_logistic(features, np.array([1.0, -1.0, 1.0]), -0.1)


def test_quadratic_value_noise_equals_sigma_times_radius(noisy_quadratic):
    assert np.allclose(noisy_quadratic.offsets.sum(axis=0), 0.0, atol=1e-10)
    x = np.random.default_rng(3).standard_normal(noisy_quadratic.dim)
    values = noisy_quadratic.component_values(None, x)
    assert float(values.std()) == pytest.approx(0.5 * float(np.linalg.norm(x)), rel=1e-9)
    assert noisy_quadratic.full_value(np.zeros(noisy_quadratic.dim)) == 0.0


def test_make_quadratic_validation():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigError):
        make_quadratic(np.ones(5), 0.1, 5, rng)
    with pytest.raises(ConfigError):
        make_quadratic(np.array([1.0, 0.0]), 0.0, 1, rng)
    with pytest.raises(ConfigError):
        make_quadratic(np.ones(2), -1.0, 10, rng)


def test_shifted_objective_moves_every_component(small_logistic):
    shifted = ShiftedObjective(small_logistic, 5.0)
    x = np.full(small_logistic.dim, 0.1)
    assert np.allclose(
        shifted.component_values(None, x), small_logistic.component_values(None, x) + 5.0
    )
    assert np.allclose(shifted.full_gradient(x), small_logistic.full_gradient(x))
    assert shifted.lower_bound() == 5.0


def test_estimate_constants_noiseless_quadratic(unit_quadratic):
    rng = np.random.default_rng(4)
    x0 = np.full(10, 1 / math.sqrt(10))
    c = estimate_constants(unit_quadratic, 20, rng, x0=x0)
    assert c.sigma0 == 0.0 and c.sigma1 == 0.0
    assert c.F0 == pytest.approx(0.5)
    assert c.L0 == pytest.approx(1.0, abs=0.05)
    assert c.L1 <= 0.05
    assert c.mu_D == pytest.approx(fallback_mu(10))
    assert c.dim == 10 and c.estimated


def test_estimate_constants_measures_value_noise(noisy_quadratic):
    c = estimate_constants(noisy_quadratic, 10, np.random.default_rng(5))
    assert c.sigma0 == pytest.approx(0.5, rel=1e-8)
    assert c.G > 0


def test_theory_constants_reject_negative():
    with pytest.raises(ConfigError):
        TheoryConstants(L0=-1.0, L1=0.0, G=1.0, sigma0=0.0, sigma1=0.0, F0=1.0, mu_D=0.1)
