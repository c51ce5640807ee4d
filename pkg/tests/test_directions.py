import math

import numpy as np
import pytest

from random_search.diagnostics import check_mu_scaling, check_sphere_projection
from random_search.directions import (
    DirectionDistribution,
    DirectionKind,
    estimate_mu,
    estimate_mu_with_error,
    fallback_mu,
    sample_direction,
    sample_directions,
    second_moment_projection,
)
from random_search.errors import InvalidDimensionError


def test_sphere_directions_are_unit_vectors():
    s = sample_directions(DirectionDistribution("sphere", 7), np.random.default_rng(0), 500)
    assert s.shape == (500, 7)
    assert np.allclose(np.linalg.norm(s, axis=1), 1.0)


def test_coordinate_directions_are_signed_axes():
    s = sample_directions(DirectionDistribution("coordinate", 5), np.random.default_rng(1), 200)
    assert np.all(np.count_nonzero(s, axis=1) == 1)
    assert set(np.unique(s[s != 0])) <= {-1.0, 1.0}


def test_gaussian_directions_have_unit_mean_square_norm():
    s = sample_directions(DirectionDistribution("gaussian", 20), np.random.default_rng(2), 20_000)
    assert abs(np.mean(np.sum(s * s, axis=1)) - 1.0) < 0.02


def test_sample_direction_carries_its_distribution():
    dist = DirectionDistribution.from_name("Sphere", 3)
    sample = sample_direction(dist, np.random.default_rng(0))
    assert sample.distribution.kind is DirectionKind.SPHERE
    assert sample.vector.shape == (3,)


def test_invalid_distributions_rejected():
    with pytest.raises(InvalidDimensionError):
        DirectionDistribution("sphere", 0)
    with pytest.raises(InvalidDimensionError):
        DirectionDistribution.from_name("cube", 3)
    with pytest.raises(InvalidDimensionError):
        estimate_mu(DirectionDistribution("sphere", 3), np.ones(4), 10, np.random.default_rng(0))


def test_estimate_mu_zero_vector_raises():
    with pytest.raises(ZeroDivisionError):
        estimate_mu(DirectionDistribution("sphere", 3), np.zeros(3), 10, np.random.default_rng(0))


def test_estimate_mu_circle_matches_closed_form():
    mu, se = estimate_mu_with_error(
        DirectionDistribution("sphere", 2), np.array([3.0, 0.0]), 200_000, np.random.default_rng(4)
    )
    assert abs(mu - 2.0 / math.pi) < max(0.005, 4 * se)


def test_estimate_mu_coordinate_is_one_over_d():
    mu = estimate_mu(
        DirectionDistribution("coordinate", 4), np.eye(4)[0], 100_000, np.random.default_rng(5)
    )
    assert abs(mu - 0.25) < 0.01


def test_estimate_mu_ignores_scale_of_g():
    dist = DirectionDistribution("sphere", 6)
    g = np.arange(1.0, 7.0)
    a = estimate_mu(dist, g, 5000, np.random.default_rng(9))
    b = estimate_mu(dist, 10.0 * g, 5000, np.random.default_rng(9))
    assert a == pytest.approx(b, rel=1e-12)


def test_second_moment_projection_small_sample():
    v = np.array([1.0, -2.0, 0.5])
    dist = DirectionDistribution("sphere", 3)
    est = second_moment_projection(dist, v, 200_000, np.random.default_rng(6))
    assert est == pytest.approx(float(v @ v) / 3, rel=0.02)


def test_fallback_mu():
    assert fallback_mu(1) == pytest.approx(math.sqrt(2 / math.pi))
    with pytest.raises(InvalidDimensionError):
        fallback_mu(0)


@pytest.mark.slow
def test_sphere_projection_lemma():
    report = check_sphere_projection((2, 3, 30), 1_000_000, np.random.default_rng(11))
    assert report.passed
    assert report.measured <= 0.01


@pytest.mark.slow
def test_mu_times_sqrt_d_is_nearly_constant():
    report = check_mu_scaling((2, 8, 32, 128), 1_000_000, np.random.default_rng(12))
    assert report.passed
    assert report.measured < 0.1


@pytest.mark.slow
def test_mu_at_d30_follows_inverse_sqrt_d():
    rng = np.random.default_rng(13)
    scaled = [
        estimate_mu(DirectionDistribution("sphere", d), np.eye(d)[0], 200_000, rng) * math.sqrt(d)
        for d in (2, 8)
    ]
    predicted = float(np.mean(scaled)) / math.sqrt(30)
    measured = estimate_mu(DirectionDistribution("sphere", 30), np.eye(30)[0], 200_000, rng)
    assert abs(measured - predicted) / predicted < 0.1
