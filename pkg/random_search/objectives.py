"""Finite-sum objectives f(x) = (1/n) sum_i f_i(x) and empirical theory constants.

Every objective exposes vectorised component access (``component_values`` and
``component_gradients`` over an index array, ``None`` meaning all components).
``full_value`` is defined as the mean of the full component vector so a
full-enumeration minibatch reproduces it bit for bit. Gradients are for
diagnostics only; the optimizers never call them.
"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import nnls
from scipy.special import expit

from .directions import DirectionDistribution, estimate_mu, fallback_mu, sample_directions
from .errors import ConfigError, DataError, EmptyDatasetError, InvalidLabelError

logger = logging.getLogger(__name__)

PROBE_RADIUS = 1.0


class FiniteSumObjective(ABC):
    n: int
    dim: int

    @abstractmethod
    def component_values(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def component_gradients(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        ...

    def component_value(self, i: int, x: np.ndarray) -> float:
        return float(self.component_values(np.array([i]), x)[0])

    def component_gradient(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.component_gradients(np.array([i]), x)[0]

    def batch_value(self, idx: Optional[np.ndarray], x: np.ndarray) -> float:
        return float(np.mean(self.component_values(idx, x)))

    def full_value(self, x: np.ndarray) -> float:
        return self.batch_value(None, x)

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return np.mean(self.component_gradients(None, x), axis=0)

    def full_values(self, points: np.ndarray) -> np.ndarray:
        return np.array([self.full_value(p) for p in np.atleast_2d(points)])

    def lower_bound(self) -> Optional[float]:
        """Known f* (or a valid lower bound), ``None`` when unknown."""
        return None


class LogisticObjective(FiniteSumObjective):
    """Components log(1 + exp(-y_i <a_i, x>)) + (lam / 2n) ||x||^2."""

    def __init__(self, features: np.ndarray, labels: np.ndarray, lam: float) -> None:
        self.features = features
        self.labels = labels
        self.lam = float(lam)
        self.n, self.dim = features.shape
        self._reg = self.lam / (2.0 * self.n)

    def _rows(self, idx: Optional[np.ndarray]):
        if idx is None:
            return self.features, self.labels
        return self.features[idx], self.labels[idx]

    def component_values(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        a, y = self._rows(idx)
        margins = y * (a @ x)
        return np.logaddexp(0.0, -margins) + self._reg * float(x @ x)

    def component_gradients(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        a, y = self._rows(idx)
        weights = -y * expit(-(y * (a @ x)))
        return weights[:, None] * a + (2.0 * self._reg) * x

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        weights = -self.labels * expit(-(self.labels * (self.features @ x)))
        return (self.features.T @ weights) / self.n + (2.0 * self._reg) * x

    def full_values(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        margins = self.labels[:, None] * (self.features @ points.T)
        reg = self._reg * np.einsum("ij,ij->i", points, points)
        return np.mean(np.logaddexp(0.0, -margins), axis=0) + reg

    def lower_bound(self) -> Optional[float]:
        return 0.0


class QuadraticObjective(FiniteSumObjective):
    """Components 1/2 x^T diag(a) x + <b_i, x> with sum_i b_i = 0, minimum 0 at the origin."""

    def __init__(self, a_diag: np.ndarray, offsets: np.ndarray) -> None:
        self.a_diag = a_diag
        self.offsets = offsets
        self.n, self.dim = offsets.shape
        self._offset_mean = offsets.mean(axis=0)

    def component_values(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        b = self.offsets if idx is None else self.offsets[idx]
        return 0.5 * float(x @ (self.a_diag * x)) + b @ x

    def component_gradients(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        b = self.offsets if idx is None else self.offsets[idx]
        return self.a_diag * x + b

    def full_gradient(self, x: np.ndarray) -> np.ndarray:
        return self.a_diag * x + self._offset_mean

    def full_values(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        quad = 0.5 * np.einsum("ij,j,ij->i", points, self.a_diag, points)
        return quad + points @ self._offset_mean

    def lower_bound(self) -> Optional[float]:
        return 0.0


class ShiftedObjective(FiniteSumObjective):
    """``base + c`` in every component; optimizer trajectories must not notice."""

    def __init__(self, base: FiniteSumObjective, shift: float) -> None:
        self.base = base
        self.shift = float(shift)
        self.n = base.n
        self.dim = base.dim

    def component_values(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        return self.base.component_values(idx, x) + self.shift

    def component_gradients(self, idx: Optional[np.ndarray], x: np.ndarray) -> np.ndarray:
        return self.base.component_gradients(idx, x)

    def lower_bound(self) -> Optional[float]:
        lb = self.base.lower_bound()
        return None if lb is None else lb + self.shift


def make_logistic(features: np.ndarray, labels: np.ndarray, lam: float) -> LogisticObjective:
    features = np.asarray(features, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if features.ndim != 2:
        raise DataError(f"Features must be a 2-D matrix, got shape {features.shape}")
    if features.shape[0] == 0:
        raise EmptyDatasetError("Dataset has no rows")
    if labels.shape != (features.shape[0],):
        raise DataError(
            f"Label vector of shape {labels.shape} does not match {features.shape[0]} feature rows"
        )
    bad = np.flatnonzero(~np.isin(labels, (-1.0, 1.0)))
    if bad.size:
        raise InvalidLabelError(
            f"Labels must be -1 or +1; row {int(bad[0])} has {labels[bad[0]]!r}"
        )
    if lam < 0:
        raise ConfigError(f"lambda must be >= 0, got {lam}")
    return LogisticObjective(features, labels, lam)


def make_quadratic(
    a_diag, noise_sigma: float, n: int, rng: np.random.Generator
) -> QuadraticObjective:
    """Quadratic whose component values deviate from f by exactly ``noise_sigma`` at unit radius.

    The offsets are ``s sqrt(n) Q`` with Q an orthonormal basis of centred Gaussian
    columns, so sum_i b_i = 0 and (1/n) B^T B = s^2 I: the value noise at x is
    s ||x|| and the gradient noise has trace s^2 d.
    """
    a = np.asarray(a_diag, dtype=float)
    if a.ndim != 1 or a.size == 0:
        raise ConfigError("a_diag must be a nonempty vector")
    if np.any(a <= 0):
        raise ConfigError("Quadratic diagonal entries must be positive")
    if n < 1:
        raise ConfigError(f"Component count must be >= 1, got {n}")
    if noise_sigma < 0:
        raise ConfigError(f"noise_sigma must be >= 0, got {noise_sigma}")
    d = a.size
    if noise_sigma == 0:
        return QuadraticObjective(a, np.zeros((n, d)))
    if n < d + 1:
        raise ConfigError(f"Noisy quadratic needs n >= d + 1 components (n={n}, d={d})")
    g = rng.standard_normal((n, d))
    g -= g.mean(axis=0)
    q, _ = np.linalg.qr(g)
    offsets = noise_sigma * np.sqrt(n) * q
    offsets -= offsets.mean(axis=0)
    return QuadraticObjective(a, offsets)


@dataclass(frozen=True)
class TheoryConstants:
    L0: float
    L1: float
    G: float
    sigma0: float
    sigma1: float
    F0: float
    mu_D: float
    dim: int = 1
    estimated: bool = True

    def __post_init__(self) -> None:
        for name in ("L0", "L1", "G", "sigma0", "sigma1", "F0", "mu_D"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise ConfigError(f"Theory constant {name} must be finite and >= 0, got {value}")
        if self.dim < 1:
            raise ConfigError(f"Theory constants need dim >= 1, got {self.dim}")


def _unit_rows(rng: np.random.Generator, k: int, d: int) -> np.ndarray:
    return sample_directions(DirectionDistribution("sphere", d), rng, k)


def estimate_constants(
    obj: FiniteSumObjective,
    probe_points: int,
    rng: np.random.Generator,
    *,
    x0: Optional[np.ndarray] = None,
    dist: Optional[DirectionDistribution] = None,
    f_star: Optional[float] = None,
    probe_radius: float = PROBE_RADIUS,
    mu_samples: int = 100_000,
    max_components: int = 2000,
) -> TheoryConstants:
    """Empirical (lower-bound style) estimates of the constants entering the planner.

    sigma0, sigma1 and G are measured on the sphere of radius ``probe_radius``
    around ``x0``; (L0, L1) come from a non-negative least-squares fit of
    ||grad f(x) - grad f(y)|| / ||x - y|| against ||grad f(x)|| over pairs at
    spread radii.
    """
    if probe_points < 2:
        raise ConfigError(f"probe_points must be >= 2, got {probe_points}")
    d = obj.dim
    center = np.zeros(d) if x0 is None else np.asarray(x0, dtype=float)
    idx = None
    if obj.n > max_components:
        idx = rng.choice(obj.n, size=max_components, replace=False)

    sphere = center + probe_radius * _unit_rows(rng, probe_points, d)
    sigma0_sq = 0.0
    sigma1_sq = 0.0
    g_max = 0.0
    for p in sphere:
        values = obj.component_values(idx, p)
        grads = obj.component_gradients(idx, p)
        f = obj.full_value(p)
        grad = obj.full_gradient(p)
        sigma0_sq = max(sigma0_sq, float(np.mean((values - f) ** 2)))
        sigma1_sq = max(sigma1_sq, float(np.mean(np.sum((grads - grad) ** 2, axis=1))))
        g_max = max(g_max, float(np.max(np.linalg.norm(grads, axis=1))))

    radii = probe_radius * rng.uniform(0.1, 2.0, size=probe_points)
    xs = center + radii[:, None] * _unit_rows(rng, probe_points, d)
    ys = xs + 0.1 * probe_radius * _unit_rows(rng, probe_points, d)
    ratios = np.empty(probe_points)
    grad_norms = np.empty(probe_points)
    for k, (x, y) in enumerate(zip(xs, ys)):
        gx = obj.full_gradient(x)
        ratios[k] = np.linalg.norm(gx - obj.full_gradient(y)) / np.linalg.norm(x - y)
        grad_norms[k] = np.linalg.norm(gx)
    design = np.column_stack([np.ones(probe_points), grad_norms])
    (L0, L1), _ = nnls(design, ratios)

    if f_star is None:
        f_star = obj.lower_bound()
    f0 = obj.full_value(center)
    if f_star is None:
        f_star = min(f0, float(np.min(obj.full_values(sphere))))
        logger.warning("f* unknown; using the smallest probed value %.6g", f_star)
    F0 = max(f0 - f_star, 0.0)

    if dist is None:
        mu_D = fallback_mu(d)
    else:
        g0 = obj.full_gradient(center)
        if not np.any(g0):
            g0 = np.eye(d)[0]
        mu_D = estimate_mu(dist, g0, mu_samples, rng)

    return TheoryConstants(
        L0=float(L0),
        L1=float(L1),
        G=g_max,
        sigma0=float(np.sqrt(sigma0_sq)),
        sigma1=float(np.sqrt(sigma1_sq)),
        F0=float(F0),
        mu_D=float(mu_D),
        dim=d,
        estimated=True,
    )
