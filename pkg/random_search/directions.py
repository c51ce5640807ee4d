"""Search-direction distributions and Monte Carlo estimates of their exploration constant."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

import numpy as np

from .errors import InvalidDimensionError

_CHUNK = 50_000


class DirectionKind(str, Enum):
    SPHERE = "sphere"
    GAUSSIAN = "gaussian"
    COORDINATE = "coordinate"


@dataclass(frozen=True)
class DirectionDistribution:
    kind: DirectionKind
    dim: int

    def __post_init__(self) -> None:
        if int(self.dim) < 1:
            raise InvalidDimensionError(f"Direction dimension must be >= 1, got {self.dim}")
        object.__setattr__(self, "kind", DirectionKind(self.kind))
        object.__setattr__(self, "dim", int(self.dim))

    @classmethod
    def from_name(cls, name: str, dim: int) -> "DirectionDistribution":
        try:
            kind = DirectionKind(name.strip().lower())
        except ValueError:
            choices = ", ".join(k.value for k in DirectionKind)
            raise InvalidDimensionError(
                f"Unknown direction distribution '{name}' (expected one of: {choices})"
            ) from None
        return cls(kind, dim)


@dataclass(frozen=True)
class DirectionSample:
    vector: np.ndarray
    distribution: DirectionDistribution


def sample_directions(
    dist: DirectionDistribution, rng: np.random.Generator, size: int
) -> np.ndarray:
    """Draw ``size`` directions as rows of a ``(size, dim)`` array."""
    d = dist.dim
    if dist.kind is DirectionKind.SPHERE:
        z = rng.standard_normal((size, d))
        norms = np.linalg.norm(z, axis=1)
        zero = norms == 0.0
        while np.any(zero):
            z[zero] = rng.standard_normal((int(zero.sum()), d))
            norms[zero] = np.linalg.norm(z[zero], axis=1)
            zero = norms == 0.0
        return z / norms[:, None]
    if dist.kind is DirectionKind.GAUSSIAN:
        return rng.standard_normal((size, d)) / math.sqrt(d)
    axes = rng.integers(0, d, size=size)
    signs = 2.0 * rng.integers(0, 2, size=size) - 1.0
    out = np.zeros((size, d))
    out[np.arange(size), axes] = signs
    return out


def sample_direction(dist: DirectionDistribution, rng: np.random.Generator) -> DirectionSample:
    return DirectionSample(sample_directions(dist, rng, 1)[0], dist)


def _projection_moments(
    dist: DirectionDistribution, v: np.ndarray, samples: int, rng: np.random.Generator, power: int
) -> Tuple[float, float]:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    v = np.asarray(v, dtype=float)
    if v.shape != (dist.dim,):
        raise InvalidDimensionError(
            f"Vector of shape {v.shape} does not match dimension {dist.dim}"
        )
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        k = min(_CHUNK, samples - done)
        proj = sample_directions(dist, rng, k) @ v
        vals = np.abs(proj) if power == 1 else proj * proj
        total += float(vals.sum())
        total_sq += float((vals * vals).sum())
        done += k
    mean = total / samples
    if samples < 2:
        return mean, float("inf")
    var = max(total_sq / samples - mean * mean, 0.0) * samples / (samples - 1)
    return mean, math.sqrt(var / samples)


def estimate_mu_with_error(
    dist: DirectionDistribution, g: np.ndarray, samples: int, rng: np.random.Generator
) -> Tuple[float, float]:
    """Return (estimate, standard error) of E|<g, s>| / ||g||."""
    norm = float(np.linalg.norm(g))
    if norm == 0.0:
        raise ZeroDivisionError("estimate_mu needs a nonzero reference vector g")
    mean, se = _projection_moments(dist, g, samples, rng, power=1)
    return mean / norm, se / norm


def estimate_mu(
    dist: DirectionDistribution, g: np.ndarray, samples: int, rng: np.random.Generator
) -> float:
    return estimate_mu_with_error(dist, g, samples, rng)[0]


def second_moment_projection_with_error(
    dist: DirectionDistribution, v: np.ndarray, samples: int, rng: np.random.Generator
) -> Tuple[float, float]:
    return _projection_moments(dist, v, samples, rng, power=2)


def second_moment_projection(
    dist: DirectionDistribution, v: np.ndarray, samples: int, rng: np.random.Generator
) -> float:
    """Monte Carlo estimate of E<v, s>^2 (equals ||v||^2 / d on the sphere)."""
    return second_moment_projection_with_error(dist, v, samples, rng)[0]


def fallback_mu(dim: int) -> float:
    """Exploration constant used when estimation is disabled: sqrt(2 / (pi d))."""
    if dim < 1:
        raise InvalidDimensionError(f"Dimension must be >= 1, got {dim}")
    return math.sqrt(2.0 / (math.pi * dim))
