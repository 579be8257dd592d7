"""Seeded random instances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError
from .geometry import ColoredPointSet

DISTRIBUTIONS = ("uniform", "clustered", "bichromaticGrid")
CLUSTER_RADIUS = 0.05


@dataclass(frozen=True)
class InstanceSpec:
    n: int
    d: int = 2
    colors: int = 2
    distribution: str = "uniform"
    seed: int = 0


def _color_labels(n: int, k: int, rng: np.random.Generator) -> np.ndarray:
    # one point of every color, the rest uniform, then shuffled
    col = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    return rng.permutation(col)


def cluster_centers(spec: InstanceSpec) -> np.ndarray:
    """Centers used by the clustered distribution (``max(2, round(sqrt(n)/2))`` of them)."""
    rng = np.random.default_rng([spec.seed, 1])
    k = max(2, int(round(np.sqrt(spec.n) / 2)))
    return rng.random((k, spec.d))


def gen_instance(spec: InstanceSpec) -> ColoredPointSet:
    n, d, k = spec.n, spec.d, spec.colors
    if n < 1 or d < 1:
        raise InvalidInputError("need n >= 1 and d >= 1")
    if k < 2:
        raise InvalidInputError("need at least two colors")
    if k > n:
        raise InvalidInputError(f"{k} colors cannot all appear among {n} points")
    rng = np.random.default_rng(spec.seed)
    if spec.distribution == "uniform":
        X = rng.random((n, d))
        col = _color_labels(n, k, rng)
    elif spec.distribution == "clustered":
        C = cluster_centers(spec)
        which = rng.integers(0, len(C), n)
        # uniform in the ball of radius CLUSTER_RADIUS (sup-norm ball for simplicity)
        X = C[which] + rng.uniform(-CLUSTER_RADIUS, CLUSTER_RADIUS, (n, d))
        col = _color_labels(n, k, rng)
    elif spec.distribution == "bichromaticGrid":
        # integer lattice filled in row-major order, colors alternating by parity
        side = int(np.ceil(n ** (1.0 / d)))
        idx = np.arange(n)
        X = np.stack(np.unravel_index(idx, (side,) * d), axis=1).astype(np.float64)
        col = X.sum(axis=1).astype(np.int64) % k
        if len(np.unique(col)) < k:
            col = idx % k
    else:
        raise InvalidInputError(f"distribution must be one of {DISTRIBUTIONS}")
    return ColoredPointSet(X, col)
