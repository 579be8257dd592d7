"""Colored point sets, L_p metrics and shifted grids with half-open cells."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

CellKey = tuple[int, ...]


def ceil_over(numerator: float, eps: float) -> int:
    """``ceil(numerator / eps)`` without float noise (``3 / (0.5/6)`` is 36, not 37)."""
    frac = Fraction(numerator).limit_denominator(10**6) / Fraction(eps).limit_denominator(10**6)
    return math.ceil(frac)


@dataclass(frozen=True)
class ColoredPoint:
    coords: tuple[float, ...]
    color: int

    def __post_init__(self):
        if not all(math.isfinite(c) for c in self.coords):
            raise InvalidInputError("coordinates must be finite")
        if self.color < 0:
            raise InvalidInputError("color must be non-negative")


class ColoredPointSet:
    """An immutable set of ``n`` colored points in ``R^d``.

    Coordinates are stored as a read-only ``(n, d)`` float64 array and colors
    as dense integer ids. Indices ``0..n-1`` identify points everywhere else
    in the package.
    """

    __slots__ = ("coords", "colors")

    def __init__(self, coords, colors):
        X = np.array(coords, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise InvalidInputError("coords must be an (n, d) array")
        c = np.array(colors, dtype=np.int64).reshape(-1)
        if len(c) != len(X):
            raise InvalidInputError(f"{len(X)} points but {len(c)} colors")
        if len(X) and not np.all(np.isfinite(X)):
            raise InvalidInputError("coordinates must be finite")
        if len(c) and c.min() < 0:
            raise InvalidInputError("colors must be non-negative")
        X.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "coords", X)
        object.__setattr__(self, "colors", c)

    def __setattr__(self, name, value):
        raise AttributeError("ColoredPointSet is immutable")

    @classmethod
    def from_points(cls, points: Sequence[ColoredPoint]) -> "ColoredPointSet":
        if not points:
            return cls(np.zeros((0, 1)), [])
        dims = {len(p.coords) for p in points}
        if len(dims) != 1:
            raise InvalidInputError("all points must share one dimension")
        return cls([p.coords for p in points], [p.color for p in points])

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def dim(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, i: int) -> ColoredPoint:
        return ColoredPoint(tuple(float(v) for v in self.coords[i]), int(self.colors[i]))

    def subset(self, indices) -> "ColoredPointSet":
        idx = np.asarray(indices, dtype=np.int64)
        return ColoredPointSet(self.coords[idx], self.colors[idx])

    def color_count(self) -> int:
        return int(np.unique(self.colors).size)

    def __repr__(self):
        return f"ColoredPointSet(n={self.n}, d={self.dim}, colors={self.color_count()})"


@dataclass(frozen=True)
class LpMetric:
    p: float = 2.0

    def __post_init__(self):
        if not (math.isfinite(self.p) and self.p >= 1):
            raise InvalidInputError(f"norm exponent must be finite and >= 1, got {self.p}")

    def rows(self, diff: np.ndarray) -> np.ndarray:
        """Norms of the rows of ``diff`` (shape ``(..., d)``).

        Summation runs over the last axis in a fixed order so that a single
        pair and a batch produce bit-identical values.
        """
        diff = np.abs(np.asarray(diff, dtype=np.float64))
        p = self.p
        if p == 1:
            acc = diff[..., 0].copy()
            for j in range(1, diff.shape[-1]):
                acc += diff[..., j]
            return acc
        if p == 2:
            acc = diff[..., 0] * diff[..., 0]
            for j in range(1, diff.shape[-1]):
                acc += diff[..., j] * diff[..., j]
            return np.sqrt(acc)
        acc = diff[..., 0] ** p
        for j in range(1, diff.shape[-1]):
            acc += diff[..., j] ** p
        return acc ** (1.0 / p)

    def distance(self, a, b) -> float:
        return float(self.rows(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)))

    def between(self, X: np.ndarray, i, j) -> np.ndarray:
        return self.rows(X[i] - X[j])

    def unit_cube_diameter(self, d: int) -> float:
        """Diameter of the unit hypercube in ``R^d`` under this norm."""
        return float(d) ** (1.0 / self.p)


def _coords_of(x):
    if isinstance(x, ColoredPoint):
        return np.asarray(x.coords, dtype=np.float64)
    return np.asarray(x, dtype=np.float64).reshape(-1)


def lp_distance(a, b, m: LpMetric = LpMetric()) -> float:
    ca, cb = _coords_of(a), _coords_of(b)
    if ca.shape != cb.shape:
        raise InvalidInputError(f"dimension mismatch: {ca.size} vs {cb.size}")
    return m.distance(ca, cb)


@dataclass(frozen=True)
class ShiftedGrid:
    """Grid with cell-size ``w`` whose hyperplanes pass through ``offset``.

    Cells are ``prod [t_i w + k_i, (t_i + 1) w + k_i)``: closed below, open above.
    """

    w: float
    offset: tuple[float, ...] = field(default=(0.0,))

    def __post_init__(self):
        if not (self.w > 0 and math.isfinite(self.w)):
            raise InvalidInputError("grid cell-size must be positive and finite")
        object.__setattr__(self, "offset", tuple(float(k) for k in np.atleast_1d(self.offset)))

    @property
    def dim(self) -> int:
        return len(self.offset)

    def keys(self, X) -> np.ndarray:
        """Integer cell indices of every row of ``X`` as an ``(n, k)`` array."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, 1) if self.dim == 1 else X.reshape(1, -1)
        if X.shape[1] != self.dim:
            raise InvalidInputError(f"grid has dimension {self.dim}, points have {X.shape[1]}")
        return np.floor((X - np.asarray(self.offset)) / self.w).astype(np.int64)

    def cell_bounds(self, key: CellKey) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(key, dtype=np.float64)
        off = np.asarray(self.offset)
        return t * self.w + off, (t + 1) * self.w + off


def cell_index(x, g: ShiftedGrid) -> CellKey:
    x = _coords_of(x)
    if x.size != g.dim:
        raise InvalidInputError(f"grid has dimension {g.dim}, point has {x.size}")
    return tuple(int(t) for t in g.keys(x.reshape(1, -1))[0])


def group_rows(keys: np.ndarray) -> list[np.ndarray]:
    """Group row indices by equal key rows, groups ordered by key.

    Returns a list of index arrays (ascending within each group).
    """
    keys = np.asarray(keys)
    n = keys.shape[0]
    if n == 0:
        return []
    if keys.ndim == 1:
        keys = keys.reshape(-1, 1)
    order, starts = group_order(keys)
    # lexsort is stable, so each group is already ascending
    return np.split(order, starts[1:])


def group_order(keys: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row order sorting equal keys together (ascending key) and each group's start."""
    keys = np.asarray(keys)
    if keys.ndim == 1:
        keys = keys.reshape(-1, 1)
    n = keys.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    order = np.lexsort(keys.T[::-1])
    sk = keys[order]
    change = np.any(sk[1:] != sk[:-1], axis=1)
    starts = np.concatenate([[0], np.flatnonzero(change) + 1])
    return order, starts


def canonical_labels(keys: np.ndarray) -> np.ndarray:
    """Relabel key rows as ``0, 1, ...`` in order of first appearance.

    Two key arrays induce the same partition iff their canonical labels are equal.
    """
    keys = np.asarray(keys)
    if keys.ndim == 1:
        keys = keys.reshape(-1, 1)
    if keys.shape[0] == 0:
        return np.zeros(0, dtype=np.int64)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(len(first))
    return rank[inverse]


def partition_by_grid(S, g: ShiftedGrid) -> dict[CellKey, list[int]]:
    """Map each nonempty cell of ``g`` to the indices of the points/values inside it."""
    X = S.coords if isinstance(S, ColoredPointSet) else np.asarray(S, dtype=np.float64)
    if X.size == 0:
        return {}
    keys = g.keys(X)
    out: dict[CellKey, list[int]] = {}
    for grp in group_rows(keys):
        out[tuple(int(t) for t in keys[grp[0]])] = [int(i) for i in grp]
    return out


def bounding_cube_side(Q) -> float:
    X = Q.coords if isinstance(Q, ColoredPointSet) else np.asarray(Q, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.shape[0] == 0:
        raise InvalidInputError("bounding cube of an empty set is undefined")
    return float(np.max(X.max(axis=0) - X.min(axis=0)))


def remap_labels(labels: Iterable) -> tuple[list[int], list]:
    """Dense ids in first-appearance order, plus the id -> label table."""
    table: dict = {}
    ids = []
    for lab in labels:
        if lab not in table:
            table[lab] = len(table)
        ids.append(table[lab])
    return ids, list(table)
