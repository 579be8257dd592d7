"""Shifting reductions over penalty levels and over space.

Both reductions enumerate a family of grid offsets, split the working set by
the grid of each offset, solve every part independently and keep the
cheapest union. Offsets that induce the same partition are evaluated once;
the first offset (in enumeration order) reaching the minimum cost wins.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidInputError
from .geometry import ShiftedGrid, bounding_cube_side, canonical_labels, ceil_over, group_rows
from .penalties import PenalizedInstance, as_edges, empty_edges

Subsolver = Callable[[np.ndarray], np.ndarray]

FAST_PART_TARGET = 1024


def level_grid_size(eps: float) -> int:
    return ceil_over(3, eps)


def space_grid_ratio(d: int, eps: float) -> int:
    return ceil_over(4 * d, eps)


def log_phi(phi_val, eps: float):
    """Penalty level: logarithm of the penalty in base ``3/eps``."""
    if not 0 < eps <= 1:
        raise InvalidInputError("eps must lie in (0, 1]")
    arr = np.asarray(phi_val, dtype=np.float64)
    if np.any(arr <= 0):
        raise InvalidInputError("penalty levels need strictly positive penalties")
    out = np.log(arr) / math.log(3.0 / eps)
    return float(out) if out.ndim == 0 else out


def balanced_edge_offsets(level_p: float, level_q: float, w: int) -> set[int]:
    """Offsets ``i`` in ``1..w`` whose level grid puts both values in one cell."""
    out = set()
    for i in range(1, w + 1):
        if math.floor((level_p - i) / w) == math.floor((level_q - i) / w):
            out.add(i)
    return out


def compatible_offsets(x, y, phi_max: float, r: int) -> list[tuple[int, ...]]:
    """All ``sigma`` in ``[r]^d`` whose space grid puts ``x`` and ``y`` in one cell (exhaustive)."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    out = []
    for sigma in itertools.product(range(1, r + 1), repeat=len(x)):
        g = space_grid(phi_max, r, sigma)
        if np.array_equal(g.keys(x[None, :])[0], g.keys(y[None, :])[0]):
            out.append(sigma)
    return out


@dataclass
class Partition:
    """One distinct partition of the working set and the offsets inducing it."""

    offsets: list
    parts: list[np.ndarray]


@dataclass
class LevelPartitionPlan:
    w: int
    partitions: list[Partition]

    @property
    def offsets_tried(self) -> int:
        return sum(len(p.offsets) for p in self.partitions)


@dataclass
class SpacePartitionPlan:
    r: int
    phi_max: float
    w: float
    mode: str
    partitions: list[Partition]
    nominal_offsets: int = 0

    @property
    def offsets_tried(self) -> int:
        return sum(len(p.offsets) for p in self.partitions)


def _parts_from_labels(R: np.ndarray, labels: np.ndarray) -> list[np.ndarray]:
    return [R[g] for g in group_rows(labels)]


def level_plan(inst: PenalizedInstance, R, eps: float) -> LevelPartitionPlan:
    R = np.asarray(R, dtype=np.int64)
    w = level_grid_size(eps)
    levels = log_phi(inst.phi[R], eps) if R.size else np.zeros(0)
    levels = np.atleast_1d(levels)
    seen: dict[bytes, Partition] = {}
    ordered = []
    for i in range(1, w + 1):
        keys = np.floor((levels - i) / w).astype(np.int64)
        lab = canonical_labels(keys)
        tag = lab.tobytes()
        if tag in seen:
            seen[tag].offsets.append(i)
            continue
        part = Partition([i], _parts_from_labels(R, lab))
        seen[tag] = part
        ordered.append(part)
    return LevelPartitionPlan(w, ordered)


def space_grid(phi_max: float, r: int, sigma) -> ShiftedGrid:
    """Grid of cell-size ``2 r phi_max`` with offset ``sigma * 2 phi_max``."""
    step = 2.0 * phi_max
    return ShiftedGrid(r * step, tuple(float(k) * step for k in sigma))


@dataclass(frozen=True)
class FastGrid:
    """Offsets and width cap shared by every fast-mode space reduction of one solve.

    Sharing them keeps the grid independent of the part being split, so parts
    common to several level partitions are cut identically and solved once.
    The width cap keeps cells near ``FAST_PART_TARGET`` points on average.
    """

    sigmas: np.ndarray
    max_width: float

    @classmethod
    def draw(cls, X: np.ndarray, eps: float, samples: int | None = None,
             rng: np.random.Generator | None = None) -> "FastGrid":
        n, d = X.shape
        if rng is None:
            rng = np.random.default_rng(0)
        k = samples if samples is not None else 4 * d
        r = space_grid_ratio(d, eps)
        sig = rng.integers(1, r + 1, size=(k, d))
        W = bounding_cube_side(X) if n else 0.0
        cap = W * (FAST_PART_TARGET / n) ** (1.0 / d) if n > FAST_PART_TARGET and W > 0 else math.inf
        return cls(sig, cap)


def space_plan(inst: PenalizedInstance, R, eps: float, mode: str = "certified",
               samples: int | None = None, rng: np.random.Generator | None = None,
               fast: "FastGrid | None" = None) -> SpacePartitionPlan:
    R = np.asarray(R, dtype=np.int64)
    X = inst.points.coords[R]
    d = inst.points.dim
    r = space_grid_ratio(d, eps)
    phi_max = float(inst.phi[R].max())
    step = 2.0 * phi_max
    w = r * step
    if mode == "certified":
        # per-axis patterns, deduplicated, then combined; the product is
        # walked in lexicographic order of each pattern's first offset
        axis_patterns = []
        for j in range(d):
            pats: dict[bytes, tuple[int, np.ndarray]] = {}
            for k in range(1, r + 1):
                lab = canonical_labels(np.floor((X[:, j] - k * step) / w).astype(np.int64))
                pats.setdefault(lab.tobytes(), (k, lab))
            axis_patterns.append(list(pats.values()))
        sigmas_per_combo = (
            (tuple(p[0] for p in combo), np.stack([p[1] for p in combo], axis=1))
            for combo in itertools.product(*axis_patterns)
        )
        nominal = r**d
    elif mode == "fast":
        if fast is None:
            fast = FastGrid.draw(inst.points.coords[R], eps, samples, rng)
        sig = fast.sigmas
        k = len(sig)
        w = min(w, fast.max_width)
        step = w / r
        sigmas_per_combo = (
            (tuple(int(v) for v in s), np.floor((X - s * step) / w).astype(np.int64)) for s in sig
        )
        nominal = k
    else:
        raise InvalidInputError(f"unknown mode {mode!r}")
    seen: dict[bytes, Partition] = {}
    ordered = []
    for sigma, keys in sigmas_per_combo:
        lab = canonical_labels(keys)
        tag = lab.tobytes()
        if tag in seen:
            seen[tag].offsets.append(sigma)
            continue
        part = Partition([sigma], _parts_from_labels(R, lab))
        seen[tag] = part
        ordered.append(part)
    return SpacePartitionPlan(r, phi_max, w, mode, ordered, nominal)


@dataclass
class ReductionStats:
    level_offsets: int = 0
    level_partitions: int = 0
    space_offsets: int = 0
    space_partitions: int = 0
    extra: dict = field(default_factory=dict)


def _best_union(inst: PenalizedInstance, partitions: list[Partition], subsolver: Subsolver):
    part_cache: dict[bytes, tuple[np.ndarray, float]] = {}
    best_cost, best_edges = math.inf, empty_edges()
    for partition in partitions:
        total, pieces = 0.0, []
        for part in partition.parts:
            tag = part.tobytes()
            if tag not in part_cache:
                E = as_edges(subsolver(part))
                part_cache[tag] = (E, inst.cost(part, E))
            E, c = part_cache[tag]
            total += c
            pieces.append(E)
        if total < best_cost:
            best_cost = total
            best_edges = np.concatenate(pieces) if pieces else empty_edges()
    return as_edges(best_edges), best_cost


def reduce_levels(inst: PenalizedInstance, R, eps: float, subsolver: Subsolver,
                  stats: ReductionStats | None = None) -> np.ndarray:
    """Best union over the level grids ``Gamma_w(i)``, ``i = 1..ceil(3/eps)``."""
    R = np.asarray(R, dtype=np.int64)
    if R.size == 0:
        return empty_edges()
    plan = level_plan(inst, R, eps)
    if stats is not None:
        stats.level_offsets += plan.offsets_tried
        stats.level_partitions += len(plan.partitions)
    edges, _ = _best_union(inst, plan.partitions, subsolver)
    return edges


def reduce_space(inst: PenalizedInstance, R, eps: float, subsolver: Subsolver,
                 mode: str = "certified", samples: int | None = None,
                 rng: np.random.Generator | None = None,
                 stats: ReductionStats | None = None, fast: FastGrid | None = None) -> np.ndarray:
    """Best union over the shifted space grids of one penalty-level part."""
    R = np.asarray(R, dtype=np.int64)
    if R.size == 0:
        return empty_edges()
    if R.size == 1:
        return as_edges(subsolver(R))
    plan = space_plan(inst, R, eps, mode=mode, samples=samples, rng=rng, fast=fast)
    if stats is not None:
        stats.space_offsets += plan.nominal_offsets
        stats.space_partitions += len(plan.partitions)
    edges, _ = _best_union(inst, plan.partitions, subsolver)
    return edges
