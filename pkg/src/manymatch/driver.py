"""End-to-end approximation pipeline.

zero-distance pre-matching -> approximate foreign neighbors -> penalties ->
level shifting -> space shifting -> cell programs -> completion to a cover.

The requested ratio ``1 + eps`` is met by running every stage with an
internal ``eps / 6``; the analysis with approximate penalties only promises
``1 + O(eps)``, so the acceptance suite checks the final ratio directly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .cell_solver import solve_cell_subproblem
from .errors import InvalidInputError
from .foreign_nn import compute_ann
from .geometry import ColoredPointSet, LpMetric
from .penalties import (PenalizedInstance, PenaltyMap, as_edges, complete_cover, covered_mask,
                        edge_lengths, zero_pair_preprocess)
from .shifting import FastGrid, ReductionStats, reduce_levels, reduce_space

EPS_BUDGET = 6
MODES = ("certified", "fast")


@dataclass(frozen=True)
class SolveConfig:
    eps: float = 0.5
    p: float = 2.0
    mode: str = "certified"
    seed: int = 0
    samples: int | None = None

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise InvalidInputError(f"eps must lie in (0, 1], got {self.eps}")
        LpMetric(self.p)
        if self.mode not in MODES:
            raise InvalidInputError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.samples is not None and self.samples < 1:
            raise InvalidInputError("samples must be positive")

    @property
    def eps_internal(self) -> float:
        return self.eps / EPS_BUDGET

    @property
    def metric(self) -> LpMetric:
        return LpMetric(self.p)


@dataclass
class MatchingSolution:
    edges: np.ndarray
    cost: float
    covered: bool
    stats: dict = field(default_factory=dict)


class _Memo:
    """Caches a subsolver by the exact index set it is called on."""

    def __init__(self, fn):
        self.fn = fn
        self.store: dict[bytes, np.ndarray] = {}
        self.hits = 0

    def __call__(self, R):
        R = np.asarray(R, dtype=np.int64)
        tag = R.tobytes()
        if tag in self.store:
            self.hits += 1
        else:
            self.store[tag] = self.fn(R)
        return self.store[tag]


def solve(S: ColoredPointSet, cfg: SolveConfig = SolveConfig()) -> MatchingSolution:
    if S.n == 0:
        raise InvalidInputError("empty instance")
    m = cfg.metric
    eps = cfg.eps_internal
    timings = {}
    t0 = time.perf_counter()

    zero_edges, residual = zero_pair_preprocess(S, m)
    t1 = time.perf_counter()
    timings["zero_pairs"] = t1 - t0

    ann = compute_ann(S, m, eps, seed=cfg.seed)
    pm = PenaltyMap.from_ann(ann, eps)
    inst = PenalizedInstance(S, m, pm)
    t2 = time.perf_counter()
    timings["ann"] = t2 - t1

    rng = np.random.default_rng(cfg.seed)
    red = ReductionStats()
    cell_stats: dict = {}
    cells = _Memo(lambda Q: solve_cell_subproblem(inst, Q, eps, cell_stats,
                                                     exact=cfg.mode == "certified"))
    fast = FastGrid.draw(S.coords, eps, cfg.samples, rng) if cfg.mode == "fast" else None
    space = _Memo(lambda R: reduce_space(inst, R, eps, cells, mode=cfg.mode,
                                         samples=cfg.samples, rng=rng, stats=red, fast=fast))
    core = reduce_levels(inst, residual, eps, space, stats=red)
    t3 = time.perf_counter()
    timings["shifting"] = t3 - t2

    edges = complete_cover(S, np.concatenate([zero_edges, core]), pm, m)
    t4 = time.perf_counter()
    timings["completion"] = t4 - t3
    timings["total"] = t4 - t0

    cost = float(np.sum(edge_lengths(S, edges, m)))
    stats = {
        "n": S.n,
        "d": S.dim,
        "zeroEdges": int(len(zero_edges)),
        "coreEdges": int(len(core)),
        "completionEdges": int(len(edges) - len(as_edges(np.concatenate([zero_edges, core])))),
        "offsetsTried": red.level_offsets + red.space_offsets,
        "levelOffsets": red.level_offsets,
        "levelPartitions": red.level_partitions,
        "spaceOffsets": red.space_offsets,
        "spacePartitions": red.space_partitions,
        "subproblems": cell_stats.get("subproblems", 0),
        "cacheHits": cells.hits,
        "cellsBuilt": cell_stats.get("cells", 0),
        "ipNodes": cell_stats.get("ip_nodes", 0),
        "unprovenSubproblems": cell_stats.get("unproven", 0),
        "elapsed": timings,
    }
    return MatchingSolution(edges, cost, bool(covered_mask(S.n, edges).all()), stats)
