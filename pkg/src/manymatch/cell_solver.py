"""Well-structured subproblems solved through a cell-level integer program.

Points of a subproblem are bucketed into tiny same-colored cells. A solution
is described at cell granularity by ``f`` (edge counts between cell pairs)
and ``g`` (uncovered-point counts per cell); the cheapest valid ``(f, g)``
under rounded integer costs is found exactly and turned back into edges.

Cell side-length. Materializing ``r^d`` cells of the worst-case subdivision is
hopeless, but every inequality the analysis relies on only needs each cell's
diameter to be at most ``min_penalty / ceil(44/eps)``. The side is therefore
the largest power-of-two fraction of the subproblem's bounding cube meeting
that diameter bound under the active norm, and only nonempty cells are kept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .errors import ContractError
from .geometry import CellKey, LpMetric, bounding_cube_side, ceil_over, group_order
from .ip_solver import IntegerProgram, solve_ip
from .penalties import PenalizedInstance, as_edges, empty_edges

_BRUTE_PAIRS_MAX_CELLS = 300


@dataclass(frozen=True)
class CellSummary:
    key: CellKey
    color: int
    count: int
    phi_min: float
    center: tuple[float, ...]


@dataclass
class CellLayout:
    """Nonempty cells of one subproblem, stored column-wise."""

    side: float
    origin: np.ndarray
    keys: np.ndarray
    color: np.ndarray
    count: np.ndarray
    phi_min: np.ndarray
    centers: np.ndarray
    members: list[np.ndarray]
    cell_of: dict[int, int]

    def __len__(self):
        return len(self.count)

    def summaries(self) -> list[CellSummary]:
        return [
            CellSummary(tuple(int(t) for t in self.keys[c]), int(self.color[c]), int(self.count[c]),
                        float(self.phi_min[c]), tuple(float(v) for v in self.centers[c]))
            for c in range(len(self))
        ]


def cell_side(Q_coords: np.ndarray, phi_min: float, eps: float, m: LpMetric) -> float:
    target = phi_min / (ceil_over(44, eps) * m.unit_cube_diameter(Q_coords.shape[1]))
    W = bounding_cube_side(Q_coords)
    if W <= target:
        return W if W > 0 else target
    side = W * 2.0 ** -math.ceil(math.log2(W / target))
    while side > target:
        side /= 2.0
    while side * 2.0 <= target:
        side *= 2.0
    return side


def build_cells(inst: PenalizedInstance, Q, eps: float, side: float | None = None) -> CellLayout:
    Q = np.asarray(Q, dtype=np.int64)
    X = inst.points.coords[Q]
    phi = inst.phi[Q]
    col = inst.points.colors[Q]
    if side is None:
        side = cell_side(X, float(phi.min()), eps, inst.metric)
    origin = X.min(axis=0)
    keys = np.floor((X - origin) / side).astype(np.int64)
    order, starts = group_order(keys)
    sc = col[order]
    if np.any(np.minimum.reduceat(sc, starts) != np.maximum.reduceat(sc, starts)):
        raise ContractError("a cell holds points of two colors; the subproblem is not well-structured")
    ckeys = keys[order[starts]]
    color = sc[starts].astype(np.int64)
    count = np.diff(np.append(starts, len(order))).astype(np.int64)
    pmin = np.minimum.reduceat(phi[order], starts)
    members = np.split(Q[order], starts[1:])
    cell_of = dict(zip(Q[order].tolist(), np.repeat(np.arange(len(starts)), count).tolist()))
    centers = origin + (ckeys + 0.5) * side
    return CellLayout(side, origin, ckeys, color, count, pmin, centers, members, cell_of)


@dataclass
class AssignmentPair:
    """``f`` on unordered cell pairs ``(a, b)`` with ``a < b``; ``g`` per cell."""

    f: dict[tuple[int, int], int]
    g: np.ndarray


def assignment_of(layout: CellLayout, E) -> AssignmentPair:
    """The pair ``(f_E, g_E)`` describing an edge set at cell granularity."""
    E = np.asarray(E, dtype=np.int64).reshape(-1, 2)
    f: dict[tuple[int, int], int] = {}
    touched = set()
    for p, q in E.tolist():
        a, b = layout.cell_of[p], layout.cell_of[q]
        key = (a, b) if a < b else (b, a)
        f[key] = f.get(key, 0) + 1
        touched.add(p)
        touched.add(q)
    g = layout.count.copy()
    for p in touched:
        g[layout.cell_of[p]] -= 1
    return AssignmentPair(f, g)


def is_valid(layout: CellLayout, pair: AssignmentPair) -> bool:
    cover = pair.g.astype(np.int64).copy()
    if np.any(cover < 0):
        return False
    for (a, b), v in pair.f.items():
        if v < 0:
            return False
        if v == 0:
            continue
        if a == b or layout.color[a] == layout.color[b]:
            return False
        if v > layout.count[a] * layout.count[b]:
            return False
        cover[a] += v
        cover[b] += v
    return bool(np.all(cover >= layout.count))


def pair_cost(pair: AssignmentPair, layout: CellLayout, m: LpMetric) -> float:
    """Cell-level cost: center-to-center edge lengths plus ``g(C) * phi(C)``."""
    total = 0.0
    for (a, b), v in pair.f.items():
        if v:
            total += v * m.distance(layout.centers[a], layout.centers[b])
    return total + float(np.dot(pair.g, layout.phi_min))


@dataclass
class CellProgram:
    program: IntegerProgram
    pairs: np.ndarray
    n_cells: int
    scale: int
    side: float
    extra: dict = field(default_factory=dict)

    def decode(self, values) -> AssignmentPair:
        values = np.asarray(values, dtype=np.int64)
        k = len(self.pairs)
        f = {(int(a), int(b)): int(v) for (a, b), v in zip(self.pairs.tolist(), values[:k].tolist()) if v}
        return AssignmentPair(f, values[k:].copy())


def _candidate_pairs(layout: CellLayout, m: LpMetric, slack: float) -> np.ndarray:
    nc = len(layout)
    C = layout.centers
    if nc <= _BRUTE_PAIRS_MAX_CELLS:
        a, b = np.triu_indices(nc, k=1)
        return np.stack([a, b], axis=1)
    tree = cKDTree(C)
    radii = (2.0 * layout.phi_min + slack) * (1 + 1e-9)
    found = tree.query_ball_point(C, radii, p=m.p, return_sorted=False)
    lens = np.fromiter((len(x) for x in found), dtype=np.int64, count=nc)
    if lens.sum() == 0:
        return np.zeros((0, 2), dtype=np.int64)
    src = np.repeat(np.arange(nc), lens)
    dst = np.concatenate([np.asarray(x, dtype=np.int64) for x in found if len(x)])
    P = np.stack([np.minimum(src, dst), np.maximum(src, dst)], axis=1)
    P = P[P[:, 0] != P[:, 1]]
    return np.unique(P, axis=0)


def build_program(layout: CellLayout, eps: float, m: LpMetric, side: float | None = None) -> CellProgram:
    """Integer program over ``f`` (one variable per kept cell pair) then ``g`` (one per cell).

    Costs are rounded to ``floor(ceil(11/eps) * length / side)``. Pairs whose
    rounded length exceeds the two rounded penalties are dropped: paying both
    penalties is never worse.
    """
    side = layout.side if side is None else side
    scale = ceil_over(11, eps)
    nc = len(layout)
    g_cost = np.floor(scale * layout.phi_min / side).astype(np.int64)
    P = _candidate_pairs(layout, m, side / scale)
    if len(P):
        P = P[layout.color[P[:, 0]] != layout.color[P[:, 1]]]
    if len(P):
        dist = m.between(layout.centers, P[:, 0], P[:, 1])
        f_cost = np.floor(scale * dist / side).astype(np.int64)
        keep = f_cost <= g_cost[P[:, 0]] + g_cost[P[:, 1]]
        P, f_cost = P[keep], f_cost[keep]
    else:
        P = np.zeros((0, 2), dtype=np.int64)
        f_cost = np.zeros(0, dtype=np.int64)
    k = len(P)
    na, nb = layout.count[P[:, 0]], layout.count[P[:, 1]]
    f_ub = np.minimum(na * nb, na + nb)
    # row c: g(c) + sum of f over pairs touching c >= count(c)
    rows = np.concatenate([P[:, 0], P[:, 1], np.arange(nc)])
    cols = np.concatenate([np.arange(k), np.arange(k), k + np.arange(nc)])
    A = sp.csr_matrix((np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(nc, k + nc))
    prog = IntegerProgram(
        np.concatenate([f_cost, g_cost]).astype(np.int64),
        A,
        layout.count.astype(np.int64),
        np.zeros(k + nc, dtype=np.int64),
        np.concatenate([f_ub, layout.count]).astype(np.int64),
    )
    return CellProgram(prog, P, nc, scale, side)


def realize_assignment(Q, layout: CellLayout, pair: AssignmentPair) -> np.ndarray:
    """Edges with ``f_E <= f`` and ``g_E <= g``, preferring not-yet-covered endpoints."""
    if not is_valid(layout, pair):
        raise ContractError("assignment pair violates the validity conditions")
    covered: set[int] = set()
    used: set[tuple[int, int]] = set()
    edges = []
    for (a, b) in sorted(pair.f):
        v = pair.f[(a, b)]
        v = min(v, layout.count[a] * layout.count[b], layout.count[a] + layout.count[b])
        ma, mb = layout.members[a].tolist(), layout.members[b].tolist()
        for _ in range(v):
            oa = [p for p in ma if p not in covered] + [p for p in ma if p in covered]
            ob = [q for q in mb if q not in covered] + [q for q in mb if q in covered]
            for p in oa:
                hit = next((q for q in ob if (min(p, q), max(p, q)) not in used), None)
                if hit is not None:
                    break
            e = (min(p, hit), max(p, hit))
            used.add(e)
            covered.add(p)
            covered.add(hit)
            edges.append(e)
    return as_edges(edges) if edges else empty_edges()


def solve_cell_subproblem(inst: PenalizedInstance, Q, eps: float, stats: dict | None = None,
                          exact: bool = True) -> np.ndarray:
    Q = np.asarray(Q, dtype=np.int64)
    if Q.size < 2 or np.all(inst.points.colors[Q] == inst.points.colors[Q[0]]):
        return empty_edges()
    layout = build_cells(inst, Q, eps)
    cp = build_program(layout, eps, inst.metric)
    sol = solve_ip(cp.program, exact=exact)
    if stats is not None:
        stats["cells"] = stats.get("cells", 0) + len(layout)
        stats["ip_nodes"] = stats.get("ip_nodes", 0) + sol.nodes
        stats["subproblems"] = stats.get("subproblems", 0) + 1
        stats["unproven"] = stats.get("unproven", 0) + (not sol.proven)
    return realize_assignment(Q, layout, cp.decode(sol.values))
