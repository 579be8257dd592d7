"""Exact minimum-cost many-to-many matching for small instances.

Three independent exact methods:

* ``covering``: a 0/1 covering program over candidate edges, solved with the
  package's branch and bound. Edges longer than the sum of their endpoints'
  nearest-foreign distances never appear in an optimum and are dropped.
* ``matching``: the classical reduction of minimum edge cover to maximum
  weight matching on edge gains ``phi(u) + phi(v) - |uv|`` (networkx blossom).
* :func:`star_forest_search`: dynamic programming over all partitions of the
  point set into stars, the shape every optimal edge cover takes. Exponential,
  used only as ground truth for tiny instances.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import InvalidInputError
from .foreign_nn import exact_foreign_nn
from .geometry import ColoredPointSet, LpMetric
from .ip_solver import IntegerProgram, solve_ip
from .penalties import as_edges, edge_lengths, empty_edges

DEFAULT_CAP = 40
STAR_FOREST_CAP = 14
METHOD_NAMES = {"covering": "coveringBnB", "coveringBnB": "coveringBnB",
                "matching": "reductionToMatching", "reductionToMatching": "reductionToMatching"}


@dataclass(frozen=True)
class ExactResult:
    edges: np.ndarray
    cost: float
    method: str


def candidate_edges(S: ColoredPointSet, m: LpMetric, phi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bichromatic pairs with ``|e| <= phi(p) + phi(q)`` and their lengths."""
    a, b = np.triu_indices(S.n, k=1)
    keep = S.colors[a] != S.colors[b]
    a, b = a[keep], b[keep]
    L = m.between(S.coords, a, b)
    ok = L <= (phi[a] + phi[b]) * (1 + 1e-12)
    return np.stack([a[ok], b[ok]], axis=1), L[ok]


def _covering(S, m, phi):
    E, L = candidate_edges(S, m, phi)
    n = S.n
    k = len(E)
    rows = [dict() for _ in range(n)]
    for j, (p, q) in enumerate(E.tolist()):
        rows[p][j] = 1
        rows[q][j] = 1
    prog = IntegerProgram.build(L.astype(np.float64), rows, np.ones(n, dtype=np.int64),
                                np.zeros(k, dtype=np.int64), np.ones(k, dtype=np.int64))
    sol = solve_ip(prog, block_enum_limit=1 << 12)
    chosen = E[sol.values.astype(bool)]
    return as_edges(chosen)


def _matching(S, m, nn):
    phi = nn.distance
    E, L = candidate_edges(S, m, phi)
    G = nx.Graph()
    G.add_nodes_from(range(S.n))
    for (p, q), length in zip(E.tolist(), L.tolist()):
        gain = phi[p] + phi[q] - length
        if gain > 0:
            G.add_edge(p, q, weight=gain)
    M = nx.max_weight_matching(G, maxcardinality=False)
    matched = set()
    edges = []
    for p, q in M:
        edges.append((p, q))
        matched.update((p, q))
    for p in range(S.n):
        if p not in matched:
            edges.append((p, int(nn.partner[p])))
    return as_edges(edges)


def exact_mmm(S: ColoredPointSet, m: LpMetric = LpMetric(), cap: int = DEFAULT_CAP,
              method: str = "covering") -> ExactResult:
    """Globally optimal covering edge set of ``S``."""
    if S.n > cap:
        raise InvalidInputError(f"exact oracle limited to n <= {cap}, got {S.n}")
    name = METHOD_NAMES.get(method)
    if name is None:
        raise InvalidInputError(f"unknown exact method {method!r}")
    if S.n == 0:
        return ExactResult(empty_edges(), 0.0, name)
    nn = exact_foreign_nn(S, m)
    edges = _covering(S, m, nn.distance) if name == "coveringBnB" else _matching(S, m, nn)
    return ExactResult(edges, float(np.sum(edge_lengths(S, edges, m))), name)


def exact_penalized(S: ColoredPointSet, R, phi, m: LpMetric = LpMetric(), cap: int = DEFAULT_CAP) -> ExactResult:
    """Optimum of the penalized problem on the subset ``R``.

    Minimizes edge lengths inside ``R`` plus ``phi`` of every point of ``R``
    left uncovered. Returns global indices; ``cost`` is the penalized cost.
    """
    R = np.asarray(R, dtype=np.int64)
    if R.size > cap:
        raise InvalidInputError(f"exact oracle limited to n <= {cap}, got {R.size}")
    if R.size == 0:
        return ExactResult(empty_edges(), 0.0, "penalized")
    sub = S.subset(R)
    ph = np.asarray(phi, dtype=np.float64)[R]
    E, L = candidate_edges(sub, m, ph)
    n, k = sub.n, len(E)
    rows = [{k + i: 1} for i in range(n)]
    for j, (p, q) in enumerate(E.tolist()):
        rows[p][j] = 1
        rows[q][j] = 1
    obj = np.concatenate([L, ph]).astype(np.float64)
    prog = IntegerProgram.build(obj, rows, np.ones(n, dtype=np.int64),
                                np.zeros(k + n, dtype=np.int64), np.ones(k + n, dtype=np.int64))
    sol = solve_ip(prog)
    chosen = as_edges(R[E[sol.values[:k].astype(bool)]]) if k else empty_edges()
    return ExactResult(chosen, float(sol.objective), "penalized")


def star_forest_search(S: ColoredPointSet, m: LpMetric = LpMetric()) -> ExactResult:
    """Optimum by exhaustive search over star forests (subset dynamic programming)."""
    n = S.n
    if n > STAR_FOREST_CAP:
        raise InvalidInputError(f"star-forest search limited to n <= {STAR_FOREST_CAP}")
    if n == 0:
        return ExactResult(empty_edges(), 0.0, "starForest")
    exact_foreign_nn(S, m)  # feasibility
    X, col = S.coords, S.colors
    D = m.rows(X[:, None, :] - X[None, :, :])
    full = (1 << n) - 1
    # star[mask] = cheapest star spanning exactly mask (>= 2 points), with its center
    star_cost = np.full(1 << n, np.inf)
    star_center = np.full(1 << n, -1, dtype=np.int64)
    for mask in range(1, 1 << n):
        if mask & (mask - 1) == 0:
            continue
        pts = [i for i in range(n) if mask >> i & 1]
        for c in pts:
            if all(col[j] != col[c] for j in pts if j != c):
                cost = sum(D[c, j] for j in pts if j != c)
                if cost < star_cost[mask]:
                    star_cost[mask], star_center[mask] = cost, c
    best = np.full(1 << n, np.inf)
    choice = np.zeros(1 << n, dtype=np.int64)
    best[0] = 0.0
    for mask in range(1, full + 1):
        low = mask & -mask
        rest = mask ^ low
        sub = rest
        while True:
            block = sub | low
            if star_cost[block] < np.inf:
                v = star_cost[block] + best[mask ^ block]
                if v < best[mask]:
                    best[mask], choice[mask] = v, block
            if sub == 0:
                break
            sub = (sub - 1) & rest
    edges = []
    mask = full
    while mask:
        block = int(choice[mask])
        c = int(star_center[block])
        edges.extend((c, j) for j in range(n) if block >> j & 1 and j != c)
        mask ^= block
    E = as_edges(edges)
    return ExactResult(E, float(np.sum(edge_lengths(S, E, m))), "starForest")
