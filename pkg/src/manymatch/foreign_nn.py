"""Nearest foreign neighbors: exact brute force and a (1+eps)-approximate index.

The approximate route follows the delete/query/reinsert scheme over color
classes. The index is a k-d tree (``scipy.spatial.cKDTree``) whose ``eps``
query parameter carries a deterministic worst-case guarantee: every returned
neighbor is within ``(1+eps)`` of the true nearest one. A static tree cannot
delete, so "delete class i" is realized by querying a tree built on the
complement of class i. With many colors that would cost a rebuild per class,
so points are first resolved by exact k-nearest scans over one shared tree and
only the leftovers fall back to complement trees.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import InfeasibleError, InvalidInputError
from .geometry import ColoredPointSet, LpMetric

_COMPLEMENT_TREE_MAX_COLORS = 12
_SCAN_K = (8, 32, 64)


@dataclass(frozen=True)
class AnnMap:
    partner: np.ndarray
    distance: np.ndarray

    def __len__(self):
        return len(self.partner)


def _check_feasible(S: ColoredPointSet):
    if S.n == 0:
        return
    uniq = np.unique(S.colors)
    if uniq.size < 2:
        c = int(uniq[0])
        raise InfeasibleError(
            f"every point has color {c}; no point has a foreign neighbor",
            color=c, points=range(S.n))


def exact_foreign_nn(S: ColoredPointSet, m: LpMetric = LpMetric(), chunk: int = 256) -> AnnMap:
    """Brute-force nearest foreign neighbor of every point (ties: smallest index)."""
    _check_feasible(S)
    X, col = S.coords, S.colors
    n = S.n
    partner = np.empty(n, dtype=np.int64)
    dist = np.empty(n, dtype=np.float64)
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        D = m.rows(X[lo:hi, None, :] - X[None, :, :])
        D[col[lo:hi, None] == col[None, :]] = np.inf
        j = np.argmin(D, axis=1)
        partner[lo:hi] = j
        dist[lo:hi] = D[np.arange(hi - lo), j]
    return AnnMap(partner, dist)


def compute_ann(S: ColoredPointSet, m: LpMetric = LpMetric(), eps: float = 0.1,
                seed: int = 0) -> AnnMap:
    """A ``(1+eps)``-approximate nearest foreign neighbor for every point.

    ``seed`` is accepted for interface stability; the k-d tree is deterministic.
    Reported distances are recomputed with ``m`` so they agree bit-for-bit with
    :func:`exact_foreign_nn` whenever the same partner is chosen.
    """
    if eps < 0:
        raise InvalidInputError("eps must be non-negative")
    _check_feasible(S)
    X, col = S.coords, S.colors
    n = S.n
    partner = np.full(n, -1, dtype=np.int64)
    classes = np.unique(col)

    if classes.size <= _COMPLEMENT_TREE_MAX_COLORS:
        pending_colors = classes
    else:
        tree = cKDTree(X)
        todo = np.arange(n)
        for k in _SCAN_K:
            if todo.size == 0:
                break
            k = min(k, n)
            _, nbr = tree.query(X[todo], k=k, p=m.p)
            nbr = nbr.reshape(len(todo), k)
            foreign = col[nbr] != col[todo][:, None]
            hit = foreign.any(axis=1)
            first = np.argmax(foreign, axis=1)
            partner[todo[hit]] = nbr[hit, first[hit]]
            todo = todo[~hit]
            if k == n:
                break
        pending_colors = np.unique(col[todo])

    for c in pending_colors:
        inside = np.flatnonzero((col == c) & (partner < 0))
        if inside.size == 0:
            continue
        outside = np.flatnonzero(col != c)
        tree = cKDTree(X[outside])
        _, j = tree.query(X[inside], k=1, eps=eps, p=m.p)
        partner[inside] = outside[np.asarray(j, dtype=np.int64)]

    if np.any(col[partner] == col):
        raise AssertionError("foreign-neighbor index returned a same-colored partner")
    dist = m.between(X, np.arange(n), partner)
    return AnnMap(partner, dist)
