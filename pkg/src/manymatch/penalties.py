"""Penalized formulation: penalties, cost accounting, completion, zero pairs.

Edge lists are ``(m, 2)`` int64 arrays of unordered pairs stored with
``i < j``. Functions accept any sequence of pairs and normalize it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .foreign_nn import AnnMap
from .geometry import ColoredPointSet, LpMetric, group_rows


def as_edges(E) -> np.ndarray:
    """Normalize to a sorted, duplicate-free ``(m, 2)`` array with ``i < j``."""
    A = np.asarray(E, dtype=np.int64)
    if A.size == 0:
        return np.zeros((0, 2), dtype=np.int64)
    A = A.reshape(-1, 2)
    A = np.sort(A, axis=1)
    return np.unique(A, axis=0)


def empty_edges() -> np.ndarray:
    return np.zeros((0, 2), dtype=np.int64)


def edge_lengths(S: ColoredPointSet, E, m: LpMetric) -> np.ndarray:
    E = np.asarray(E, dtype=np.int64).reshape(-1, 2)
    if E.shape[0] == 0:
        return np.zeros(0)
    return m.between(S.coords, E[:, 0], E[:, 1])


def total_length(S: ColoredPointSet, E, m: LpMetric) -> float:
    return float(np.sum(edge_lengths(S, E, m)))


@dataclass(frozen=True)
class PenaltyMap:
    """Penalty ``dist(p, ann(p)) / (1 + eps_used)`` for every point."""

    phi: np.ndarray
    ann: AnnMap
    eps_used: float

    @classmethod
    def from_ann(cls, ann: AnnMap, eps: float) -> "PenaltyMap":
        phi = ann.distance / (1.0 + eps)
        phi.setflags(write=False)
        return cls(phi, ann, float(eps))


def covered_mask(n: int, E) -> np.ndarray:
    mask = np.zeros(n, dtype=bool)
    E = np.asarray(E, dtype=np.int64).reshape(-1, 2)
    mask[E[:, 0]] = True
    mask[E[:, 1]] = True
    return mask


def cost_of(S: ColoredPointSet, R, E, pm: PenaltyMap, m: LpMetric) -> float:
    """Edge lengths of ``E`` plus penalties of the points of ``R`` it leaves uncovered."""
    R = np.asarray(R, dtype=np.int64).reshape(-1)
    E = np.asarray(E, dtype=np.int64).reshape(-1, 2)
    ends = np.unique(E)
    if ends.size and not np.all(np.isin(ends, R)):
        raise ContractError("edge endpoint outside the subproblem")
    unc = R[~np.isin(R, ends)]
    return float(np.sum(edge_lengths(S, E, m))) + float(np.sum(pm.phi[unc]))


def complete_cover(S: ColoredPointSet, E, pm: PenaltyMap, m: LpMetric = None) -> np.ndarray:
    """Add ``(p, ann(p))`` for every point ``E`` leaves uncovered."""
    E = as_edges(E)
    cov = covered_mask(S.n, E)
    unc = np.flatnonzero(~cov)
    if unc.size == 0:
        return E
    extra = np.stack([unc, pm.ann.partner[unc]], axis=1)
    return as_edges(np.concatenate([E, extra]))


def zero_pair_preprocess(S: ColoredPointSet, m: LpMetric = None) -> tuple[np.ndarray, np.ndarray]:
    """Cover every point that coincides with a differently-colored point at cost 0.

    Returns ``(zero_edges, residual)``. Within a group of coincident points
    with several colors, the first point is joined to every point of another
    color and every other point of its own color is joined to the first
    foreign point of the group.
    """
    if S.n == 0:
        return empty_edges(), np.zeros(0, dtype=np.int64)
    edges = []
    done = np.zeros(S.n, dtype=bool)
    col = S.colors
    for grp in group_rows(S.coords):
        if grp.size < 2:
            continue
        cg = col[grp]
        if np.all(cg == cg[0]):
            continue
        a = grp[0]
        b = grp[np.argmax(cg != cg[0])]
        for x in grp[1:]:
            edges.append((a, x) if col[x] != col[a] else (x, b))
        done[grp] = True
    return as_edges(edges) if edges else empty_edges(), np.flatnonzero(~done)


@dataclass(frozen=True)
class PenalizedInstance:
    """A point set together with its metric and penalties; the context of every subproblem."""

    points: ColoredPointSet
    metric: LpMetric
    penalties: PenaltyMap

    @property
    def phi(self) -> np.ndarray:
        return self.penalties.phi

    def cost(self, R, E) -> float:
        return cost_of(self.points, R, E, self.penalties, self.metric)
