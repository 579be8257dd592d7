"""Validation of an edge list against an instance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ColoredPointSet, LpMetric


@dataclass
class CheckReport:
    uncovered: list[int]
    monochromatic: list[tuple[int, int]]
    duplicates: list[tuple[int, int]]
    invalid: list[tuple[int, int]]
    cost: float

    @property
    def ok(self) -> bool:
        return not (self.uncovered or self.monochromatic or self.duplicates or self.invalid)

    @property
    def violations(self) -> int:
        return len(self.uncovered) + len(self.monochromatic) + len(self.duplicates) + len(self.invalid)

    def as_dict(self) -> dict:
        return {
            "ok": self.ok,
            "cost": self.cost,
            "uncovered": self.uncovered,
            "monochromatic": [list(e) for e in self.monochromatic],
            "duplicates": [list(e) for e in self.duplicates],
            "invalid": [list(e) for e in self.invalid],
        }


def check(S: ColoredPointSet, E, m: LpMetric = LpMetric()) -> CheckReport:
    """Report uncovered points, same-color edges, repeated edges and the recomputed cost.

    Self-loops and out-of-range indices are listed as invalid and excluded
    from the cost; a repeated edge is counted in the cost once.
    """
    E = np.asarray(E, dtype=np.int64).reshape(-1, 2)
    n = S.n
    in_range = np.all((E >= 0) & (E < n), axis=1) & (E[:, 0] != E[:, 1])
    invalid = [tuple(int(v) for v in e) for e in E[~in_range]]
    G = np.sort(E[in_range], axis=1)
    seen, dups = set(), []
    for a, b in G.tolist():
        if (a, b) in seen:
            dups.append((a, b))
        seen.add((a, b))
    U = np.array(sorted(seen), dtype=np.int64).reshape(-1, 2)
    mono = [tuple(e) for e in U[S.colors[U[:, 0]] == S.colors[U[:, 1]]].tolist()]
    covered = np.zeros(n, dtype=bool)
    covered[U.reshape(-1)] = True
    cost = float(np.sum(m.between(S.coords, U[:, 0], U[:, 1]))) if len(U) else 0.0
    return CheckReport(np.flatnonzero(~covered).tolist(), mono, sorted(set(dups)), invalid, cost)
