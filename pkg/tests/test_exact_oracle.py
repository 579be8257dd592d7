import math

import numpy as np
import pytest

from manymatch.errors import InfeasibleError, InvalidInputError
from manymatch.exact_oracle import exact_mmm, exact_penalized, star_forest_search
from manymatch.foreign_nn import exact_foreign_nn
from manymatch.geometry import ColoredPointSet, LpMetric
from manymatch.penalties import covered_mask, edge_lengths


def line(xs, colors):
    return ColoredPointSet(np.asarray(xs, dtype=float).reshape(-1, 1), colors)


def random_set(rng, n, d=2, colors=2):
    col = rng.integers(0, colors, n)
    col[:2] = [0, 1]
    return ColoredPointSet(rng.random((n, d)), col)


def test_examples():
    res = exact_mmm(line([0, 10, 1], [0, 0, 1]))
    assert res.edges.tolist() == [[0, 2], [1, 2]]
    assert res.cost == 10
    assert res.method == "coveringBnB"
    assert exact_mmm(line([0, 1], [0, 1])).cost == 1


def test_errors():
    with pytest.raises(InfeasibleError):
        exact_mmm(line([0, 1], [0, 0]))
    with pytest.raises(InvalidInputError):
        exact_mmm(line(range(41), [i % 2 for i in range(41)]))
    with pytest.raises(InvalidInputError):
        exact_mmm(line([0, 1], [0, 1]), method="magic")
    with pytest.raises(InvalidInputError):
        star_forest_search(line(range(15), [i % 2 for i in range(15)]))


@pytest.mark.parametrize("p", [1, 2])
def test_three_methods_agree(p):
    rng = np.random.default_rng(p)
    m = LpMetric(p)
    for _ in range(40):
        S = random_set(rng, int(rng.integers(2, 11)), d=int(rng.integers(1, 3)), colors=int(rng.integers(2, 4)))
        a = exact_mmm(S, m)
        b = exact_mmm(S, m, method="matching")
        c = star_forest_search(S, m)
        assert b.method == "reductionToMatching"
        assert math.isclose(a.cost, c.cost, rel_tol=1e-9)
        assert math.isclose(b.cost, c.cost, rel_tol=1e-9)


def test_output_is_a_cover_with_consistent_cost():
    rng = np.random.default_rng(3)
    for _ in range(30):
        S = random_set(rng, 20, colors=3)
        res = exact_mmm(S)
        assert covered_mask(S.n, res.edges).all()
        assert np.all(S.colors[res.edges[:, 0]] != S.colors[res.edges[:, 1]])
        assert res.cost == float(edge_lengths(S, res.edges, LpMetric()).sum())


def test_minimality_and_local_optimality():
    rng = np.random.default_rng(4)
    m = LpMetric()
    for _ in range(15):
        S = random_set(rng, 9, colors=3)
        res = exact_mmm(S, m)
        E = [tuple(e) for e in res.edges.tolist()]
        a, b = np.triu_indices(S.n, 1)
        others = [(int(x), int(y)) for x, y in zip(a, b) if S.colors[x] != S.colors[y] and (x, y) not in E]
        for k in range(len(E)):
            rest = E[:k] + E[k + 1:]
            if covered_mask(S.n, rest).all():
                pytest.fail("an edge of the optimum is redundant")
            for e in others:
                cand = rest + [e]
                if covered_mask(S.n, cand).all():
                    assert edge_lengths(S, cand, m).sum() >= res.cost * (1 - 1e-12)


def test_translation_and_scaling():
    rng = np.random.default_rng(5)
    for _ in range(15):
        S = random_set(rng, 12, colors=3)
        base = exact_mmm(S).cost
        shift = ColoredPointSet(S.coords + rng.normal(size=2) * 100, S.colors)
        lam = float(rng.uniform(0.1, 10))
        scaled = ColoredPointSet(S.coords * lam, S.colors)
        assert math.isclose(exact_mmm(shift).cost, base, rel_tol=1e-9)
        assert math.isclose(exact_mmm(scaled).cost, lam * base, rel_tol=1e-9)


def test_optimum_uses_no_long_edges():
    rng = np.random.default_rng(6)
    for _ in range(30):
        S = random_set(rng, 10, colors=3)
        phi = exact_foreign_nn(S).distance
        res = star_forest_search(S)
        L = edge_lengths(S, res.edges, LpMetric())
        assert np.all(L <= (phi[res.edges[:, 0]] + phi[res.edges[:, 1]]) * (1 + 1e-12))


def test_penalized_with_exact_penalties_equals_covering_optimum():
    rng = np.random.default_rng(7)
    for _ in range(20):
        S = random_set(rng, 14, colors=3)
        phi = exact_foreign_nn(S).distance
        pen = exact_penalized(S, np.arange(S.n), phi)
        assert math.isclose(pen.cost, exact_mmm(S).cost, rel_tol=1e-9)


def test_penalized_subset_uses_global_indices():
    S = line([0, 1, 5, 5.5], [0, 1, 0, 1])
    phi = np.array([1.0, 1.0, 0.5, 0.5])
    res = exact_penalized(S, [2, 3], phi)
    assert res.edges.tolist() == [[2, 3]]
    assert res.cost == 0.5
