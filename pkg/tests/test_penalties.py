import math

import numpy as np
import pytest

from manymatch.errors import ContractError
from manymatch.foreign_nn import compute_ann, exact_foreign_nn
from manymatch.geometry import ColoredPointSet, LpMetric
from manymatch.penalties import (PenaltyMap, as_edges, complete_cover, cost_of, covered_mask, edge_lengths,
                                 zero_pair_preprocess)

M = LpMetric(2)


def line(xs, colors):
    return ColoredPointSet(np.asarray(xs, dtype=float).reshape(-1, 1), colors)


def pmap(S, eps):
    return PenaltyMap.from_ann(exact_foreign_nn(S, M), eps)


def test_cost_of_examples():
    S = line([0, 1], [0, 1])
    pm = pmap(S, 0.25)
    assert np.allclose(pm.phi, [0.8, 0.8])
    assert math.isclose(cost_of(S, [0, 1], [], pm, M), 1.6)
    assert math.isclose(cost_of(S, [0, 1], [(0, 1)], pm, M), 1.0)
    S3 = line([0, 1, 10], [0, 1, 0])
    pm3 = pmap(S3, 0.25)
    assert np.allclose(pm3.phi, [0.8, 0.8, 7.2])
    assert math.isclose(cost_of(S3, [0, 1, 2], [(0, 1)], pm3, M), 8.2)


def test_cost_of_rejects_foreign_endpoint():
    S = line([0, 1, 10], [0, 1, 0])
    with pytest.raises(ContractError):
        cost_of(S, [0, 1], [(1, 2)], pmap(S, 0.25), M)


def test_complete_cover_examples():
    S = line([0, 1], [0, 1])
    pm = pmap(S, 0.25)
    E = complete_cover(S, [], pm, M)
    assert E.tolist() == [[0, 1]]
    assert edge_lengths(S, E, M).sum() <= 1.25 * 1.6
    assert complete_cover(S, [(1, 0)], pm, M).tolist() == [[0, 1]]
    S3 = line([0, 1, 10], [0, 1, 0])
    E3 = complete_cover(S3, [(0, 1)], pmap(S3, 0.25), M)
    assert E3.tolist() == [[0, 1], [1, 2]]
    assert edge_lengths(S3, E3, M).sum() == 10


def test_zero_pair_examples():
    S = ColoredPointSet([[0.0, 0.0], [0.0, 0.0]], [0, 1])
    Z, rest = zero_pair_preprocess(S)
    assert Z.tolist() == [[0, 1]] and rest.size == 0
    S = line([0, 1, 2], [0, 1, 0])
    Z, rest = zero_pair_preprocess(S)
    assert Z.size == 0 and rest.tolist() == [0, 1, 2]
    S = ColoredPointSet(np.zeros((3, 2)), [0, 1, 2])
    Z, rest = zero_pair_preprocess(S)
    assert Z.tolist() == [[0, 1], [0, 2]] and rest.size == 0


def test_zero_pairs_cover_and_cost_nothing():
    rng = np.random.default_rng(2)
    for _ in range(30):
        X = rng.integers(0, 3, size=(25, 2)).astype(float)
        S = ColoredPointSet(X, rng.integers(0, 3, 25))
        Z, rest = zero_pair_preprocess(S)
        assert edge_lengths(S, Z, M).sum() == 0
        assert np.all(S.colors[Z[:, 0]] != S.colors[Z[:, 1]])
        cov = covered_mask(S.n, Z)
        assert sorted(np.flatnonzero(~cov).tolist()) == rest.tolist()
        # a residual point has no coincident foreign point
        for p in rest:
            same = np.all(X == X[p], axis=1)
            assert np.all(S.colors[same] == S.colors[p])


def test_penalty_sandwich():
    rng = np.random.default_rng(0)
    for eps in (0.05, 0.25, 1.0):
        S = ColoredPointSet(rng.random((300, 2)), rng.integers(0, 3, 300))
        phi = exact_foreign_nn(S, M).distance
        pm = PenaltyMap.from_ann(compute_ann(S, M, eps), eps)
        assert np.all(pm.phi <= phi * (1 + 1e-12))
        assert np.all(phi <= (1 + eps) * pm.phi * (1 + 1e-12))


def test_completion_inequality_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        n = int(rng.integers(2, 60))
        S = ColoredPointSet(rng.random((n, 2)), rng.integers(0, 3, n))
        if len(np.unique(S.colors)) < 2:
            continue
        eps = float(rng.choice([0.1, 0.5]))
        pm = PenaltyMap.from_ann(compute_ann(S, M, eps), eps)
        a, b = np.triu_indices(n, 1)
        bi = np.flatnonzero(S.colors[a] != S.colors[b])
        pick = rng.choice(bi, size=min(len(bi), int(rng.integers(0, n))), replace=False)
        E = np.stack([a[pick], b[pick]], axis=1)
        E2 = complete_cover(S, E, pm, M)
        assert covered_mask(n, E2).all()
        assert np.all(S.colors[E2[:, 0]] != S.colors[E2[:, 1]])
        bound = (1 + eps) * cost_of(S, np.arange(n), E, pm, M)
        assert edge_lengths(S, E2, M).sum() <= bound * (1 + 1e-9)


def test_as_edges_normalizes():
    assert as_edges([(3, 1), (1, 3), (0, 2)]).tolist() == [[0, 2], [1, 3]]
    assert as_edges([]).shape == (0, 2)
