import math

import numpy as np
import pytest

from manymatch.errors import InvalidInputError
from manymatch.exact_oracle import exact_penalized
from manymatch.foreign_nn import exact_foreign_nn
from manymatch.geometry import ColoredPointSet, LpMetric
from manymatch.penalties import PenalizedInstance, PenaltyMap
from manymatch.shifting import (FastGrid, balanced_edge_offsets, compatible_offsets, level_grid_size, level_plan,
                                log_phi, reduce_levels, reduce_space, space_grid_ratio, space_plan)

M = LpMetric(2)


def instance(X, colors, eps_used=0.0):
    S = ColoredPointSet(X, colors)
    return PenalizedInstance(S, M, PenaltyMap.from_ann(exact_foreign_nn(S, M), eps_used))


def exact_subsolver(inst):
    return lambda R: exact_penalized(inst.points, R, inst.phi, inst.metric).edges


def test_log_phi_examples():
    assert math.isclose(log_phi(36, 0.5), 2)
    assert log_phi(1, 0.3) == 0
    assert math.isclose(log_phi(6, 0.5), 1)
    with pytest.raises(InvalidInputError):
        log_phi(0, 0.5)
    with pytest.raises(InvalidInputError):
        log_phi(1, 1.5)


def test_grid_parameters():
    assert level_grid_size(0.5) == 6
    assert level_grid_size(0.5 / 6) == 36
    assert space_grid_ratio(2, 0.5) == 16
    assert space_grid_ratio(3, 1.0) == 12


def test_balanced_edge_offsets_examples():
    assert balanced_edge_offsets(0.5, 1.2, 6) == {2, 3, 4, 5, 6}
    assert balanced_edge_offsets(0.7, 0.7, 9) == set(range(1, 10))


def test_balanced_edges_share_most_level_offsets():
    rng = np.random.default_rng(1)
    for _ in range(2000):
        w = int(rng.integers(2, 13))
        a = float(rng.uniform(-20, 20))
        b = a + float(rng.uniform(-1, 1))
        assert len(balanced_edge_offsets(a, b, w)) >= w - 1


@pytest.mark.parametrize("d", [1, 2])
def test_compatible_tuples_bound(d):
    rng = np.random.default_rng(d)
    for _ in range(100):
        r = int(rng.integers(3, 9))
        phi = float(rng.uniform(0.1, 3))
        x = rng.uniform(-50, 50, d)
        v = rng.normal(size=d)
        y = x + v / np.linalg.norm(v) * rng.uniform(0, 2 * phi)
        assert len(compatible_offsets(x, y, phi, r)) >= (r - 1) ** d


def test_level_plan_singleton_and_trivial():
    inst = instance(np.array([[0.0], [1.0], [2.0], [3.0]]), [0, 1, 0, 1])
    plan = level_plan(inst, np.arange(4), 0.5)
    # all penalties equal: every offset induces the single-part partition
    assert len(plan.partitions) == 1 and plan.offsets_tried == 6
    assert [p.tolist() for p in plan.partitions[0].parts] == [[0, 1, 2, 3]]


def test_reduce_levels_singleton():
    inst = instance(np.array([[0.0], [1.0]]), [0, 1])
    calls = []

    def sub(R):
        calls.append(R.tolist())
        return np.zeros((0, 2), dtype=np.int64)

    E = reduce_levels(inst, np.array([0]), 0.5, sub)
    assert E.size == 0 and calls == [[0]]
    assert math.isclose(inst.cost([0], E), 1.0)


def test_reduce_levels_against_oracle():
    rng = np.random.default_rng(4)
    for trial in range(8):
        X = rng.random((10, 2)) * rng.choice([1, 30], size=(10, 1))
        inst = instance(X, rng.integers(0, 3, 10))
        R = np.arange(10)
        opt = exact_penalized(inst.points, R, inst.phi).cost
        E = reduce_levels(inst, R, 0.5, exact_subsolver(inst))
        assert inst.cost(R, E) <= (1 + 0.5 / 3) * opt * (1 + 1e-9)


def test_reduce_space_against_oracle():
    rng = np.random.default_rng(6)
    for trial in range(8):
        X = rng.random((12, 1)) * 10
        inst = instance(X, rng.integers(0, 2, 12))
        if len(np.unique(inst.points.colors)) < 2:
            continue
        R = np.arange(12)
        opt = exact_penalized(inst.points, R, inst.phi).cost
        E = reduce_space(inst, R, 1.0, exact_subsolver(inst))
        assert inst.cost(R, E) <= (1 + 1 / 4) * opt * (1 + 1e-9)


def test_reduce_space_two_points_exhaustive():
    inst = instance(np.array([[0.0, 0.0], [3.0, 0.0]]), [0, 1])
    R = np.arange(2)
    plan = space_plan(inst, R, 1.0)
    assert plan.nominal_offsets == space_grid_ratio(2, 1.0) ** 2
    opt = exact_penalized(inst.points, R, inst.phi).cost
    E = reduce_space(inst, R, 1.0, exact_subsolver(inst))
    assert inst.cost(R, E) <= (1 + 1 / 4) * opt


def test_plans_are_partitions_and_respect_widths():
    rng = np.random.default_rng(7)
    inst = instance(rng.random((80, 2)) * 5, rng.integers(0, 3, 80))
    R = np.arange(80)
    for plan in (level_plan(inst, R, 0.5), space_plan(inst, R, 0.5)):
        for part in plan.partitions:
            assert sorted(np.concatenate(part.parts).tolist()) == list(range(80))
    sp_plan = space_plan(inst, R, 0.5)
    for part in sp_plan.partitions:
        for Q in part.parts:
            X = inst.points.coords[Q]
            assert np.all(X.max(axis=0) - X.min(axis=0) <= sp_plan.w)
    lp_plan = level_plan(inst, R, 0.5)
    for part in lp_plan.partitions:
        for Q in part.parts:
            ratio = inst.phi[Q].max() / inst.phi[Q].min()
            assert ratio <= (3 / 0.5) ** lp_plan.w * (1 + 1e-9)


def test_certified_space_offsets_in_lex_order():
    rng = np.random.default_rng(9)
    inst = instance(rng.random((20, 2)), rng.integers(0, 2, 20))
    plan = space_plan(inst, np.arange(20), 1.0)
    firsts = [p.offsets[0] for p in plan.partitions]
    assert firsts == sorted(firsts)
    assert plan.offsets_tried <= plan.nominal_offsets


def test_fast_plan_samples_and_caps_width():
    rng = np.random.default_rng(10)
    inst = instance(rng.random((3000, 2)), rng.integers(0, 3, 3000))
    R = np.arange(3000)
    fast = FastGrid.draw(inst.points.coords, 0.5, None, np.random.default_rng(0))
    assert fast.sigmas.shape == (8, 2)
    plan = space_plan(inst, R, 0.5, mode="fast", fast=fast)
    assert plan.nominal_offsets == 8
    assert plan.w <= fast.max_width
    again = space_plan(inst, R, 0.5, mode="fast", fast=fast)
    assert [[q.tolist() for q in p.parts] for p in plan.partitions] == \
        [[q.tolist() for q in p.parts] for p in again.partitions]


def test_reduce_levels_monotone():
    rng = np.random.default_rng(12)
    inst = instance(rng.random((14, 2)) * rng.choice([1, 50], size=(14, 1)), rng.integers(0, 3, 14))
    R = np.arange(14)
    sub = exact_subsolver(inst)
    E = reduce_levels(inst, R, 0.5, sub)
    best = inst.cost(R, E)
    for part in level_plan(inst, R, 0.5).partitions:
        union = np.concatenate([sub(Q) for Q in part.parts])
        assert best <= inst.cost(R, union) + 1e-12
