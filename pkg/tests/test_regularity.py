import numpy as np
import pytest

from digraphon import fixtures as F, regularity as R
from digraphon.core import StepDigraphon, uniform
from digraphon.errors import Acyclic, CellBudgetExceeded, UnequalCells
from digraphon.structure import decompose, period_and_classes
from conftest import random_periodic


def test_const_single_cell():
    for c in (0.0, 0.3, 1.0):
        p = R.weak_regular_partition(F.const(c), 0.05)
        assert p.t == 1 and p.compliant and p.iterations == 0
    res = R.cluster_digraph(F.const(0.7), [[0]], d=0.5, epsilon=0.1)
    assert res.digraph == frozenset({(0, 0)})
    assert res.densities[0, 0] == pytest.approx(0.7)


def test_c3_natural_cells():
    g = F.c3()
    res = R.cluster_digraph(g, [[0], [1], [2]], d=0.5, epsilon=0.01)
    assert res.digraph == frozenset({(0, 1), (1, 2), (2, 0)})
    assert res.min_outdegree == 1 and res.condition_iii
    assert res.min_outdegree_bound == pytest.approx((1 / 3 - 0.5 - 0.01) * 3)
    assert R.verify_cluster_digraph(g, res)["all"]


def test_unreachable_density_threshold():
    res = R.cluster_digraph(F.c3(), [[0], [1], [2]], d=1.1, epsilon=0.01)
    assert res.digraph == frozenset() and res.min_outdegree == 0
    # the bound is negative here, so (iii) still holds vacuously
    assert res.condition_iii

def test_condition_iii_failure():
    # every cell pair has density 1/2 but is a checkerboard, so no pair is regular
    g = StepDigraphon(uniform(4), np.tile(np.eye(2), (2, 2)))
    res = R.cluster_digraph(g, [[0, 1], [2, 3]], d=0.3, epsilon=0.01)
    assert res.digraph == frozenset()
    assert res.min_outdegree_bound == pytest.approx((0.5 - 0.3 - 0.01) * 2)
    assert not res.condition_iii
    check = R.verify_cluster_digraph(g, res)
    assert not check["iii"] and not check["all"]


def test_preconditions():
    with pytest.raises(ValueError):
        R.weak_regular_partition(F.c3(), 1.5)
    with pytest.raises(ValueError):
        R.weak_regular_partition(F.c3(), 0.0)
    with pytest.raises(UnequalCells):
        R.cluster_digraph(F.c3(), [[0, 1], [2]], 0.5, 0.1)
    with pytest.raises(UnequalCells):
        R.cluster_digraph(F.c3(), [[0], [1]], 0.5, 0.1)


def test_planted_groups():
    g = F.planted(64, seed=0)
    p = R.weak_regular_partition(g, 0.1)
    assert p.compliant and p.iterations <= p.iteration_bound
    half = set(range(32))
    assert all(set(c) <= half or not set(c) & half for c in p.cells)
    res = R.cluster_digraph(g, p, d=0.5, epsilon=0.1)
    assert R.verify_cluster_digraph(g, res)["all"]


def test_budget_exceeded_carries_partition():
    with pytest.raises(CellBudgetExceeded) as exc:
        R.weak_regular_partition(F.planted(64, seed=0), 0.02, max_cells=16)
    part = exc.value.partition
    assert part is not None and not part.compliant and part.t <= 16


def test_energy_gains(rng):
    for eps in (0.05, 0.02):
        g = F.random_digraphon(rng, 6, equal=True)
        try:
            p = R.weak_regular_partition(g, eps, max_cells=36)
        except CellBudgetExceeded as e:
            p = e.partition
        # every accepted refinement beats the (eps / t)^2 floor; energy never drops below the start
        assert all(x > 0 for x in p.refinement_gains)
        assert min(p.energy) >= p.energy[0] - 1e-15


def test_half_epsilon_partition(rng):
    g = F.random_digraphon(rng, 6, equal=True)
    coarse = R.weak_regular_partition(g, 0.1, max_cells=36)
    fine = R.weak_regular_partition(g, 0.05, max_cells=36)
    res = R.cluster_digraph(g, fine, d=0.3, epsilon=0.05)
    assert (res.deviations < 0.05).all()
    assert (res.deviations < 0.1).all()
    assert fine.t >= coarse.t


def test_shortest_positive_cycle(rng):
    assert R.shortest_positive_cycle(F.const(0.2)) == 1
    assert R.shortest_positive_cycle(F.c3()) == 3
    with pytest.raises(Acyclic):
        R.shortest_positive_cycle(F.ut())
    for d in (2, 3, 4, 5):
        g = random_periodic(rng, d)
        k = R.shortest_positive_cycle(g)
        assert k % period_and_classes(g, decompose(g).components[0]).period == 0
