import numpy as np
import pytest

from digraphon import fixtures as F, structure as S
from digraphon.core import StepDigraphon, support, uniform
from digraphon.errors import NotAComponent, NotFragmented, Unreachable
from conftest import random_periodic
from oracles import period_oracle, reachability, scc_oracle


def test_decompose_matches_oracle(rng):
    for _ in range(60):
        t = int(rng.integers(1, 9))
        g = F.random_digraphon(rng, t, density=float(rng.uniform(0.1, 0.5)))
        dec = S.decompose(g)
        comps, frag = scc_oracle(support(g))
        assert {frozenset(c) for c in dec.components} == comps
        assert set(dec.fragmented) == frag
        # topological: arcs only go forward in the component order
        assert all(a < b for a, b in dec.condensation)
        assert S.verify_decomposition(g, decomposition=dec)


def test_figure2_extended_condensation():
    dec = S.decompose(F.figure2())
    assert dec.components == ((0, 1), (3,))
    assert dec.fragmented == (2,)
    assert dec.condensation == frozenset()
    assert dec.extended_condensation == frozenset({(0, 1)})


def test_reach_sets():
    g = F.figure2()
    assert S.reach(g, [0]) == frozenset({0, 1, 2, 3})
    assert S.reach(g, [3], "in") == frozenset({0, 1, 2, 3})
    assert S.reach(g, [2]) == frozenset({3})
    with pytest.raises(ValueError):
        S.reach(g, [0], "sideways")


def test_period_examples():
    assert S.period_and_classes(F.c3(), [0, 1, 2]).period == 3
    assert S.period_and_classes(F.aperiodic_two_cycle(), [0, 1]).period == 1
    ps = S.period_and_classes(F.chorded_four_cycle(), range(4))
    assert ps.period == 2
    assert ps.classes == ((0, 2), (1, 3))
    with pytest.raises(NotAComponent):
        S.period_and_classes(F.figure2(), [0, 1, 2])


def test_period_matches_oracle(rng):
    for _ in range(40):
        g = F.random_digraphon(rng, int(rng.integers(2, 8)), density=0.35)
        adj = support(g)
        for comp in S.decompose(g).components:
            ps = S.period_and_classes(g, comp)
            assert all(period_oracle(adj, b) == ps.period for b in comp)


def test_planted_period_and_classes(rng):
    for d in (2, 3, 4, 5):
        g = random_periodic(rng, d)
        comp = S.decompose(g).components
        assert len(comp) == 1
        ps = S.period_and_classes(g, comp[0])
        assert ps.period == d
        adj = support(g)
        for u, v in zip(*np.nonzero(adj)):
            assert ps.class_of(v) == (ps.class_of(u) + 1) % d
        if g.t <= S.ORACLE_MAX_T:
            assert S.check_class_uniqueness(g, comp[0])


def test_reachability_profile():
    prof = S.reachability_profile(F.c3(), 0, 2)
    assert prof.eventual_period == 3 and prof.shift == 2 and prof.onset == 1
    assert all(k % 3 == 2 for k in prof.lengths_observed)
    cross = S.reachability_profile(F.figure2(), 0, 3)
    assert cross.eventual_period is None and min(cross.lengths_observed) == 2
    with pytest.raises(Unreachable):
        S.reachability_profile(F.figure2(), 3, 0)
    with pytest.raises(ValueError):
        S.reachability_profile(F.c3(), 0, 1, horizon=5)


def test_reachability_profile_matches_closure(rng):
    for _ in range(20):
        g = F.random_digraphon(rng, int(rng.integers(2, 6)), density=0.4)
        r = reachability(support(g))
        for i in range(g.t):
            for j in range(g.t):
                if r[i, j]:
                    prof = S.reachability_profile(g, i, j)
                    if prof.eventual_period is not None:
                        d, s = prof.eventual_period, prof.shift
                        tail = [k for k in range(prof.onset, prof.horizon + 1)]
                        assert [k for k in tail if k % d == s] == [k for k in prof.lengths_observed if k >= prof.onset]
                else:
                    with pytest.raises(Unreachable):
                        S.reachability_profile(g, i, j)


def test_fragmented_order():
    g = F.ut()
    fo = S.fragmented_order(g, range(3))
    assert fo.order == (0, 1, 2)
    assert fo.respects_order and fo.nilpotent and fo.nilpotency_index == 3
    with pytest.raises(NotFragmented):
        S.fragmented_order(F.figure2(), [1, 2])


def test_fragmented_order_random_dags(rng):
    for _ in range(20):
        t = int(rng.integers(2, 8))
        vals = np.triu(rng.uniform(0, 1, (t, t)) * (rng.random((t, t)) < 0.5), 1)
        perm = rng.permutation(t)
        g = StepDigraphon(F.random_measures(rng, t), vals[np.ix_(perm, perm)])
        fo = S.fragmented_order(g, range(t))
        assert fo.respects_order and fo.nilpotent
        pos = {b: i for i, b in enumerate(fo.order)}
        assert all(pos[u] < pos[v] for u, v in zip(*np.nonzero(support(g))))


def test_cycles_confined(rng):
    assert S.cycles_confined_check(F.figure2())
    for _ in range(15):
        assert S.cycles_confined_check(F.random_digraphon(rng, int(rng.integers(2, 6)), density=0.3))
    with pytest.raises(ValueError):
        S.cycles_confined_check(F.c3(), kmax=9)


def test_single_block_cases():
    loop = F.const(0.5)
    assert S.decompose(loop).components == ((0,),)
    empty = StepDigraphon(uniform(1), np.zeros((1, 1)))
    assert S.decompose(empty).fragmented == (0,)
