import itertools

import numpy as np
import pytest

from digraphon import fixtures as F, metric
from digraphon.core import Digraph, Kernel, StepDigraphon, uniform
from digraphon.densities import hom_density
from digraphon.errors import EqualBlocksRequired, NotOriented, TooLarge
from oracles import corner_cut_norm


def test_cut_norm_examples():
    assert metric.cut_norm(Kernel(uniform(1), np.array([[-0.3]]))).value == pytest.approx(0.3)
    assert metric.cut_norm(Kernel(uniform(2), np.zeros((2, 2)))).value == 0.0
    # +1 / -1 checkerboard: the best rectangle is a single block pair
    k = Kernel(uniform(2), np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert metric.cut_norm(k).value == pytest.approx(0.25)


def test_certificate_realizes_value(rng):
    for _ in range(30):
        t = int(rng.integers(1, 7))
        k = Kernel(F.random_measures(rng, t), rng.uniform(-1, 1, (t, t)))
        cert = metric.cut_norm(k)
        assert cert.value == metric.certificate_value(k, cert.S, cert.T)
        assert cert.value == pytest.approx(corner_cut_norm(k.measures, k.values), abs=1e-12)


def test_half_order_example():
    u, w = F.half_order(8), F.const(0.5, 8)
    cert = metric.cut_norm(Kernel(u.measures, u.values - w.values))
    assert cert.value >= 1 / 16
    lower, upper = frozenset(range(4)), frozenset(range(4, 8))
    assert metric.certificate_value(Kernel(u.measures, u.values - w.values), lower, upper) == pytest.approx(1 / 8)


def test_heuristic_is_lower_bound_and_deterministic(rng):
    t = 14
    k = Kernel(uniform(t), rng.uniform(-1, 1, (t, t)))
    exact = metric.cut_norm(k).value
    h1 = metric.cut_norm(k, "heuristic", seed=4)
    h2 = metric.cut_norm(k, "heuristic", seed=4)
    assert h1 == h2 and not h1.exact
    assert h1.value <= exact + 1e-15
    assert h1.value >= 0.9 * exact


def test_exact_size_limit():
    with pytest.raises(TooLarge):
        metric.cut_norm(Kernel(uniform(25), np.zeros((25, 25))))


def test_cut_distance_relabeling():
    a = F.figure2()
    perm = [2, 0, 3, 1]
    b = StepDigraphon(a.measures, a.values[np.ix_(perm, perm)])
    cd = metric.cut_distance(a, b)
    assert cd.upper_bound == pytest.approx(0.0, abs=1e-15)
    assert cd.exact


def test_cut_distance_brute_force(rng):
    for _ in range(10):
        t = int(rng.integers(2, 5))
        a = F.random_digraphon(rng, t, equal=True)
        b = F.random_digraphon(rng, t, equal=True)
        best = min(
            corner_cut_norm(a.measures, a.values - b.values[np.ix_(p, p)])
            for p in map(list, itertools.permutations(range(t)))
        )
        assert metric.cut_distance(a, b).upper_bound == pytest.approx(best, abs=1e-12)


def test_cut_distance_unequal_measures():
    a = StepDigraphon(np.array([0.5, 0.5]), np.array([[1.0, 0.0], [0.0, 1.0]]))
    b = StepDigraphon(np.array([0.25, 0.75]), np.array([[1.0, 0.0], [0.0, 1.0]]))
    cd = metric.cut_distance(a, b)
    assert cd.t == 4 and cd.upper_bound > 0
    c = StepDigraphon(np.array([1 / np.pi, 1 - 1 / np.pi]), np.eye(2))
    with pytest.raises(EqualBlocksRequired):
        metric.cut_distance(a, c)


def test_heuristic_distance_bounds_exact(rng):
    a = F.random_digraphon(rng, 5, equal=True)
    b = F.random_digraphon(rng, 5, equal=True)
    exact = metric.cut_distance(a, b).upper_bound
    h = metric.cut_distance(a, b, "heuristic", seed=2)
    assert h.upper_bound >= exact - 1e-15
    p = np.array(h.permutation)
    assert h.upper_bound == pytest.approx(corner_cut_norm(a.measures, a.values - b.values[np.ix_(p, p)]), abs=1e-12)


def test_counting_lemma_oriented_only():
    two_cycle = Digraph.from_edges(2, [(0, 1), (1, 0)])
    with pytest.raises(NotOriented):
        metric.counting_lemma_check(two_cycle, F.c3(), F.c3())
    rep = metric.counting_lemma_check(Digraph.from_edges(3, [(0, 1), (1, 2)]), F.c3(), F.const(1 / 3, 3))
    assert rep.holds and rep.edges == 2


def test_two_cycle_caveat():
    """With a 2-cycle pattern the edge-count bound fails.

    A random tournament has no 2-cycles while the constant 1/2 has density 1/4,
    yet the two are close in cut norm (the identity labeling already bounds the
    distance).
    """
    n = 12
    rng = np.random.default_rng(2)
    up = np.triu(rng.random((n, n)) < 0.5, 1)
    tour = up.astype(float) + np.triu(~up, 1).T.astype(float)
    two = Digraph.from_edges(2, [(0, 1), (1, 0)])
    lhs = abs(hom_density(two, StepDigraphon(uniform(n), tour)).value - 0.25)
    dist_bound = metric.cut_norm(Kernel(uniform(n), tour - 0.5)).value
    assert lhs == pytest.approx(0.25)
    assert len(two.edges) * dist_bound < lhs
