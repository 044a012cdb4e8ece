"""Named example digraphons and random generators used by tests and the CLI."""

from __future__ import annotations

import numpy as np

from .core import Digraph, StepDigraphon, from_digraph, uniform


def const(c: float, t: int = 1) -> StepDigraphon:
    return StepDigraphon(uniform(t), np.full((t, t), float(c)))


def cycle(length: int) -> StepDigraphon:
    """Blow-up of the directed cycle 0 -> 1 -> ... -> length-1 -> 0."""
    vals = np.zeros((length, length))
    for i in range(length):
        vals[i, (i + 1) % length] = 1.0
    return StepDigraphon(uniform(length), vals)


def c3() -> StepDigraphon:
    return cycle(3)


def upper_triangular(t: int = 3) -> StepDigraphon:
    """Strictly upper-triangular 0/1 values on ``t`` equal blocks (nilpotent)."""
    return StepDigraphon(uniform(t), np.triu(np.ones((t, t)), k=1))


def ut() -> StepDigraphon:
    return upper_triangular(3)


def chorded_cycle(length: int) -> StepDigraphon:
    """Two interleaved copies of a directed ``length``-cycle joined by two chords.

    Block ``2*j + a`` is copy ``a`` of cycle position ``j``; every arc goes from
    position ``j`` to ``j + 1``, so the period stays ``length`` while the
    support is richer than a single cycle. Measures and weights are uneven on
    purpose.
    """
    t = 2 * length
    vals = np.zeros((t, t))
    for j in range(length):
        nxt = (j + 1) % length
        vals[2 * j, 2 * nxt] = 1.0
        vals[2 * j + 1, 2 * nxt + 1] = 0.75
    vals[0, 2 * (1 % length) + 1] = 0.5
    vals[1, 2 * (1 % length)] = 0.25
    mu = np.array([2.0 if b % 2 == 0 else 1.0 for b in range(t)])
    return StepDigraphon(mu / mu.sum(), vals)


def chorded_four_cycle() -> StepDigraphon:
    """4-cycle 0->1->2->3->0 plus the chord 0->3, which closes a 2-cycle: period 2."""
    vals = np.zeros((4, 4))
    for i in range(4):
        vals[i, (i + 1) % 4] = 1.0
    vals[0, 3] = 1.0
    return StepDigraphon(uniform(4), vals)


def aperiodic_two_cycle() -> StepDigraphon:
    """2-cycle with a self-loop on block 0."""
    return StepDigraphon(uniform(2), np.array([[1.0, 1.0], [1.0, 0.0]]))


def figure2() -> StepDigraphon:
    """Components {0,1} and {3} linked only through the fragmented block 2."""
    vals = np.zeros((4, 4))
    vals[0, 1] = vals[1, 0] = 1.0
    vals[0, 2] = 1.0
    vals[2, 3] = 1.0
    vals[3, 3] = 1.0
    return StepDigraphon(uniform(4), vals)


def half_order(t: int) -> StepDigraphon:
    """Block average of the indicator of ``x <= y`` on ``t`` equal blocks."""
    vals = np.triu(np.ones((t, t)), k=1) + 0.5 * np.eye(t)
    return StepDigraphon(uniform(t), vals)


def disjoint_union(parts: list[StepDigraphon], weights=None) -> StepDigraphon:
    """Block-diagonal combination; ``weights`` are the masses given to each part."""
    if weights is None:
        weights = [1.0 / len(parts)] * len(parts)
    t = sum(p.t for p in parts)
    mu = np.concatenate([w * p.measures for w, p in zip(weights, parts)])
    vals = np.zeros((t, t))
    at = 0
    for p in parts:
        vals[at : at + p.t, at : at + p.t] = p.values
        at += p.t
    return StepDigraphon(mu / mu.sum(), vals)


NAMED = {
    "const": lambda: const(0.5),
    "c3": c3,
    "ut": ut,
    "figure2": figure2,
    "chorded4": chorded_four_cycle,
    "aperiodic2": aperiodic_two_cycle,
}


def random_measures(rng: np.random.Generator, t: int) -> np.ndarray:
    mu = rng.uniform(0.2, 1.0, size=t)
    return mu / mu.sum()


def random_digraphon(
    rng: np.random.Generator, t: int, density: float = 0.5, equal: bool = False
) -> StepDigraphon:
    """Uniform values thinned by an independent Bernoulli(``density``) support."""
    vals = rng.uniform(0.0, 1.0, size=(t, t)) * (rng.random((t, t)) < density)
    mu = uniform(t) if equal else random_measures(rng, t)
    return StepDigraphon(mu, vals)


def planted_digraph(
    n: int, seed: int, p_in: float = 0.95, p_out: float = 0.05
) -> Digraph:
    """Two planted groups (first and second half of the vertices)."""
    rng = np.random.default_rng(seed)
    group = np.arange(n) >= n // 2
    probs = np.where(group[:, None] == group[None, :], p_in, p_out)
    arcs = rng.random((n, n)) < probs
    np.fill_diagonal(arcs, False)
    us, vs = np.nonzero(arcs)
    return Digraph(n, frozenset(zip(us.tolist(), vs.tolist())))


def planted(n: int = 64, seed: int = 0, **kw) -> StepDigraphon:
    return from_digraph(planted_digraph(n, seed, **kw))
