"""Strong components, fragmented set, condensation, reachability and periodicity.

Everything here is decided on the support digraph (arc ``i -> j`` iff
``V[i, j] > tau``). A union of blocks ``X`` is strongly connected in the
measure sense iff the support subgraph on ``X`` is strongly connected and has
at least one arc: splitting a block without a self-loop into two halves already
produces a bipartition with no mass across, and conversely a block-level
strongly connected subgraph with an arc forces mass across every fractional
bipartition. Strong components are therefore exactly the non-trivial SCCs of
the support digraph and the fragmented set is the union of the trivial ones.
"""

from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .core import TAU_SUPP, Kernel, restrict, support
from .densities import cycle_density
from .errors import NotAComponent, NotFragmented, TooLarge, Unreachable

ORACLE_MAX_T = 12


@dataclass(frozen=True)
class SupportDigraph:
    t: int
    adjacency: np.ndarray

    def successors(self, i):
        return np.flatnonzero(self.adjacency[i]).tolist()

    def predecessors(self, i):
        return np.flatnonzero(self.adjacency[:, i]).tolist()


@dataclass(frozen=True)
class Decomposition:
    components: tuple  # tuple of sorted block tuples, topologically ordered
    fragmented: tuple
    condensation: frozenset  # arcs (a, b) between component indices
    extended_condensation: frozenset

    def component_of(self, block):
        for idx, comp in enumerate(self.components):
            if block in comp:
                return idx
        return None


@dataclass(frozen=True)
class PeriodicStructure:
    period: int
    classes: tuple  # P_0 .. P_{D-1}, each a sorted tuple of blocks
    canonical_shift: int  # class holding the lowest-index block

    def class_of(self, block):
        for j, cls in enumerate(self.classes):
            if block in cls:
                return j
        raise KeyError(block)


@dataclass(frozen=True)
class ReachabilityProfile:
    source: int
    target: int
    horizon: int
    lengths_observed: tuple
    eventual_period: int | None
    shift: int | None
    onset: int | None


@dataclass(frozen=True)
class FragmentedOrder:
    order: tuple
    reach_mass: dict  # block -> measure of out-reachable blocks within X
    respects_order: bool
    nilpotent: bool
    nilpotency_index: int


def support_digraph(g: Kernel, tau: float = TAU_SUPP) -> SupportDigraph:
    return SupportDigraph(g.t, support(g, tau))


def strongly_connected_components(adj: np.ndarray) -> list[list[int]]:
    """Iterative Tarjan; returns SCCs in reverse topological order."""
    n = adj.shape[0]
    succ = [np.flatnonzero(adj[v]).tolist() for v in range(n)]
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    sccs = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, pos = work[-1]
            if pos < len(succ[v]):
                work[-1] = (v, pos + 1)
                w = succ[v][pos]
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w]:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                sccs.append(sorted(comp))
    return sccs


def _topological(comps, arcs):
    """Kahn's algorithm; ties broken by the smallest block of each component."""
    n = len(comps)
    indeg = [0] * n
    out = [[] for _ in range(n)]
    for a, b in arcs:
        out[a].append(b)
        indeg[b] += 1
    heap = [(comps[i][0], i) for i in range(n) if indeg[i] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        _, i = heapq.heappop(heap)
        order.append(i)
        for j in out[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                heapq.heappush(heap, (comps[j][0], j))
    if len(order) != n:
        raise AssertionError("condensation digraph has a directed cycle")
    return order


def decompose(g: Kernel, tau: float = TAU_SUPP) -> Decomposition:
    adj = support(g, tau)
    comps = []
    fragmented = []
    for scc in strongly_connected_components(adj):
        if len(scc) > 1 or adj[scc[0], scc[0]]:
            comps.append(tuple(scc))
        else:
            fragmented.append(scc[0])
    owner = {b: i for i, comp in enumerate(comps) for b in comp}
    arcs = {
        (owner[u], owner[v])
        for u, v in zip(*np.nonzero(adj))
        if u in owner and v in owner and owner[u] != owner[v]
    }
    order = _topological(comps, arcs)
    rank = {old: new for new, old in enumerate(order)}
    comps = tuple(comps[i] for i in order)
    cond = frozenset((rank[a], rank[b]) for a, b in arcs)
    owner = {b: i for i, comp in enumerate(comps) for b in comp}

    frag = set(fragmented)
    extended = set(cond)
    for a, comp in enumerate(comps):
        # walk out of X_a, passing only through fragmented blocks
        seen = set()
        queue = deque(v for u in comp for v in np.flatnonzero(adj[u]).tolist())
        while queue:
            v = queue.popleft()
            if v in seen:
                continue
            seen.add(v)
            if v in frag:
                queue.extend(np.flatnonzero(adj[v]).tolist())
            elif owner[v] != a:
                extended.add((a, owner[v]))
    return Decomposition(comps, tuple(sorted(fragmented)), cond, frozenset(extended))


def is_acyclic(n: int, arcs) -> bool:
    try:
        _topological([(i,) for i in range(n)], arcs)
    except AssertionError:
        return False
    return True


def _closure(adj: np.ndarray) -> np.ndarray:
    """Reachability by walks of length >= 1 via repeated boolean squaring."""
    reach = adj.copy()
    while True:
        nxt = reach | ((reach.astype(np.int64) @ reach.astype(np.int64)) > 0)
        if np.array_equal(nxt, reach):
            return reach
        reach = nxt


def _strongly_connected_measure_level(adj: np.ndarray, blocks) -> bool:
    """Every bipartition of the union of ``blocks`` carries mass across.

    Each block may go wholly to A (2), wholly to B (0) or be split (1);
    these three cases exhaust what a measurable bipartition looks like per block.
    """
    blocks = list(blocks)
    k = len(blocks)
    sub = adj[np.ix_(blocks, blocks)].astype(float)
    codes = np.array(list(itertools.product((0, 1, 2), repeat=k)))
    in_a = (codes > 0).astype(float)
    in_b = (codes < 2).astype(float)
    proper = (in_a.sum(axis=1) > 0) & (in_b.sum(axis=1) > 0)
    mass = ((in_a @ sub) * in_b).sum(axis=1) > 0
    return bool(np.all(mass[proper]))


def verify_decomposition(g: Kernel, tau: float = TAU_SUPP, decomposition=None) -> bool:
    """Recompute the decomposition from the symmetrized reachability relation.

    ``W[i, j]`` holds when ``i`` and ``j`` reach each other; the connected
    components of ``W`` among blocks with a ``W``-neighbour must be the strong
    components, and each must pass the bipartition test of strong connectivity.
    """
    if g.t > ORACLE_MAX_T:
        raise TooLarge(f"exhaustive oracle limited to t <= {ORACLE_MAX_T}")
    dec = decomposition if decomposition is not None else decompose(g, tau)
    adj = support(g, tau)
    reach = _closure(adj)
    w = reach & reach.T
    active = [i for i in range(g.t) if w[i].any()]
    seen = set()
    oracle = []
    for s in active:
        if s in seen:
            continue
        comp, stack = set(), [s]
        while stack:
            v = stack.pop()
            if v in comp:
                continue
            comp.add(v)
            stack.extend(u for u in np.flatnonzero(w[v]).tolist() if u not in comp)
        seen |= comp
        oracle.append(frozenset(comp))
    if set(oracle) != {frozenset(c) for c in dec.components}:
        return False
    if set(range(g.t)) - set().union(*oracle) != set(dec.fragmented):
        return False
    if not all(_strongly_connected_measure_level(adj, comp) for comp in oracle):
        return False
    # no fragmented block may be strongly connected on its own
    if any(_strongly_connected_measure_level(adj, [b]) for b in dec.fragmented):
        return False
    return is_acyclic(len(dec.components), dec.condensation)


def reach(g: Kernel, blocks, direction: str = "out", tau: float = TAU_SUPP) -> frozenset:
    """Blocks reachable from (``out``) or reaching (``in``) the set by walks of length >= 1."""
    adj = support(g, tau)
    if direction == "in":
        adj = adj.T
    elif direction != "out":
        raise ValueError(f"unknown direction {direction!r}")
    start = sorted(set(blocks))
    found = set()
    queue = deque(v for u in start for v in np.flatnonzero(adj[u]).tolist())
    while queue:
        v = queue.popleft()
        if v in found:
            continue
        found.add(v)
        queue.extend(np.flatnonzero(adj[v]).tolist())
    return frozenset(found)


def _validate_component(g: Kernel, component, tau) -> tuple:
    comp = tuple(sorted(set(int(b) for b in component)))
    if comp not in decompose(g, tau).components:
        raise NotAComponent(f"blocks {list(comp)} do not form a strong component")
    return comp


def period_and_classes(g: Kernel, component, tau: float = TAU_SUPP) -> PeriodicStructure:
    """Period as the gcd of ``level(u) + 1 - level(v)`` over arcs inside the component."""
    comp = _validate_component(g, component, tau)
    adj = support(g, tau)
    members = set(comp)
    anchor = comp[0]
    level = {anchor: 0}
    queue = deque([anchor])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]).tolist():
            if v in members and v not in level:
                level[v] = level[u] + 1
                queue.append(v)
    diffs = [
        abs(level[u] + 1 - level[v])
        for u in comp
        for v in np.flatnonzero(adj[u]).tolist()
        if v in members
    ]
    d = reduce(math.gcd, diffs, 0)
    classes = tuple(tuple(b for b in comp if level[b] % d == j) for j in range(d))
    return PeriodicStructure(d, classes, 0)


def _is_cyclic_partition(adj, comp, label, d) -> bool:
    return all(
        label[v] == (label[u] + 1) % d
        for u in comp
        for v in np.flatnonzero(adj[u]).tolist()
        if v in label
    )


def check_class_uniqueness(g: Kernel, component, tau: float = TAU_SUPP) -> bool:
    """Every ordered D-class partition obeying the arc rule is a cyclic shift."""
    comp = _validate_component(g, component, tau)
    if len(comp) > ORACLE_MAX_T:
        raise TooLarge(f"exhaustive class check limited to {ORACLE_MAX_T} blocks")
    ps = period_and_classes(g, comp, tau)
    d = ps.period
    adj = support(g, tau)
    members = set(comp)
    ref = {b: ps.class_of(b) for b in comp}
    found = []

    def extend(label, rest):
        if not rest:
            if _is_cyclic_partition(adj, comp, label, d):
                found.append(dict(label))
            return
        b, tail = rest[0], rest[1:]
        for c in range(d):
            label[b] = c
            ok = all(
                label[v] == (c + 1) % d
                for v in np.flatnonzero(adj[b]).tolist()
                if v in label and v in members
            ) and all(
                (label[u] + 1) % d == c
                for u in np.flatnonzero(adj[:, b]).tolist()
                if u in label and u in members
            )
            if ok:
                extend(label, tail)
            del label[b]

    extend({}, list(comp))
    for lab in found:
        shift = (lab[comp[0]] - ref[comp[0]]) % d
        if any(lab[b] != (ref[b] + shift) % d for b in comp):
            return False
    return len(found) == d


def reachability_profile(
    g: Kernel, i: int, j: int, horizon: int | None = None, tau: float = TAU_SUPP
) -> ReachabilityProfile:
    """Walk lengths from block ``i`` to block ``j`` up to ``horizon``.

    Inside a strong component the set is fitted as eventually ``D``-periodic
    with shift equal to the class-index difference.
    """
    if horizon is None:
        horizon = 2 * g.t * g.t
    if horizon < 2 * g.t * g.t:
        raise ValueError(f"horizon must be >= 2 t^2 = {2 * g.t * g.t}")
    adj = support(g, tau).astype(np.int64)
    row = np.zeros(g.t, dtype=np.int64)
    row[i] = 1
    lengths = []
    for k in range(1, horizon + 1):
        row = ((row @ adj) > 0).astype(np.int64)
        if row[j]:
            lengths.append(k)
        if not row.any():
            break
    if not lengths:
        raise Unreachable(f"block {j} is not reachable from block {i}")
    dec = decompose(g, tau)
    ci, cj = dec.component_of(i), dec.component_of(j)
    if ci is None or ci != cj:
        return ReachabilityProfile(i, j, horizon, tuple(lengths), None, None, None)
    ps = period_and_classes(g, dec.components[ci], tau)
    d = ps.period
    s = (ps.class_of(j) - ps.class_of(i)) % d
    present = set(lengths)
    onset = horizon + 1
    for k in range(horizon, 0, -1):
        if (k in present) != (k % d == s):
            break
        onset = k
    return ReachabilityProfile(i, j, horizon, tuple(lengths), d, s, onset)


def fragmented_order(g: Kernel, blocks, tau: float = TAU_SUPP) -> FragmentedOrder:
    """Order a subset of the fragmented set by decreasing out-reach mass.

    An arc ``x -> y`` forces ``reach(x)`` to contain ``y`` and ``reach(y)``,
    and ``y`` does not reach itself, so mass strictly decreases along arcs and
    the returned order is topological.
    """
    x = sorted(set(int(b) for b in blocks))
    dec = decompose(g, tau)
    stray = set(x) - set(dec.fragmented)
    if stray:
        raise NotFragmented(f"blocks {sorted(stray)} lie in strong components")
    members = set(x)
    mass = {b: float(sum(g.measures[v] for v in reach(g, [b], "out", tau) & members)) for b in x}
    order = tuple(sorted(x, key=lambda b: (-mass[b], b)))
    adj = support(g, tau)
    respects = all(
        not adj[u, v] for u in x for v in x if mass[u] <= mass[v]
    )
    sub = adj[np.ix_(x, x)].astype(np.int64)
    prod = np.eye(len(x), dtype=np.int64)
    index = 0
    for k in range(1, len(x) + 1):
        prod = ((prod @ sub) > 0).astype(np.int64)
        if not prod.any():
            index = k
            break
    nilpotent = len(x) == 0 or index > 0
    return FragmentedOrder(order, mass, respects, nilpotent, index)


def cycles_confined_check(g: Kernel, kmax: int = 8, tol: float = 1e-10) -> bool:
    """``t(C_k, G)`` equals the sum over strong components for ``2 <= k <= kmax``."""
    if kmax > 8:
        raise ValueError("kmax must be <= 8")
    comps = decompose(g).components
    parts = [restrict(g, comp, "zero-out") for comp in comps]
    for k in range(2, kmax + 1):
        whole = cycle_density(g, k)
        split = sum(cycle_density(p, k) for p in parts)
        if abs(whole - split) > tol:
            return False
    return True
