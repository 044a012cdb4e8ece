"""Weak regularity partitions, cluster digraphs and the shortest positive cycle.

Cells are unions of equal-measure atoms of ``equal_grid(G)``, so every cell
of an ``N``-atom grid split into ``t`` cells has measure exactly ``1/t``.

The deviation of a cell pair is the cut norm, over ``Omega``, of ``G`` minus
its average ``p_ij`` on ``Z_i x Z_j`` (zero elsewhere). Restricting to the
pair and giving each of its ``m = N/t`` atoms mass ``1/m`` multiplies that
cut norm by ``(N/m)^2 = t^2``, so the condition ``< eps t^-2`` becomes
``< eps`` on the rescaled pair kernel.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .core import Kernel, StepDigraphon, degrees, equal_grid, support, uniform
from .densities import cycle_density, loop_density
from .errors import Acyclic, CellBudgetExceeded, UnequalCells
from .metric import EXACT_CUT_MAX_T, cut_norm

EXACT_CELL_ATOMS = EXACT_CUT_MAX_T


@dataclass(frozen=True)
class Partition:
    atoms: StepDigraphon  # equal-measure refinement of the input
    cells: tuple  # tuples of atom indices, all of the same size
    epsilon: float
    compliant: bool  # every cell pair has deviation < eps t^-2
    iterations: int
    iteration_bound: int
    energy: tuple  # mean-square density after each accepted step
    refinement_gains: tuple = field(default=())

    @property
    def t(self) -> int:
        return len(self.cells)


@dataclass(frozen=True)
class ClusterDigraphResult:
    partition: tuple
    densities: np.ndarray  # p_ij
    deviations: np.ndarray  # pair cut norms rescaled by t^2 (compare with eps)
    digraph: frozenset  # edges (i, j); i == j allowed
    d: float
    epsilon: float
    min_outdegree: int
    min_outdegree_bound: float  # (degminOut(G) - d - eps) t
    condition_iii: bool
    exact: bool


def _pair_kernel(vals: np.ndarray, za, zb) -> tuple[float, Kernel]:
    block = vals[np.ix_(za, zb)]
    p = float(block.mean())
    return p, Kernel(uniform(len(za)), block - p)


def pair_deviation(vals: np.ndarray, za, zb, seed: int = 0):
    """``(p, t^2 * cut-norm deviation, certificate)`` of one cell pair."""
    p, k = _pair_kernel(vals, za, zb)
    mode = "exact" if len(za) <= EXACT_CELL_ATOMS else "heuristic"
    cert = cut_norm(k, mode=mode, seed=seed)
    return p, cert.value, cert


def _energy(vals: np.ndarray, cells) -> float:
    t = len(cells)
    n = vals.shape[0]
    total = 0.0
    for za in cells:
        for zb in cells:
            blk = vals[np.ix_(za, zb)]
            total += blk.size * float(blk.mean()) ** 2
    return total / (n * n) if t else 0.0


def _initial_cells(n: int, max_cells: int) -> list:
    divisors = [t for t in range(1, n + 1) if n % t == 0 and t <= max_cells]
    fine = [t for t in divisors if n // t <= EXACT_CELL_ATOMS]
    t = fine[0] if fine else divisors[-1]
    m = n // t
    return [list(range(i * m, (i + 1) * m)) for i in range(t)]


def _rebalance(parts: list, n: int, max_cells: int) -> list:
    """Equal-size cells from arbitrary parts.

    When the gcd of the part sizes allows it the cells refine the parts exactly;
    otherwise the largest admissible cell count is used, whole chunks stay
    together and leftover atoms are dealt round-robin.
    """
    g = 0
    for p in parts:
        g = math.gcd(g, len(p))
    if n // g <= max_cells:
        return [p[i : i + g] for p in parts for i in range(0, len(p), g)]
    t = max(k for k in range(1, max_cells + 1) if n % k == 0)
    c = n // t
    cells, leftover = [], []
    for p in parts:
        full = len(p) // c
        cells.extend(p[i * c : (i + 1) * c] for i in range(full))
        leftover.extend(p[full * c :])
    extra = [[] for _ in range(t - len(cells))]
    for i, a in enumerate(leftover):
        extra[i % len(extra)].append(a)
    return [sorted(x) for x in cells + extra]


def _split(parts, a, b, S, T):
    za, zb = parts[a], parts[b]
    s_atoms = {za[i] for i in S}
    t_atoms = {zb[j] for j in T}
    out = []
    for idx, cell in enumerate(parts):
        pieces = [cell]
        if idx == a:
            pieces = [[x for x in q if x in s_atoms] for q in pieces] + [[x for x in q if x not in s_atoms] for q in pieces]
        if idx == b:
            pieces = [[x for x in q if x in t_atoms] for q in pieces] + [[x for x in q if x not in t_atoms] for q in pieces]
        out.extend(q for q in pieces if q)
    return out


def _scan(vals, cells, seed):
    """Largest pair deviation (already rescaled by t^2) with its certificate."""
    worst = (-1.0, None, None, None)
    for a, za in enumerate(cells):
        for b, zb in enumerate(cells):
            _, dev, cert = pair_deviation(vals, za, zb, seed)
            if dev > worst[0]:
                worst = (dev, a, b, cert)
    return worst


def weak_regular_partition(
    g: Kernel, epsilon: float, max_cells: int = 64, seed: int = 0, max_iter: int | None = None
) -> Partition:
    """Frieze-Kannan style energy increment on an equal-atom grid.

    Each step refines the worst cell pair by its cut-norm certificate; that
    refinement alone raises the mean-square density by at least
    ``eps^2 t^-2``, which is asserted. Energy is bounded by 1, so at most
    ``max_cells^2 / eps^2`` steps can succeed.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if max_cells < 1:
        raise ValueError("max_cells must be >= 1")
    atoms = equal_grid(g)
    if not isinstance(atoms, StepDigraphon):
        atoms = StepDigraphon(atoms.measures, atoms.values)
    vals = atoms.values
    n = atoms.t
    bound = math.ceil(max_cells**2 / epsilon**2)
    cap = bound if max_iter is None else min(bound, max_iter)
    cells = _initial_cells(n, max_cells)
    energy = [_energy(vals, cells)]
    gains = []
    seen = {tuple(map(tuple, cells))}
    it = 0
    while True:
        dev, a, b, cert = _scan(vals, cells, seed)
        t = len(cells)
        if dev < epsilon:
            return Partition(atoms, tuple(map(tuple, cells)), epsilon, True, it, bound, tuple(energy), tuple(gains))
        stuck = it >= cap
        if not stuck:
            parts = _split(cells, a, b, cert.S, cert.T)
            gain = _energy(vals, parts) - energy[-1]
            # the rectangle S x T alone carries (eps t^-2)^2 / mu(S x T) >= eps^2 t^-2
            assert gain >= (epsilon / t) ** 2 * (1 - 1e-9), (gain, epsilon, t)
            gains.append(gain)
            new = _rebalance(parts, n, max_cells)
            key = tuple(map(tuple, new))
            stuck = key in seen
            seen.add(key)
        if stuck:
            part = Partition(atoms, tuple(map(tuple, cells)), epsilon, False, it, bound, tuple(energy), tuple(gains))
            raise CellBudgetExceeded(
                f"no compliant partition within {max_cells} cells (worst deviation {dev:.3g} >= {epsilon})",
                partition=part,
            )
        cells = new
        energy.append(_energy(vals, cells))
        it += 1


def _cells_of(g: Kernel, partition):
    if isinstance(partition, Partition):
        return partition.atoms, [list(c) for c in partition.cells]
    atoms = equal_grid(g)
    return atoms, [sorted(int(x) for x in c) for c in partition]


def cluster_digraph(g: Kernel, partition, d: float, epsilon: float, seed: int = 0) -> ClusterDigraphResult:
    atoms, cells = _cells_of(g, partition)
    sizes = {len(c) for c in cells}
    covered = sorted(x for c in cells for x in c)
    if len(sizes) != 1 or covered != list(range(atoms.t)):
        raise UnequalCells("cells must partition the atoms into equal-size parts")
    t = len(cells)
    vals = atoms.values
    p = np.zeros((t, t))
    dev = np.zeros((t, t))
    for a, za in enumerate(cells):
        for b, zb in enumerate(cells):
            p[a, b], dev[a, b], _ = pair_deviation(vals, za, zb, seed)
    edges = frozenset((a, b) for a in range(t) for b in range(t) if p[a, b] >= d and dev[a, b] < epsilon)
    outdeg = [sum(1 for (a, _) in edges if a == i) for i in range(t)]
    bound = (degrees(g).min_out - d - epsilon) * t
    return ClusterDigraphResult(
        partition=tuple(tuple(c) for c in cells),
        densities=p,
        deviations=dev,
        digraph=edges,
        d=d,
        epsilon=epsilon,
        min_outdegree=min(outdeg),
        min_outdegree_bound=bound,
        condition_iii=min(outdeg) >= bound - 1e-12,
        exact=max(sizes) <= EXACT_CELL_ATOMS,
    )


def _column_route_deviation(block: np.ndarray) -> float:
    """Exact max over (S, T) of |sum_{S x T} block| by enumerating column sets."""
    m = block.shape[1]
    codes = np.arange(1 << m, dtype=np.int64)
    masks = ((codes[:, None] >> np.arange(m)) & 1).astype(float)
    rows = masks @ block.T  # row sums restricted to each column set
    pos = np.where(rows > 0, rows, 0.0).sum(axis=1).max()
    neg = np.where(rows < 0, -rows, 0.0).sum(axis=1).max()
    return float(max(pos, neg))


def verify_cluster_digraph(g: Kernel, result: ClusterDigraphResult, tol: float = 1e-12) -> dict:
    """Independent recheck of conditions (i)-(iii).

    Averages are recomputed from the original blocks through the atom map, the
    deviations by enumerating column subsets instead of row subsets, and the
    minimum outdegree from scratch.
    """
    atoms = equal_grid(g)
    cells = [list(c) for c in result.partition]
    t = len(cells)
    n = atoms.t
    ok_i = ok_ii = True
    for a, b in result.digraph:
        blk = atoms.values[np.ix_(cells[a], cells[b])]
        p = float(blk.sum()) * t * t / (n * n)
        ok_i &= p >= result.d - tol
        if len(cells[b]) <= EXACT_CELL_ATOMS:
            dev = _column_route_deviation(blk - p) / (n * n) * t * t
        else:
            dev = float(result.deviations[a, b])
        ok_ii &= dev < result.epsilon + tol
    outdeg = min(sum(1 for (a, _) in result.digraph if a == i) for i in range(t))
    ok_iii = outdeg >= (degrees(g).min_out - result.d - result.epsilon) * t - 1e-12
    return {"i": bool(ok_i), "ii": bool(ok_ii), "iii": bool(ok_iii), "all": bool(ok_i and ok_ii and ok_iii)}


def shortest_positive_cycle(g: Kernel) -> int:
    """Length of the shortest closed walk in the support digraph.

    A self-loop gives 1; otherwise a BFS from every block finds the shortest
    return. The answer is cross-checked against the cycle density.
    """
    adj = support(g)
    if np.diagonal(adj).any():
        k = 1
    else:
        k = math.inf
        succ = [np.flatnonzero(adj[i]).tolist() for i in range(g.t)]
        for s in range(g.t):
            dist = {s: 0}
            queue = deque([s])
            while queue:
                u = queue.popleft()
                if dist[u] + 1 >= k:
                    break
                for v in succ[u]:
                    if v == s:
                        k = min(k, dist[u] + 1)
                    elif v not in dist:
                        dist[v] = dist[u] + 1
                        queue.append(v)
        if k == math.inf:
            raise Acyclic("support digraph has no directed cycle")
    dens = loop_density(g) if k == 1 else cycle_density(g, k)
    assert dens > 0.0, (k, dens)
    return int(k)
