"""Powers, operator application, homomorphism densities and kernel norms.

Throughout, the integral ``int f(y) G(y, x) dmu(y)`` becomes the finite sum
``sum_i mu_i V[i, j] f_i``; a ``k``-th power is therefore
``V (diag(mu) V)^(k-1)``, one internal summation per interior path vertex.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .core import Digraph, Kernel, StepDigraphon
from .errors import ShapeMismatch, TooManyVertices

HOM_VERTEX_CAP = 10


@dataclass(frozen=True)
class DensityReport:
    digraph: Digraph
    value: float
    assignment_count: int


@dataclass(frozen=True)
class KernelNorms:
    l1: float
    l2: float
    linf: float


def power_values(g: Kernel, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("power exponent must be >= 1")
    weighted = g.measures[:, None] * g.values
    out = g.values.copy()
    for _ in range(k - 1):
        out = out @ weighted
    return out


def power(g: Kernel, k: int) -> Kernel:
    """Rooted path density of length ``k`` as a digraphon on the same blocks."""
    vals = power_values(g, k)
    if isinstance(g, StepDigraphon):
        # the exact values lie in [0, 1]; clip the last-ulp excursions only
        vals = np.clip(vals, 0.0, 1.0)
    return type(g)(g.measures, vals)


def iter_powers(g: Kernel, kmax: int) -> Iterator[tuple[int, np.ndarray, float]]:
    """Yield ``(k, A_k, log_scale_k)`` with ``V_k = A_k * exp(log_scale_k)``.

    Renormalizing every step keeps long power series clear of under/overflow;
    a power that vanishes identically is reported with ``A_k = 0`` and scale 0.
    """
    weighted = g.measures[:, None] * g.values
    cur = g.values.copy()
    log_scale = 0.0
    for k in range(1, kmax + 1):
        if k > 1:
            cur = cur @ weighted
        peak = np.abs(cur).max()
        if peak == 0.0:
            yield k, cur, 0.0
            continue
        cur = cur / peak
        log_scale += float(np.log(peak))
        yield k, cur, log_scale


def apply(g: Kernel, f, side: str = "left") -> np.ndarray:
    """Integral operator on a step function.

    ``left`` integrates over the first argument, ``(T f)_j = sum_i mu_i V[i,j] f_i``;
    ``right`` is the same operator for the transposed kernel.
    """
    f = np.asarray(f)
    if f.shape != (g.t,):
        raise ShapeMismatch(f"step function has shape {f.shape}, expected ({g.t},)")
    if side == "left":
        return g.values.T @ (g.measures * f)
    if side == "right":
        return g.values @ (g.measures * f)
    raise ValueError(f"unknown side {side!r}")


def hom_density(d: Digraph, g: Kernel, cap: int = HOM_VERTEX_CAP) -> DensityReport:
    """Full enumeration of block maps ``phi: V(D) -> blocks``."""
    if d.n > cap:
        raise TooManyVertices(f"{d.n} vertices exceeds enumeration cap {cap}")
    mu, vals = g.measures, g.values
    edges = d.sorted_edges()
    total = 0.0
    count = 0
    for phi in itertools.product(range(g.t), repeat=d.n):
        count += 1
        w = 1.0
        for v in phi:
            w *= mu[v]
        for u, v in edges:
            w *= vals[phi[u], phi[v]]
            if w == 0.0:
                break
        total += w
    return DensityReport(d, float(total), count)


def directed_cycle(k: int) -> Digraph:
    return Digraph(k, frozenset((i, (i + 1) % k) for i in range(k)))


def directed_path(k: int) -> Digraph:
    """Path with ``k`` arcs on ``k + 1`` vertices."""
    return Digraph(k + 1, frozenset((i, i + 1) for i in range(k)))


def cycle_density(g: Kernel, k: int, rooted: bool = False):
    """``t(C_k, G)``, or the per-block rooted density when ``rooted``.

    The rooted vector is the diagonal of ``G^k``; weighting it by the block
    measures recovers the unrooted value.
    """
    if k < 2:
        raise ValueError("cycle length must be >= 2")
    diag = np.diagonal(power_values(g, k)).copy()
    if rooted:
        return diag
    return float(g.measures @ diag)


def loop_density(g: Kernel) -> float:
    return float(g.measures @ np.diagonal(g.values))


def kernel_norms(k: Kernel) -> KernelNorms:
    w = np.outer(k.measures, k.measures)
    a = np.abs(k.values)
    return KernelNorms(
        l1=float((w * a).sum()),
        l2=float(np.sqrt((w * a * a).sum())),
        linf=float(a.max()),
    )
