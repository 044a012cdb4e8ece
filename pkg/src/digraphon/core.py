"""Step digraphons: data model, constructors, restrictions, degrees, refinement,
sampling and (de)serialization.

A step digraphon on ``t`` blocks is a pair ``(measures, values)``: block ``i``
carries probability mass ``measures[i]`` and the function takes the constant
value ``values[i, j]`` on block ``i`` x block ``j``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptyDigraph,
    EmptyRestriction,
    EqualBlocksRequired,
    MeasureSum,
    NonPositiveMeasure,
    ParseError,
    RefinementOverflow,
    SelfLoop,
    ShapeMismatch,
    ValueRange,
)

#: values strictly above this count as "positive" in every support-level test
TAU_SUPP = 1e-12
MEASURE_TOL = 1e-12
REFINEMENT_CAP = 4096


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Kernel:
    """Real step kernel: block measures plus an unconstrained value matrix."""

    measures: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.measures, dtype=float)
        vals = np.asarray(self.values, dtype=float)
        if mu.ndim != 1 or mu.size == 0:
            raise ShapeMismatch("measures must be a non-empty list")
        if vals.ndim != 2 or vals.shape != (mu.size, mu.size):
            raise ShapeMismatch(
                f"values must be a {mu.size}x{mu.size} matrix, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(mu)) or not np.all(np.isfinite(vals)):
            raise ValueRange("measures and values must be finite")
        if np.any(mu <= 0):
            raise NonPositiveMeasure(f"block {int(np.argmin(mu))} has non-positive measure")
        if abs(mu.sum() - 1.0) > MEASURE_TOL:
            raise MeasureSum(f"measures sum to {float(mu.sum())!r}, expected 1")
        self._check_values(vals)
        object.__setattr__(self, "measures", _frozen(mu))
        object.__setattr__(self, "values", _frozen(vals))

    def _check_values(self, vals):
        pass

    @property
    def t(self) -> int:
        return self.measures.size

    def __eq__(self, other):
        if type(self) is not type(other):
            return NotImplemented
        return np.array_equal(self.measures, other.measures) and np.array_equal(
            self.values, other.values
        )

    def __hash__(self):
        return hash((self.measures.tobytes(), self.values.tobytes()))

    def __repr__(self):
        return f"{type(self).__name__}(t={self.t}, measures={self.measures.tolist()})"


@dataclass(frozen=True, eq=False, repr=False)
class StepDigraphon(Kernel):
    """Kernel whose values lie in [0, 1]."""

    def _check_values(self, vals):
        bad = np.argwhere((vals < 0) | (vals > 1))
        if bad.size:
            i, j = bad[0]
            raise ValueRange(f"values[{i}][{j}] = {float(vals[i, j])!r} is outside [0, 1]")


@dataclass(frozen=True)
class Digraph:
    """Finite digraph on vertices ``0..n-1``."""

    n: int
    edges: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ShapeMismatch(f"edge ({u}, {v}) outside vertex range 0..{self.n - 1}")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Digraph":
        return cls(n, frozenset(edges))

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def is_oriented(self) -> bool:
        return all(u != v and (v, u) not in self.edges for u, v in self.edges)


@dataclass(frozen=True)
class Degrees:
    deg_out: np.ndarray
    deg_in: np.ndarray
    min_out: float
    max_out: float
    min_in: float
    max_in: float


def new_step_digraphon(measures: Sequence[float], values) -> StepDigraphon:
    return StepDigraphon(np.asarray(measures, dtype=float), np.asarray(values, dtype=float))


def new_kernel(measures: Sequence[float], values) -> Kernel:
    return Kernel(np.asarray(measures, dtype=float), np.asarray(values, dtype=float))


def as_kernel(g: Kernel) -> Kernel:
    return Kernel(g.measures, g.values)


def difference(a: Kernel, b: Kernel) -> Kernel:
    """``a - b`` on the common refinement of the two block structures."""
    a2, b2 = common_refinement(a, b)
    return Kernel(a2.measures, a2.values - b2.values)


def uniform(t: int) -> np.ndarray:
    return np.full(t, 1.0 / t)


def from_digraph(g: Digraph) -> StepDigraphon:
    if g.n < 1:
        raise EmptyDigraph("digraph has no vertices")
    loops = sorted(u for u, v in g.edges if u == v)
    if loops:
        raise SelfLoop(f"self-loop at vertex {loops[0]}")
    vals = np.zeros((g.n, g.n))
    for u, v in g.edges:
        vals[u, v] = 1.0
    return StepDigraphon(uniform(g.n), vals)


def transpose(g: Kernel) -> Kernel:
    return type(g)(g.measures, g.values.T)


def restrict(g: Kernel, blocks: Iterable[int], mode: str = "zero-out") -> Kernel:
    """Restriction to a union of blocks.

    ``zero-out`` keeps the ground space and zeroes every value outside
    ``A x A``; ``renormalize`` keeps only the blocks of ``A`` with measures
    rescaled to a probability distribution.
    """
    a = sorted(set(int(i) for i in blocks))
    if any(i < 0 or i >= g.t for i in a):
        raise ShapeMismatch(f"block set {a} not within 0..{g.t - 1}")
    if mode == "zero-out":
        mask = np.zeros(g.t, dtype=bool)
        mask[a] = True
        vals = np.where(np.outer(mask, mask), g.values, 0.0)
        return type(g)(g.measures, vals)
    if mode == "renormalize":
        if not a:
            raise EmptyRestriction("cannot renormalize onto an empty block set")
        mu = g.measures[a]
        return type(g)(mu / mu.sum(), g.values[np.ix_(a, a)])
    raise ValueError(f"unknown restriction mode {mode!r}")


def degrees(g: Kernel) -> Degrees:
    mu = g.measures
    deg_out = g.values @ mu
    deg_in = mu @ g.values
    return Degrees(
        deg_out=deg_out,
        deg_in=deg_in,
        min_out=float(deg_out.min()),
        max_out=float(deg_out.max()),
        min_in=float(deg_in.min()),
        max_in=float(deg_in.max()),
    )


def support(g: Kernel, tau: float = TAU_SUPP) -> np.ndarray:
    """Boolean t x t matrix of entries strictly above ``tau``."""
    return np.asarray(g.values > tau)


def ground(g: Kernel, tau: float = TAU_SUPP) -> frozenset:
    """Blocks carrying positive in- or out-degree."""
    s = support(g, tau)
    return frozenset(int(i) for i in np.flatnonzero(s.any(axis=1) | s.any(axis=0)))


def refine(g: Kernel, k: int, cap: int = REFINEMENT_CAP) -> Kernel:
    """Split every block into ``k`` equal sub-blocks carrying the same values."""
    if k < 1:
        raise ValueError("refinement factor must be >= 1")
    if g.t * k > cap:
        raise RefinementOverflow(f"refinement to {g.t * k} blocks exceeds cap {cap}")
    if k == 1:
        return g
    mu = np.repeat(g.measures / k, k)
    vals = np.repeat(np.repeat(g.values, k, axis=0), k, axis=1)
    return type(g)(mu, vals)


def _breakpoints(mu):
    c = np.cumsum(mu)
    c[-1] = 1.0
    return c


def common_refinement(a: Kernel, b: Kernel, cap: int = REFINEMENT_CAP) -> tuple[Kernel, Kernel]:
    """Re-express both inputs on the merged set of cumulative-measure breakpoints."""
    pa, pb = _breakpoints(a.measures), _breakpoints(b.measures)
    kept = []
    for x in np.sort(np.concatenate([pa, pb])):
        if not kept or x - kept[-1] > MEASURE_TOL:
            kept.append(float(x))
    kept[-1] = 1.0
    merged = np.array(kept)
    if merged.size > cap:
        raise RefinementOverflow(f"common refinement has {merged.size} blocks, cap {cap}")
    mu = np.diff(np.concatenate([[0.0], merged]))
    mids = merged - mu / 2
    ia = np.minimum(np.searchsorted(pa, mids), a.t - 1)
    ib = np.minimum(np.searchsorted(pb, mids), b.t - 1)
    mu = mu / mu.sum()
    return (
        type(a)(mu, a.values[np.ix_(ia, ia)]),
        type(b)(mu, b.values[np.ix_(ib, ib)]),
    )


def equal_grid(g: Kernel, cap: int = REFINEMENT_CAP, max_denominator: int = 4096) -> Kernel:
    """Refine to equal-measure atoms when every block mass is a (near) rational.

    Raises EqualBlocksRequired when no grid with at most ``cap`` atoms fits.
    """
    fracs = [Fraction(float(m)).limit_denominator(max_denominator) for m in g.measures]
    if any(abs(float(f) - m) > MEASURE_TOL for f, m in zip(fracs, g.measures)):
        raise EqualBlocksRequired("block measures are not rational at the supported precision")
    n = 1
    for f in fracs:
        n = n * f.denominator // math.gcd(n, f.denominator)
    if n > cap:
        raise EqualBlocksRequired(f"least common grid has {n} atoms, cap {cap}")
    counts = [int(f * n) for f in fracs]
    if all(c == 1 for c in counts):
        return g
    idx = np.repeat(np.arange(g.t), counts)
    return type(g)(uniform(n), g.values[np.ix_(idx, idx)])


def sample_digraph(g: StepDigraphon, n: int, seed: int) -> Digraph:
    """W-random digraph: i.i.d. block labels, independent arcs u -> v for u != v."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    p = g.measures / g.measures.sum()
    labels = rng.choice(g.t, size=n, p=p)
    probs = g.values[np.ix_(labels, labels)]
    coin = rng.random((n, n))
    arcs = coin < probs
    np.fill_diagonal(arcs, False)
    us, vs = np.nonzero(arcs)
    return Digraph(n, frozenset(zip(us.tolist(), vs.tolist())))


def edge_density(g: Kernel) -> float:
    mu = g.measures
    return float(mu @ g.values @ mu)


# -- serialization ---------------------------------------------------------


def to_dict(g: Kernel) -> dict:
    return {"measures": g.measures.tolist(), "values": g.values.tolist()}


def serialize(g: Kernel) -> str:
    return json.dumps(to_dict(g), separators=(",", ":"), sort_keys=True)


def _number(x, field_name):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"expected a number, got {x!r}", field=field_name)
    return float(x)


def from_dict(obj, kernel: bool = False) -> Kernel:
    if not isinstance(obj, dict):
        raise ParseError("top-level JSON value must be an object")
    for key in ("measures", "values"):
        if key not in obj:
            raise ParseError(f"missing key {key!r}", field=key)
    raw_mu, raw_vals = obj["measures"], obj["values"]
    if not isinstance(raw_mu, list):
        raise ParseError("expected an array", field="measures")
    if not isinstance(raw_vals, list) or not all(isinstance(r, list) for r in raw_vals):
        raise ParseError("expected an array of arrays", field="values")
    mu = [_number(x, f"measures[{i}]") for i, x in enumerate(raw_mu)]
    vals = [
        [_number(x, f"values[{i}][{j}]") for j, x in enumerate(row)]
        for i, row in enumerate(raw_vals)
    ]
    if any(len(r) != len(mu) for r in vals) or len(vals) != len(mu):
        raise ShapeMismatch(f"values must be a {len(mu)}x{len(mu)} matrix")
    cls = Kernel if kernel else StepDigraphon
    return cls(np.array(mu, dtype=float), np.array(vals, dtype=float).reshape(len(mu), len(mu)))


def parse(text: str, kernel: bool = False) -> Kernel:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    return from_dict(obj, kernel=kernel)


def serialize_edges(g: Digraph) -> str:
    lines = [str(g.n)] + [f"{u} {v}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def parse_edges(text: str) -> Digraph:
    """Edge-list format: first line ``n``, then ``u v`` per line; ``#`` starts a comment."""
    n = None
    edges = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if n is None:
            if len(parts) != 1:
                raise ParseError("first line must hold the vertex count", line=lineno)
            try:
                n = int(parts[0])
            except ValueError:
                raise ParseError(f"bad vertex count {parts[0]!r}", line=lineno) from None
            if n < 0:
                raise ParseError("vertex count must be non-negative", line=lineno)
            continue
        if len(parts) != 2:
            raise ParseError(f"expected 'u v', got {line!r}", line=lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"non-integer vertex in {line!r}", line=lineno) from None
        if not (0 <= u < n and 0 <= v < n):
            raise ParseError(f"vertex out of range in {line!r}", line=lineno)
        if (u, v) in edges:
            raise ParseError(f"duplicate edge {u} {v}", line=lineno)
        edges.add((u, v))
    if n is None:
        raise ParseError("empty edge list")
    return Digraph(n, frozenset(edges))
