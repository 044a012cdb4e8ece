"""Spectra, Perron pairs, peripheral structure and power asymptotics.

Operator <-> matrix correspondence. With ``M = diag(mu) V`` the integral
operator acts on step functions by ``T f = M^T f`` (integration over the first
argument), and the transposed digraphon acts by ``V diag(mu) f``, which is
similar to ``M``. The finite-rank kernel has the same nonzero spectrum as
``M`` with the same algebraic multiplicities; a digraphon on ``t`` blocks
contributes exactly ``t`` eigenvalues counting the zeros.

Eigenvalues are computed on the block-triangular form given by the strong
components: fragmented blocks contribute exact zeros and every strong
component is handed to LAPACK as an irreducible block. Entries at or below
the support threshold are treated as zero throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .core import TAU_SUPP, Kernel, ground, restrict, support, transpose
from .densities import cycle_density, iter_powers, power_values
from .errors import ConvergenceFailure, NotStronglyConnected, ZeroSpectralRadius
from .structure import decompose, period_and_classes

MAX_T = 512
CLUSTER_RADIUS = 1e-7
POWER_ITER_CAP = 20_000
EPS = np.finfo(float).eps
_LP_OPTIONS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass(frozen=True)
class SpectrumResult:
    eigenvalues: tuple  # all t eigenvalues, by descending modulus then angle
    multiplicities: tuple  # ((representative, algebraic multiplicity), ...)
    rho: float
    peripheral: tuple
    tol_rel: float


@dataclass(frozen=True)
class PerronPair:
    rho: float
    v_left: np.ndarray
    v_right: np.ndarray
    measures: np.ndarray = field(repr=False)

    @property
    def pairing(self) -> float:
        return float(np.sum(self.measures * self.v_left * self.v_right))


@dataclass(frozen=True)
class PeripheralReport:
    multiplicity: int
    eigenvalues: tuple
    roots_residual: float  # max distance to the rho-scaled D-th roots of unity
    simple: bool


@dataclass(frozen=True)
class GelfandSeries:
    values: tuple  # ||G^k||_2^(1/k) for k = 1..kmax
    final: float
    rho: float
    gap: float


@dataclass(frozen=True)
class CycleSpectrumReport:
    residuals: tuple  # (k, |t(C_k) - sum m(l) l^k|, tolerance)
    max_residual: float
    max_imag: float
    holds: bool


@dataclass(frozen=True)
class ComponentRadiusReport:
    rho: float
    component_radii: tuple
    max_component_radius: float
    no_components: bool
    monotone: bool
    holds: bool


@dataclass(frozen=True)
class PoweringReport:
    period: int
    classes: tuple
    components_match: bool
    fragmented_empty: bool
    class_periods: tuple
    radius_errors: tuple  # |rho(restricted power) - rho^D / mu(P_i)|
    eigvec_residuals: tuple  # eigen-equation residual of the rescaled restrictions
    direction_errors: tuple  # distance to the restricted power's own Perron pair
    class_pairings: tuple  # <w_L, w_R> on each class; equals 1/D
    holds: bool


@dataclass(frozen=True)
class AsymptoticsReport:
    rho: float
    period: int
    classes: tuple
    residuals: tuple  # e_l for l = 1..lmax, roundoff-level values reported as 0
    raw_residuals: tuple
    off_class_max: tuple  # max |G^l| over pairs off the class pattern
    fit_range: tuple
    fitted_slope: float | None  # slope of log e_l
    fitted_rate: float | None  # exp(slope)
    subdominant: float
    kernel_norms: tuple  # ||K^l||_inf for K = G minus its peripheral part
    off_class_ok: bool


def induced_matrix(g: Kernel) -> np.ndarray:
    """``diag(mu) V``."""
    return g.measures[:, None] * g.values


def _clean_matrix(g: Kernel, tau: float) -> np.ndarray:
    return g.measures[:, None] * np.where(support(g, tau), g.values, 0.0)


def _sort_key(lam, scale):
    mod = round(abs(lam) / scale, 11) if scale > 0 else 0.0
    ang = math.atan2(lam.imag, lam.real) % (2 * math.pi)
    if ang > 2 * math.pi - 1e-11:
        ang = 0.0
    return (-mod, round(ang, 11))


def _cluster(eigs, rho):
    radius = CLUSTER_RADIUS * rho
    groups = []
    for lam in eigs:
        for grp in groups:
            if abs(lam - grp[0]) <= radius:
                grp[1].append(lam)
                break
        else:
            groups.append((lam, [lam]))
    return tuple((complex(np.mean(members)), len(members)) for _, members in groups)


def spectrum(g: Kernel, tol_rel: float = 1e-9, tau: float = TAU_SUPP) -> SpectrumResult:
    if g.t > MAX_T:
        raise ValueError(f"spectrum limited to t <= {MAX_T}")
    m = _clean_matrix(g, tau)
    dec = decompose(g, tau)
    eigs = [0j] * len(dec.fragmented)
    for comp in dec.components:
        sub = m[np.ix_(comp, comp)]
        try:
            eigs.extend(complex(x) for x in np.linalg.eigvals(sub))
        except np.linalg.LinAlgError as exc:
            raise ConvergenceFailure(f"eigenvalue iteration failed: {exc}") from exc
    rho = max((abs(x) for x in eigs), default=0.0)
    eigs = tuple(sorted(eigs, key=lambda x: _sort_key(x, rho)))
    peripheral = tuple(x for x in eigs if abs(x) >= rho * (1 - tol_rel)) if rho > 0 else ()
    return SpectrumResult(eigs, _cluster(eigs, rho), float(rho), peripheral, tol_rel)


def spectral_radius(g: Kernel, tau: float = TAU_SUPP) -> float:
    return spectrum(g, tau=tau).rho


def subdominant_modulus(spec: SpectrumResult) -> float:
    rest = [abs(x) for x in spec.eigenvalues[len(spec.peripheral):]]
    return max(rest, default=0.0)


def _require_irreducible_ground(g: Kernel, tau: float):
    spec = spectrum(g, tau=tau)
    if spec.rho == 0.0:
        raise ZeroSpectralRadius("spectral radius is zero")
    dec = decompose(g, tau)
    gr = ground(g, tau)
    if len(dec.components) != 1 or set(dec.components[0]) != set(gr):
        raise NotStronglyConnected("the ground set is not a single strong component")
    return spec, dec.components[0]


def _positive_eigvec(a: np.ndarray, rho: float) -> np.ndarray:
    """Nonnegative eigenvector of an irreducible nonnegative matrix at ``rho``.

    Lazy power iteration ``x <- (x + a x / rho) / 2`` first (it converges even for
    periodic matrices); falls back to the dense eigensolver.
    """
    n = a.shape[0]
    x = np.full(n, 1.0 / n)
    for _ in range(POWER_ITER_CAP):
        y = 0.5 * (x + a @ x / rho)
        y /= np.abs(y).max()
        if np.abs(y - x).max() <= 1e-15:
            x = y
            break
        x = y
    if np.abs(a @ x - rho * x).max() <= 1e-12 * max(rho, 1.0):
        return x
    w, vecs = np.linalg.eig(a)
    v = np.real(vecs[:, int(np.argmin(np.abs(w - rho)))])
    if v.sum() < 0:
        v = -v
    v = v / np.abs(v).max()
    if v.min() < -1e-9:
        raise ConvergenceFailure("leading eigenvector has entries of both signs")
    return np.clip(v, 0.0, None)


def perron_pair(g: Kernel, tau: float = TAU_SUPP) -> PerronPair:
    """Nonnegative left/right eigenfunctions at the spectral radius.

    Each is first normalized to unit ``L^2(mu)`` norm and then both are divided
    by the square root of their pairing, so ``sum mu vL vR = 1``.
    """
    spec, comp = _require_irreducible_ground(g, tau)
    rho = spec.rho
    idx = list(comp)
    mu = g.measures
    vals = np.where(support(g, tau), g.values, 0.0)[np.ix_(idx, idx)]
    left_op = (mu[idx][:, None] * vals).T
    right_op = vals * mu[idx][None, :]
    vl = np.zeros(g.t)
    vr = np.zeros(g.t)
    vl[idx] = _positive_eigvec(left_op, rho)
    vr[idx] = _positive_eigvec(right_op, rho)
    vl /= math.sqrt(float(np.sum(mu * vl * vl)))
    vr /= math.sqrt(float(np.sum(mu * vr * vr)))
    scale = math.sqrt(float(np.sum(mu * vl * vr)))
    vl, vr = vl / scale, vr / scale
    vl.setflags(write=False)
    vr.setflags(write=False)
    return PerronPair(rho, vl, vr, mu)


def peripheral_report(g: Kernel, tol_rel: float = 1e-9, tau: float = TAU_SUPP) -> PeripheralReport:
    spec, _ = _require_irreducible_ground(g, tau)
    spec = spectrum(g, tol_rel, tau)
    per = spec.peripheral
    d = len(per)
    roots = [spec.rho * complex(math.cos(2 * math.pi * k / d), -math.sin(2 * math.pi * k / d)) for k in range(d)]
    resid = max(min(abs(lam - r) for r in roots) for lam in per)
    # each root must be hit once, and no peripheral eigenvalue may repeat
    hit = {min(range(d), key=lambda k: abs(lam - roots[k])) for lam in per}
    per_clusters = [m for lam, m in spec.multiplicities if abs(lam) >= spec.rho * (1 - tol_rel)]
    simple = len(hit) == d and all(m == 1 for m in per_clusters)
    return PeripheralReport(d, per, float(resid), simple)


def peripheral_multiplicity(g: Kernel, tol_rel: float = 1e-9, tau: float = TAU_SUPP) -> int:
    return peripheral_report(g, tol_rel, tau).multiplicity


def gelfand_estimate(g: Kernel, kmax: int) -> GelfandSeries:
    """``||G^k||_2^(1/k)`` for ``k = 1..kmax`` from exact (rescaled) powers."""
    if kmax < 2:
        raise ValueError("kmax must be >= 2")
    w = np.outer(g.measures, g.measures)
    out = []
    for k, a, log_scale in iter_powers(g, kmax):
        n2 = math.sqrt(float((w * a * a).sum()))
        out.append(0.0 if n2 == 0.0 else math.exp((log_scale + math.log(n2)) / k))
    rho = spectral_radius(g)
    return GelfandSeries(tuple(out), out[-1], rho, abs(out[-1] - rho))


def cycle_spectrum_check(g: Kernel, kmax: int = 12) -> CycleSpectrumReport:
    """Cycle densities against power sums of the spectrum for ``3 <= k <= kmax``."""
    if kmax > 20:
        raise ValueError("kmax must be <= 20")
    spec = spectrum(g)
    lam = np.array(spec.eigenvalues, dtype=complex)
    rows = []
    worst = 0.0
    worst_imag = 0.0
    ok = True
    for k in range(3, kmax + 1):
        s = complex(np.sum(lam**k))
        tol = 1e-8 * max(1.0, float(np.sum(np.abs(lam) ** k)))
        r = abs(cycle_density(g, k) - s.real)
        rows.append((k, r, tol))
        worst = max(worst, r)
        worst_imag = max(worst_imag, abs(s.imag))
        ok = ok and r <= tol and abs(s.imag) <= 1e-10
    return CycleSpectrumReport(tuple(rows), worst, worst_imag, ok)


def _dense_radius(g: Kernel) -> float:
    """Spectral radius straight from LAPACK on the full induced matrix."""
    m = induced_matrix(g)
    if not m.any():
        return 0.0
    return float(np.abs(np.linalg.eigvals(m)).max())


def component_radius_check(g: Kernel, tol: float = 1e-9) -> ComponentRadiusReport:
    """``rho(G)`` is the maximum over strong components, and zero iff there are none.

    Component radii come from the dense solver on each ``G[[X_i]]``, the global
    radius from the block-triangular route, so the two sides are computed
    independently.
    """
    rho = spectral_radius(g)
    comps = decompose(g).components
    radii = tuple(_dense_radius(restrict(g, c, "zero-out")) for c in comps)
    top = max(radii, default=0.0)
    monotone = all(r <= rho + 1e-10 for r in radii)
    none = len(comps) == 0
    holds = abs(rho - top) <= tol and ((rho == 0.0) == none) and monotone
    return ComponentRadiusReport(rho, radii, top, none, monotone, holds)


def _class_rank(structure, t):
    rank = np.full(t, -1)
    for j, cls in enumerate(structure.classes):
        rank[list(cls)] = j
    return rank


def powering_periodic_check(g: Kernel, tol: float = 1e-8) -> PoweringReport:
    """The D-th power splits into the cyclic classes, each aperiodic with the predicted radius."""
    dec = decompose(g)
    if len(dec.components) != 1 or len(dec.components[0]) != g.t:
        raise NotStronglyConnected("powering check needs a single strong component on all blocks")
    comp = dec.components[0]
    ps = period_and_classes(g, comp)
    d = ps.period
    pair = perron_pair(g)
    rho = pair.rho
    gd = Kernel(g.measures, power_values(g, d))
    dec_d = decompose(gd)
    match = {frozenset(c) for c in dec_d.components} == {frozenset(c) for c in ps.classes}
    periods, rad_err, eig_res, dir_err, pairings = [], [], [], [], []
    for cls in ps.classes:
        idx = list(cls)
        mass = float(g.measures[idx].sum())
        sub = restrict(gd, idx, "renormalize")
        if not decompose(sub).components:
            periods.append(0)
            continue
        periods.append(period_and_classes(sub, decompose(sub).components[0]).period)
        sub_pair = perron_pair(sub)
        rad_err.append(abs(sub_pair.rho - rho**d / mass))
        wl = math.sqrt(mass) * pair.v_left[idx]
        wr = math.sqrt(mass) * pair.v_right[idx]
        m = induced_matrix(sub)
        r_sub = sub_pair.rho
        eig_res.append(
            max(
                np.abs(m.T @ wl - r_sub * wl).max(),
                np.abs(sub.values @ (sub.measures * wr) - r_sub * wr).max(),
            )
        )

        def unit(v, mu=sub.measures):
            return v / math.sqrt(float(np.sum(mu * v * v)))

        dir_err.append(
            max(
                np.abs(unit(wl) - unit(sub_pair.v_left)).max(),
                np.abs(unit(wr) - unit(sub_pair.v_right)).max(),
            )
        )
        pairings.append(float(np.sum(sub.measures * wl * wr)))
    holds = (
        match
        and not dec_d.fragmented
        and all(p == 1 for p in periods)
        and all(e <= tol for e in rad_err)
        and all(e <= tol for e in eig_res)
        and all(e <= tol for e in dir_err)
    )
    return PoweringReport(
        d,
        ps.classes,
        match,
        not dec_d.fragmented,
        tuple(periods),
        tuple(rad_err),
        tuple(eig_res),
        tuple(dir_err),
        tuple(pairings),
        holds,
    )


def peripheral_kernel(g: Kernel, pair: PerronPair, structure) -> np.ndarray:
    """Value matrix of the peripheral part ``D rho vR(x) vL(y) [class(y) = class(x) + 1]``.

    Its ``l``-th power is ``D rho^l vR(x) vL(y)`` on pairs whose class
    difference is ``l`` mod ``D`` and zero elsewhere, because every cyclic class
    carries ``1/D`` of the pairing ``<vL, vR>``.
    """
    d = structure.period
    rank = _class_rank(structure, g.t)
    nxt = (rank[None, :] == (rank[:, None] + 1) % d) & (rank[:, None] >= 0) & (rank[None, :] >= 0)
    return d * pair.rho * np.outer(pair.v_right, pair.v_left) * nxt


def _fit_slope(ls, es):
    x = np.asarray(ls, dtype=float)
    y = np.log(np.asarray(es, dtype=float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def asymptotic_analysis(g: Kernel, lmax: int = 60) -> AsymptoticsReport:
    """Compare ``G^l`` with ``D rho^l vR(x) vL(y)`` on the class pattern.

    ``e_l`` is the largest deviation over pairs ``(i, j)`` with
    ``class(j) - class(i) = l mod D``; every other entry of ``G^l`` must vanish.
    Deviations within ``64 l eps`` of the entry magnitude are roundoff and are
    reported as 0. The decay rate is fitted by least squares on ``log e_l``
    over ``[lmax/2, lmax]``; when fewer than three values there sit above
    roundoff, the upper half of the resolvable range is used instead.
    """
    spec, comp = _require_irreducible_ground(g, TAU_SUPP)
    ps = period_and_classes(g, comp)
    d = ps.period
    if lmax < 10 * d:
        raise ValueError(f"lmax must be >= 10 * period = {10 * d}")
    pair = perron_pair(g)
    rho = pair.rho
    rank = _class_rank(ps, g.t)
    valid = (rank[:, None] >= 0) & (rank[None, :] >= 0)
    diff = (rank[None, :] - rank[:, None]) % d
    outer = d * np.outer(pair.v_right, pair.v_left)

    residuals, raw, off = [], [], []
    off_ok = True
    weighted = g.measures[:, None] * g.values
    cur = g.values.copy()
    for ell in range(1, lmax + 1):
        if ell > 1:
            cur = cur @ weighted
        on = valid & (diff == ell % d)
        target = rho**ell * outer
        dev = np.abs(cur - target)[on]
        e = float(dev.max()) if dev.size else 0.0
        scale = max(float(np.abs(cur[on]).max(initial=0.0)), float(np.abs(target[on]).max(initial=0.0)))
        raw.append(e)
        residuals.append(0.0 if e <= 64 * ell * EPS * scale else e)
        o = float(np.abs(cur[~on]).max(initial=0.0))
        off.append(o)
        off_ok = off_ok and o <= 1e-14

    ls = [l for l in range(max(1, lmax // 2), lmax + 1) if residuals[l - 1] > 0]
    if len(ls) < 3:
        live = [l for l in range(1, lmax + 1) if residuals[l - 1] > 0]
        ls = live[len(live) // 2:] if len(live) >= 6 else live
    slope = _fit_slope(ls, [residuals[l - 1] for l in ls]) if len(ls) >= 3 else None

    kern = Kernel(g.measures, g.values - peripheral_kernel(g, pair, ps))
    knorms = []
    for _, a, log_scale in iter_powers(kern, lmax):
        peak = float(np.abs(a).max())
        knorms.append(0.0 if peak == 0.0 else math.exp(log_scale) * peak)

    return AsymptoticsReport(
        rho=rho,
        period=d,
        classes=ps.classes,
        residuals=tuple(residuals),
        raw_residuals=tuple(raw),
        off_class_max=tuple(off),
        fit_range=(ls[0], ls[-1]) if ls else (),
        fitted_slope=slope,
        fitted_rate=None if slope is None else math.exp(slope),
        subdominant=subdominant_modulus(spec),
        kernel_norms=tuple(knorms),
        off_class_ok=off_ok,
    )


def eigenfunction_bound_check(g: Kernel, slack: float = 1e-9) -> bool:
    """``||f||_inf <= ||G||_inf ||f||_1 / |gamma|`` for every eigenpair with gamma != 0."""
    m = induced_matrix(g)
    w, vecs = np.linalg.eig(m.T)
    top = max(np.abs(w).max(), 0.0)
    gmax = float(np.abs(g.values).max())
    for gamma, f in zip(w, vecs.T):
        if abs(gamma) <= 1e-6 * max(top, 1e-300):
            continue
        f = f / np.abs(f).max()
        l1 = float(np.sum(g.measures * np.abs(f)))
        if 1.0 > gmax * l1 / abs(gamma) + slack:
            return False
    return True


def dual_spectrum_check(g: Kernel, tol: float = 1e-9) -> bool:
    a = np.array(spectrum(g).eigenvalues)
    b = np.array(spectrum(transpose(g)).eigenvalues)
    return _multiset_close(a, b, tol)


def _multiset_close(a, b, tol) -> bool:
    if a.size != b.size:
        return False
    left = list(b)
    for x in a:
        j = int(np.argmin([abs(x - y) for y in left]))
        if abs(x - left[j]) > tol:
            return False
        left.pop(j)
    return True


def perron_rigidity_check(g: Kernel, side: str = "left", tol: float = 1e-6) -> bool:
    """Nonnegative super-eigenfunctions ``T f >= rho f`` are multiples of the Perron vector.

    Solves, for every block, the LP that minimizes and maximizes ``f_i`` over
    ``{f >= 0, sum mu f = 1, T f >= rho (1 - 1e-12) f}``; the slack on ``rho``
    absorbs the eigenvalue's rounding error. The feasible set has width of order
    slack times a condition factor (about 3e4 on a chorded 7-cycle), hence the
    small slack and tight solver tolerances. Rigidity means the feasible set
    collapses onto the normalized Perron vector.
    """
    pair = perron_pair(g)
    mu = g.measures
    if side == "left":
        op = induced_matrix(g).T
        v = pair.v_left
    else:
        op = g.values * mu[None, :]
        v = pair.v_right
    t = g.t
    rho = pair.rho * (1 - 1e-12)
    a_ub = rho * np.eye(t) - op
    b_ub = np.zeros(t)
    a_eq = mu[None, :]
    target = v / float(mu @ v)
    for i in range(t):
        for sign in (1.0, -1.0):
            c = np.zeros(t)
            c[i] = sign
            res = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=[1.0], bounds=[(0, None)] * t, method="highs", options=_LP_OPTIONS)
            if res.status != 0:
                return False
            if abs(res.x[i] - target[i]) > tol * max(1.0, abs(target[i])):
                return False
    return True
