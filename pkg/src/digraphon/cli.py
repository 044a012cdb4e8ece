"""Command-line front end.

Every command prints one JSON document (an analysis report) on stdout. Errors
go to stderr as JSON; exit codes are 2 for usage errors, 3 for parse and
validation errors, 1 for failed checks.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from . import densities, metric, regularity, spectral, structure, verify
from .core import (
    Kernel,
    degrees,
    difference,
    edge_density,
    from_digraph,
    ground,
    parse,
    parse_edges,
    sample_digraph,
    serialize,
    serialize_edges,
)
from .errors import CellBudgetExceeded, DigraphonError, ParseError, ValidationError

COMMANDS = (
    "info",
    "components",
    "period",
    "spectrum",
    "power",
    "density",
    "cutnorm",
    "cutdist",
    "regularity",
    "asymptotics",
    "sample",
    "check",
)
EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_INPUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def jsonable(x):
    """Plain JSON types: complex as [re, im], sets sorted, arrays as lists."""
    if is_dataclass(x) and not isinstance(x, type):
        return jsonable(asdict(x))
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (frozenset, set)):
        return [jsonable(v) for v in sorted(x)]
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        return float(x)
    if x is None or isinstance(x, str):
        return x
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(obj) -> str:
    # repr-based float output is the shortest string that round-trips
    return json.dumps(jsonable(obj), sort_keys=True, separators=(",", ":"), allow_nan=False)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="digraphon", description="Analyse step digraphons.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("input", help="digraphon JSON or edge-list file")
    p.add_argument("other", nargs="?", help="second input for cutnorm / cutdist")
    p.add_argument("--format", choices=("json", "edges"))
    p.add_argument("--seed", type=int)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.add_argument("--d", type=float, default=0.5)
    p.add_argument("--max-cells", type=int, default=64)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--lmax", type=int, default=60)
    p.add_argument("--horizon", type=int)
    p.add_argument("--csv", metavar="PATH")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--mode", choices=("exact", "heuristic"), default="exact")
    p.add_argument("--pattern", default="cycle", help="cycle, path, or an edge-list file")
    p.add_argument("--rooted", action="store_true")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--output", metavar="PATH")
    return p


def load(path: str, fmt: str | None = None, kernel: bool = False) -> Kernel:
    fp = Path(path)
    if fmt is None:
        if fp.suffix == ".json":
            fmt = "json"
        elif fp.suffix == ".edges":
            fmt = "edges"
        else:
            raise UsageError(f"cannot infer the format of {path!r}; pass --format")
    try:
        text = fp.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None
    if fmt == "json":
        return parse(text, kernel=kernel)
    return from_digraph(parse_edges(text))


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in r])


def _need_seed(args):
    if args.seed is None:
        raise UsageError(f"{args.command} is randomized here and requires --seed")


def cmd_info(g, args, warnings):
    deg = degrees(g)
    return {
        "t": g.t,
        "measures": g.measures,
        "edge_density": edge_density(g),
        "ground": ground(g),
        "degrees": {"min_out": deg.min_out, "max_out": deg.max_out, "min_in": deg.min_in, "max_in": deg.max_in},
        "norms": densities.kernel_norms(g),
    }


def cmd_components(g, args, warnings):
    dec = structure.decompose(g)
    return {
        "components": dec.components,
        "fragmented": dec.fragmented,
        "condensation": dec.condensation,
        "extended_condensation": dec.extended_condensation,
    }


def cmd_period(g, args, warnings):
    out = []
    for comp in structure.decompose(g).components:
        ps = structure.period_and_classes(g, comp)
        prof = structure.reachability_profile(g, comp[0], comp[0], args.horizon)
        out.append(
            {
                "component": comp,
                "period": ps.period,
                "classes": ps.classes,
                "canonical_shift": ps.canonical_shift,
                "return_profile": {"block": comp[0], "onset": prof.onset, "shift": prof.shift},
            }
        )
    if not out:
        warnings.append("no strong components")
    return {"components": out}


def cmd_spectrum(g, args, warnings):
    spec = spectral.spectrum(g, tol_rel=args.tol)
    res = {
        "eigenvalues": spec.eigenvalues,
        "multiplicities": [{"value": v, "multiplicity": m} for v, m in spec.multiplicities],
        "rho": spec.rho,
        "peripheral": spec.peripheral,
        "tol_rel": spec.tol_rel,
    }
    if args.csv:
        gs = spectral.gelfand_estimate(g, max(2, args.k))
        _write_csv(args.csv, ["k", "gelfand"], [(k + 1, v) for k, v in enumerate(gs.values)])
    return res


def cmd_power(g, args, warnings):
    p = densities.power(g, args.k)
    return {"k": args.k, "measures": p.measures, "values": p.values}


def cmd_density(g, args, warnings):
    if args.pattern == "cycle":
        if args.k < 2:
            raise UsageError("--k must be >= 2 for cycles")
        return {"pattern": "cycle", "k": args.k, "value": densities.cycle_density(g, args.k, args.rooted)}
    if args.pattern == "path":
        dg = densities.directed_path(args.k)
    else:
        dg = parse_edges(Path(args.pattern).read_text())
    rep = densities.hom_density(dg, g)
    return {"pattern": dg.sorted_edges(), "value": rep.value, "assignments": rep.assignment_count}


def cmd_cutnorm(g, args, warnings):
    if args.mode == "heuristic":
        _need_seed(args)
    k = g
    if args.other:
        k = difference(g, load(args.other, args.format, kernel=True))
    cert = metric.cut_norm(k, args.mode, args.seed or 0)
    return {"value": cert.value, "S": cert.S, "T": cert.T, "exact": cert.exact}


def cmd_cutdist(g, args, warnings):
    if not args.other:
        raise UsageError("cutdist needs two inputs")
    if args.mode == "heuristic":
        _need_seed(args)
    h = load(args.other, args.format)
    cd = metric.cut_distance(g, h, args.mode, args.seed or 0)
    warnings.append("block permutations only: the value is an upper bound on the cut distance")
    return {"upper_bound": cd.upper_bound, "permutation": cd.permutation, "t": cd.t, "exact": cd.exact}


def cmd_regularity(g, args, warnings):
    try:
        part = regularity.weak_regular_partition(g, args.epsilon, args.max_cells, seed=args.seed or 0)
    except CellBudgetExceeded as exc:
        warnings.append(str(exc))
        part = exc.partition
    res = regularity.cluster_digraph(g, part, args.d, args.epsilon, seed=args.seed or 0)
    check = regularity.verify_cluster_digraph(g, res)
    return {
        "partition": res.partition,
        "densities": res.densities,
        "deviations": res.deviations,
        "digraph": res.digraph,
        "d": res.d,
        "epsilon": res.epsilon,
        "min_outdegree": res.min_outdegree,
        "min_outdegree_bound": res.min_outdegree_bound,
        "compliant": part.compliant,
        "iterations": part.iterations,
        "iteration_bound": part.iteration_bound,
        "recheck": check,
    }


def cmd_asymptotics(g, args, warnings):
    ar = spectral.asymptotic_analysis(g, args.lmax)
    if args.csv:
        rows = [(l + 1, e, r, o) for l, (e, r, o) in enumerate(zip(ar.residuals, ar.raw_residuals, ar.off_class_max))]
        _write_csv(args.csv, ["l", "residual", "raw_residual", "off_class_max"], rows)
    if ar.fitted_rate is None:
        warnings.append("residuals reach roundoff before a rate can be fitted")
    return ar


def cmd_sample(g, args, warnings):
    _need_seed(args)
    dg = sample_digraph(g, args.n, args.seed)
    text = serialize_edges(dg)
    res = {"n": dg.n, "edges": len(dg.edges)}
    if args.output:
        Path(args.output).write_text(text)
        res["output"] = args.output
    else:
        res["edge_list"] = text
    return res


def cmd_check(g, args, warnings):
    res = verify.run_checks(g, epsilon=args.epsilon, d=args.d, max_cells=min(args.max_cells, 16))
    if args.csv:
        if res["rho"] > 0:
            gs = spectral.gelfand_estimate(g, verify.GELFAND_K)
        else:
            gs = spectral.gelfand_estimate(g, max(2, g.t + 1))
        _write_csv(args.csv, ["k", "gelfand"], [(k + 1, v) for k, v in enumerate(gs.values)])
    return res


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


def _fail(code, kind, message):
    sys.stderr.write(dumps({"error": kind, "message": message, "exit_code": code}) + "\n")
    return code


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    warnings: list[str] = []
    try:
        kernel_input = args.command == "cutnorm"
        g = load(args.input, args.format, kernel=kernel_input)
        result = HANDLERS[args.command](g, args, warnings)
    except UsageError as exc:
        return _fail(EXIT_USAGE, "UsageError", str(exc))
    except (ValidationError, DigraphonError, ValueError) as exc:
        return _fail(EXIT_INPUT, type(exc).__name__, str(exc))
    params = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "input")}
    report = {
        "command": args.command,
        "input_digest": hashlib.sha256(serialize(g).encode()).hexdigest(),
        "parameters": params,
        "result": result,
        "warnings": warnings,
    }
    sys.stdout.write(dumps(report) + "\n")
    if args.command == "check" and not result["passed"]:
        return EXIT_CHECK
    return EXIT_OK


def main(argv=None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
