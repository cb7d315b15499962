"""Command-line front end.

    qgscat smatrix  GRAPH --k 1.0
    qgscat compose  GRAPH [GRAPH ...] --links LINKS --k-min 0.5 --k-max 3 --steps 50
    qgscat compare  GRAPH --k-min 0.5 --k-max 3 --steps 50 --tol 1e-8
    qgscat embedded GRAPH --k-min 0.5 --k-max 7 --steps 200

Exit codes: 0 ok, 1 tolerance failure, 2 parse/validation error,
3 decomposition precondition violated.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .direct import ConsistencyError, DegenerateError, scattering_direct
from .factorization import ConditionAError, compose_graph, compose_many, embedded_eigenvalue_scan
from .graph import DecompositionError, GraphError, star_decomposition, validate
from .io import ParseError, load_graph, load_links, write_table

EXIT_OK, EXIT_TOL, EXIT_PARSE, EXIT_DECOMP = 0, 1, 2, 3


class CLIError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def k_grid(args) -> np.ndarray:
    if args.k is not None:
        if args.k_min is not None or args.k_max is not None or args.steps is not None:
            raise CLIError("use either --k or --k-min/--k-max/--steps", EXIT_PARSE)
        if not args.k > 0:
            raise CLIError("--k must be positive", EXIT_PARSE)
        return np.array([args.k])
    if args.k_min is None or args.k_max is None or args.steps is None:
        raise CLIError("a momentum is required: --k, or --k-min, --k-max and --steps", EXIT_PARSE)
    if not 0 < args.k_min < args.k_max:
        raise CLIError("need 0 < k-min < k-max", EXIT_PARSE)
    if args.steps < 1:
        raise CLIError("--steps must be positive", EXIT_PARSE)
    if args.steps == 1:
        return np.array([args.k_min])
    return np.linspace(args.k_min, args.k_max, args.steps)


def _load_valid(path):
    try:
        graph, conditions, cuts = load_graph(path)
    except (ParseError, GraphError) as exc:
        raise CLIError(str(exc), EXIT_PARSE) from None
    problems = validate(graph, conditions)
    if problems:
        raise CLIError(f"{path}: " + "; ".join(problems), EXIT_PARSE)
    return graph, conditions, cuts


def _meta(args, command, **extra):
    meta = {"command": command, "version": __version__, "tolerance": args.tol}
    meta.update(extra)
    return meta


def cmd_smatrix(args):
    graph, conditions, _ = _load_valid(args.graph)
    rows = []
    for k in k_grid(args):
        row = {"k": k, "status": "ok", "unitarity_residual": None, "sigma_min": None, "S": None}
        try:
            S = scattering_direct(graph, conditions, k, check=False)
            row["unitarity_residual"] = S.unitarity_residual()
            row["S"] = S.entries
        except DegenerateError as exc:
            row["status"] = "degenerate"
            row["sigma_min"] = exc.sigma_min
        rows.append(row)
    columns = ["k", "status", "unitarity_residual", "sigma_min"]
    return write_table(columns, rows, _meta(args, "smatrix", graph=Path(args.graph).name, n=graph.n),
                       args.format), EXIT_OK


def cmd_compose(args):
    if not args.links:
        raise CLIError("compose requires --links", EXIT_PARSE)
    parts = [_load_valid(p) for p in args.graphs]
    try:
        links = load_links(args.links)
    except ParseError as exc:
        raise CLIError(str(exc), EXIT_PARSE) from None
    sizes = [g.n for g, _, _ in parts]
    for ln in links.links:
        for g, r in (ln.first, ln.second):
            if not (0 <= g < len(parts) and 0 <= r < sizes[g]):
                raise CLIError(f"{args.links}: link refers to nonexistent ray [{g}, {r}]", EXIT_PARSE)
    rows = []
    labels = None
    for k in k_grid(args):
        row = {"k": k, "status": "ok", "unitarity_residual": None, "sigma_min": None, "S": None}
        steps = []
        try:
            mats = [scattering_direct(g, c, k, check=False).entries for g, c, _ in parts]
            S, labels = compose_many(mats, links, k, diagnostics=steps)
            row["unitarity_residual"] = float(np.abs(S.conj().T @ S - np.eye(S.shape[0])).max())
            row["S"] = S
        except ConditionAError as exc:
            row["status"] = "conditionA"
            row["sigma_min"] = exc.sigma_min
        except DegenerateError as exc:
            row["status"] = "degenerate"
            row["sigma_min"] = exc.sigma_min
        else:
            sig = [d["sigma_min"] for d in steps if "sigma_min" in d]
            row["sigma_min"] = min(sig) if sig else None
        rows.append(row)
    n = sum(sizes) - 2 * links.p
    meta = _meta(args, "compose", graphs=[Path(p).name for p in args.graphs], n=n,
                 rays=None if labels is None else [list(lab) for lab in labels])
    columns = ["k", "status", "unitarity_residual", "sigma_min"]
    return write_table(columns, rows, meta, args.format), EXIT_OK


def cmd_compare(args):
    graph, conditions, cuts = _load_valid(args.graph)
    try:
        decomposition = star_decomposition(graph, conditions, cuts)
    except DecompositionError as exc:
        raise CLIError(f"{args.graph}: {exc}", EXIT_DECOMP) from None
    rows, worst = [], 0.0
    for k in k_grid(args):
        row = {"k": k, "status": "ok", "deviation": None}
        try:
            Sd = scattering_direct(graph, conditions, k, check=False).entries
            Sc = compose_graph(graph, conditions, k, decomposition=decomposition).entries
            row["deviation"] = float(np.abs(Sd - Sc).max())
            worst = max(worst, row["deviation"])
        except DegenerateError:
            row["status"] = "degenerate"
        except ConditionAError:
            row["status"] = "conditionA"
        rows.append(row)
    passed = worst <= args.tol
    meta = _meta(args, "compare", graph=Path(args.graph).name, max_deviation=worst, passed=passed)
    text = write_table(["k", "status", "deviation"], rows, meta, args.format, matrix_key=None)
    return text, EXIT_OK if passed else EXIT_TOL


def cmd_embedded(args):
    graph, conditions, cuts = _load_valid(args.graph)
    try:
        found = embedded_eigenvalue_scan(graph, conditions, k_grid(args), cuts=cuts)
    except DecompositionError as exc:
        raise CLIError(f"{args.graph}: {exc}", EXIT_DECOMP) from None
    rows = [{"k": e.k, "sigma_min": e.sigma_min, "kernel_dim": e.kernel_dim,
             "kernel_residual": e.kernel_residual} for e in found]
    meta = _meta(args, "embedded", graph=Path(args.graph).name, count=len(rows))
    text = write_table(["k", "sigma_min", "kernel_dim", "kernel_residual"], rows, meta, args.format,
                       matrix_key=None)
    return text, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qgscat", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--k", type=float, default=None, help="single momentum")
        p.add_argument("--k-min", type=float, default=None)
        p.add_argument("--k-max", type=float, default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--tol", type=float, default=1e-8)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", default="-", help="file path, or - for stdout")

    p = sub.add_parser("smatrix", help="scattering matrix by direct solve")
    p.add_argument("graph")
    common(p)
    p.set_defaults(func=cmd_smatrix)

    p = sub.add_parser("compose", help="compose scattering matrices of linked graphs")
    p.add_argument("graphs", nargs="+")
    p.add_argument("--links", required=False, default=None, help="links file")
    common(p)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("compare", help="direct solve against star-decomposition composition")
    p.add_argument("graph")
    common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("embedded", help="scan for eigenvalues embedded in the continuous spectrum")
    p.add_argument("graph")
    common(p)
    p.set_defaults(func=cmd_embedded)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text, code = args.func(args)
    except CLIError as exc:
        print(f"qgscat {args.command}: {exc}", file=sys.stderr)
        return exc.code
    except ConsistencyError as exc:
        print(f"qgscat {args.command}: {exc}", file=sys.stderr)
        return EXIT_TOL
    if args.output == "-":
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text, encoding="utf-8")
    if code == EXIT_TOL:
        print(f"qgscat {args.command}: deviation exceeds tolerance {args.tol}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
