"""Command-line entry point: ``fracdecomp <subcommand> ...``.

Exit codes: 0 success (certified), 1 solved but not certified, 2 bad input or
guard exceeded, 3 precondition failed, 4 solver did not converge.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds_lab, latin, partite_graph, scheme_core
from .errors import (DomainError, ParseError, PreconditionError, ResourceError, UnsupportedError,
                     ValidityError)
from .fan_solver import (SolverConfig, default_eta, format_weights, k_matvec, lift,
                         mg_matvec, parse_weights, solve_fans, verify_decomposition)
from .reporting import SCHEMA_VERSION, jsonable

EXIT_OK = 0
EXIT_UNCERTIFIED = 1
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_CONVERGENCE = 4

log = logging.getLogger("fracdecomp")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# -- argument parsing ---------------------------------------------------------


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def _add_output(p: argparse.ArgumentParser) -> None:
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--output", "-o", help="write the report here instead of stdout")


def _add_solver(p: argparse.ArgumentParser) -> None:
    p.add_argument("--solve-tol", type=_positive_float, default=1e-10)
    p.add_argument("--cert-tol", type=_positive_float, default=1e-8)
    p.add_argument("--eta-multiplier", type=_positive_float, default=1.0,
                   help="shift is this multiple of theta_1 (2n for triangles)")
    p.add_argument("--dense-cutoff", type=int, default=512)
    p.add_argument("--max-iterations", type=_positive_int, default=5000)
    p.add_argument("--method", choices=("auto", "cg", "dense", "exact"), default="auto")
    p.add_argument("--threads", type=_positive_int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracdecomp",
                                     description="Fractional clique decompositions of multipartite graphs.")
    parser.add_argument("--verbose", "-v", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues of the fan matrix and exact verification")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--no-verify", action="store_true", help="print formulas only")
    _add_output(p)

    p = sub.add_parser("solve", help="solve the fan system for a graph file")
    p.add_argument("graph")
    p.add_argument("--fan-out", help="fan weight file (default: <graph>.fanweights)")
    p.add_argument("--tri-out", help="clique weight file (default: <graph>.triangleweights)")
    _add_solver(p)
    _add_output(p)

    p = sub.add_parser("verify", help="check a weight file against a graph")
    p.add_argument("graph")
    p.add_argument("weights")
    p.add_argument("--cert-tol", type=_positive_float, default=1e-8)
    _add_output(p)

    p = sub.add_parser("threshold", help="norm constants and degree thresholds")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--t", type=int, default=2)
    _add_output(p)

    p = sub.add_parser("latin", help="fractional completion of a partial latin square")
    p.add_argument("pls")
    p.add_argument("--tri-out", help="write clique weights here")
    p.add_argument("--warn-above", type=float, default=latin.DENSITY_WARNING)
    _add_solver(p)
    _add_output(p)

    p = sub.add_parser("bench", help="time matvecs and solves on complete graphs (CSV)")
    p.add_argument("--n", type=_positive_int, nargs="+", required=True, dest="n_list")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.add_argument("--output", "-o")
    _add_solver(p)

    p = sub.add_parser("generate", help="write test inputs")
    p.add_argument("kind", choices=("complete", "pls"))
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--c", type=float, default=0.0, help="target density for 'pls'")
    p.add_argument("--keep-prob", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", "-o")
    return parser


# -- helpers ----------------------------------------------------------------------


def _effective_config(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}


def _solver_config(args, k: int, n: int) -> SolverConfig:
    return SolverConfig(solve_tol=args.solve_tol, cert_tol=args.cert_tol,
                        eta=args.eta_multiplier * default_eta(k, n), dense_cutoff=args.dense_cutoff,
                        max_iterations=args.max_iterations, method=args.method, threads=args.threads)


def _flatten(obj, prefix="") -> list[str]:
    if isinstance(obj, dict):
        if set(obj) == {"exact", "float"}:
            return [f"{prefix}: {obj['exact']} ({obj['float']:.12g})"]
        lines = []
        for k, v in obj.items():
            lines.extend(_flatten(v, f"{prefix}.{k}" if prefix else str(k)))
        return lines
    if isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        lines = []
        for i, v in enumerate(obj):
            lines.extend(_flatten(v, f"{prefix}[{i}]"))
        return lines
    return [f"{prefix}: {obj}"]


def _emit(args, result: dict, code: int) -> int:
    doc = {"schema": SCHEMA_VERSION, "command": args.command, "config": _effective_config(args),
           "result": jsonable(result), "exit_code": code}
    if getattr(args, "format", "json") == "json":
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = "\n".join(_flatten(doc)) + "\n"
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def _solve_exit(report) -> int:
    if not report.converged:
        return EXIT_CONVERGENCE
    return EXIT_OK if report.certified else EXIT_UNCERTIFIED


def _read(path) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}", EXIT_INPUT) from exc


# -- subcommands --------------------------------------------------------------------


def cmd_spectrum(args) -> int:
    params = scheme_core.SchemeParams(args.k, args.n, args.t)
    pairs = scheme_core.eigenvalues_M(params)
    result = {
        "k": args.k, "n": args.n, "t": args.t,
        "eigenvalues": [{"theta": theta, "multiplicity": mult} for theta, mult in pairs],
    }
    if not args.no_verify:
        result["spectrum_verified"] = scheme_core.verify_spectrum(params)
        if args.t == 2:
            result["structure_constants_verified"] = scheme_core.verify_structure_constants(params)
            result["idempotents_verified"] = scheme_core.verify_idempotents(params)
    ok = all(v for key, v in result.items() if key.endswith("_verified"))
    return _emit(args, result, EXIT_OK if ok else EXIT_UNCERTIFIED)


def cmd_solve(args) -> int:
    G = partite_graph.parse_graph(_read(args.graph))
    config = _solver_config(args, G.k, G.n)
    x, report = solve_fans(G, config)
    fan_out = args.fan_out or f"{args.graph}.fanweights"
    tri_out = args.tri_out or f"{args.graph}.triangleweights"
    Path(fan_out).write_text(format_weights("fanweights", G.k, G.n, x.values))
    Path(tri_out).write_text(format_weights("triangleweights", G.k, G.n, lift(G, x.values)))
    result = {"report": report.to_dict(), "fan_weights": fan_out, "triangle_weights": tri_out,
              "min_degree_deficiency": partite_graph.min_degree_deficiency(G)}
    return _emit(args, result, _solve_exit(report))


def cmd_verify(args) -> int:
    G = partite_graph.parse_graph(_read(args.graph))
    kind, k, n, values = parse_weights(_read(args.weights))
    if (k, n) != (G.k, G.n):
        raise CliError(f"weights are for k={k}, n={n} but the graph has k={G.k}, n={G.n}", EXIT_INPUT)
    expected = G.num_edges if kind == "fanweights" else len(G.clique_edge_index)
    if len(values) != expected:
        raise CliError(f"{kind} file has {len(values)} entries, graph needs {expected}", EXIT_INPUT)
    z = lift(G, values) if kind == "fanweights" else values
    report = verify_decomposition(G, z, args.cert_tol)
    result = {"report": report.to_dict(), "weights_kind": kind}
    return _emit(args, result, EXIT_OK if report.certified else EXIT_UNCERTIFIED)


def cmd_threshold(args) -> int:
    k, t = args.k, args.t
    result: dict = {"k": k, "t": t, "hypergraph": bounds_lab.hypergraph_bound(k, t).to_dict()}
    if t == 2:
        result["clique"] = {
            "leading_coeff": bounds_lab.clique_leading_coeff(k),
            "perturbation_coeff": bounds_lab.perturbation_coeff(k),
            "tau": bounds_lab.tau_clique(k),
            "comparison": bounds_lab.tau_comparison(k)._asdict(),
        }
    if (k, t) == (3, 2):
        ts = bounds_lab.thresholds_k3()
        result["triangles"] = ts.to_dict()
        result["triangles"]["product_norm_at_c_basic"] = bounds_lab.prodnorm_bound(ts.c_basic)._asdict()
    return _emit(args, result, EXIT_OK)


def cmd_latin(args) -> int:
    P = latin.parse_pls(_read(args.pls))
    config = _solver_config(args, 3, P.n)
    z, report, dens = latin.fractional_complete(P, config, warn_above=args.warn_above)
    if args.tri_out:
        Path(args.tri_out).write_text(format_weights("triangleweights", 3, P.n, z.values))
    result = {"report": report.to_dict(), "density": dens, "filled_cells": len(P),
              "triangles": len(z.values),
              "min_weight": float(z.values.min()) if len(z.values) else None,
              "max_weight": float(z.values.max()) if len(z.values) else None}
    return _emit(args, result, _solve_exit(report))


def _time_ms(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return 1000 * best


def cmd_bench(args) -> int:
    rows = []
    rng = np.random.default_rng(0)
    for n in args.n_list:
        G = partite_graph.complete_multipartite(args.k, n)
        config = _solver_config(args, G.k, n)
        y = rng.standard_normal(G.num_edges)
        matvec_ms = _time_ms(lambda: mg_matvec(G, y, threads=args.threads)
                             + config.eta * k_matvec(n, y, k=args.k), args.repeats)
        start = time.perf_counter()
        x, report = solve_fans(G, config)
        solve_ms = 1000 * (time.perf_counter() - start)
        rows.append({"n": n, "edges": G.num_edges, "triangles": len(G.clique_edge_index),
                     "matvec_ms": f"{matvec_ms:.3f}", "solve_ms": f"{solve_ms:.3f}",
                     "iterations": x.iterations, "residual": f"{report.decomposition_residual_inf:.3e}"})
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        writer = csv.DictWriter(out, fieldnames=["n", "edges", "triangles", "matvec_ms", "solve_ms",
                                                 "iterations", "residual"])
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.output:
            out.close()
    return EXIT_OK


def cmd_generate(args) -> int:
    if args.kind == "complete":
        text = partite_graph.format_graph(partite_graph.complete_multipartite(args.k, args.n))
    else:
        rng = np.random.default_rng(args.seed)
        text = latin.format_grid(latin.deletion_pls(args.n, args.c, rng, keep_prob=args.keep_prob))
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum, "solve": cmd_solve, "verify": cmd_verify, "threshold": cmd_threshold,
    "latin": cmd_latin, "bench": cmd_bench, "generate": cmd_generate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except PreconditionError as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ParseError, ValidityError, DomainError, ResourceError, UnsupportedError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
