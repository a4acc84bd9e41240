"""Command line: ``qcycle decide | spectrum | gadget | export-dot``.

Exit status: 0 when the property holds, 10 when it fails, 2 on malformed input.
Flags may also be set through ``QCYCLE_MODEL``, ``QCYCLE_SEED``,
``QCYCLE_EPSILON``, ``QCYCLE_FORMAT`` and ``QCYCLE_CONST`` (comma-separated
``KEY=VAL`` pairs); explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .constants import resolve
from .formats import (dot_base, dot_double, dot_lifted, dump_array_document, load_path)
from .graphs import (BIPARTITE_TEST, CYCLE_TEST, AdjacencyArray, AncillarySpec,
                     MalformedInputError, parity, parity_gadget, sample_coloring)
from .search import decide_bipartite_matrix, decide_forest_array, decide_forest_matrix
from .spanprog import STProgram, spectrum_report

EXIT_HOLDS = 0
EXIT_FAILS = 10
EXIT_MALFORMED = 2


def _parse_consts(items) -> dict:
    out = {}
    for item in items or []:
        for part in item.split(","):
            if not part.strip():
                continue
            if "=" not in part:
                raise MalformedInputError(f"--const expects KEY=VAL, got {part!r}")
            k, v = part.split("=", 1)
            out[k.strip().upper()] = float(v)
    return out


def _env(name, default=None):
    return os.environ.get(f"QCYCLE_{name}", default)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", choices=["human", "structured"], default=None)
    common.add_argument("--const", action="append", default=[], metavar="KEY=VAL")

    p = argparse.ArgumentParser(prog="qcycle", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("decide", parents=[common], help="decide forest / bipartite")
    d.add_argument("property", choices=["forest", "bipartite"])
    d.add_argument("input", help="edge list or adjacency-array JSON document")
    d.add_argument("--model", choices=["matrix", "array"], default=None)
    d.add_argument("--epsilon", type=float, default=None)

    s = sub.add_parser("spectrum", parents=[common], help="Δ spectrum of the st-connectivity program")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--alpha", type=float, default=1.0)

    g = sub.add_parser("gadget", parents=[common], help="write a parity-gadget adjacency array")
    g.add_argument("--p", type=int, required=True)
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--x", help="bit string of length p")
    src.add_argument("--parity", choices=["even", "odd"])
    g.add_argument("--variant", choices=[CYCLE_TEST, BIPARTITE_TEST], default=CYCLE_TEST)

    e = sub.add_parser("export-dot", parents=[common], help="DOT text of G, H or H'")
    e.add_argument("input")
    e.add_argument("--which", choices=["G", "H", "Hprime"], default="G")
    e.add_argument("--k", type=int, default=1)
    e.add_argument("--s-mod", type=int, choices=[2, 3], default=3)
    e.add_argument("--coloring-seed", type=int, default=None)
    return p


def _emit(doc: dict, fmt: str, human_lines: list[str]) -> None:
    if fmt == "structured":
        sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    else:
        sys.stdout.write("\n".join(human_lines) + "\n")


def cmd_decide(args, consts, fmt) -> int:
    obj = load_path(args.input)
    model = args.model or _env("MODEL") or ("array" if isinstance(obj, AdjacencyArray) else "matrix")
    seed = args.seed if args.seed is not None else int(_env("SEED", "0"))
    eps = args.epsilon if args.epsilon is not None else float(_env("EPSILON", "0.05"))
    if not 0 < eps < 0.5:
        raise MalformedInputError("epsilon must lie in (0, 1/2)")
    if model == "array" and args.property == "bipartite":
        raise MalformedInputError("the array model decides forests only")
    graph = obj.to_graph() if isinstance(obj, AdjacencyArray) else obj
    if args.property == "forest" and model == "array":
        arr = obj if isinstance(obj, AdjacencyArray) else AdjacencyArray.from_graph(obj)
        rep = decide_forest_array(arr, seed=seed, epsilon=eps, consts=consts)
    elif args.property == "forest":
        rep = decide_forest_matrix(graph, seed=seed, epsilon=eps, consts=consts)
    else:
        rep = decide_bipartite_matrix(graph, seed=seed, epsilon=eps, consts=consts)
    doc = rep.to_dict()
    doc.update({"property": args.property, "epsilon": eps, "n": graph.n, "m": graph.m})
    w = doc["witness"]
    lines = [
        f"property   {args.property}",
        f"model      {model}",
        f"verdict    {rep.verdict}" + (f" (vertex {rep.vertex})" if rep.vertex else ""),
        f"witness    {json.dumps(w, sort_keys=True) if w else '-'}",
        f"queries    {rep.counters.queries}",
        f"grover     {rep.counters.grover_iterations}",
        f"walk steps {rep.counters.walk_steps}",
        f"seed       {seed}",
    ]
    if rep.note:
        lines.append(f"note       {rep.note}")
    _emit(doc, fmt, lines)
    return EXIT_HOLDS if rep.property_holds else EXIT_FAILS


def cmd_spectrum(args, consts, fmt) -> int:
    if not 3 <= args.n <= 12:
        raise MalformedInputError("spectrum needs 3 <= n <= 12")
    if args.alpha < 1:
        raise MalformedInputError("alpha must be >= 1")
    rep = spectrum_report(STProgram(args.n, 1, args.n, args.alpha))
    lines = [f"n = {rep['n']}, alpha = {rep['alpha']}", "eigenvalue      multiplicity"]
    lines += [f"{v:<15} {c}" for v, c in rep["multiplicities"].items()]
    lines += [f"gap                     {rep['gap']:.12f}",
              f"min nonzero sing. value {rep['min_nonzero_singular_value']:.12f}",
              f"|A^T B - M'|_max        {rep['factorization_residual']:.3e}"]
    _emit(rep, fmt, lines)
    return EXIT_HOLDS


def cmd_gadget(args, consts, fmt) -> int:
    if args.p < 2:
        raise MalformedInputError("gadget needs p >= 2")
    if args.x is not None:
        x = args.x
        if len(x) != args.p or set(x) - {"0", "1"}:
            raise MalformedInputError(f"--x must be a bit string of length {args.p}")
    else:
        x = "1" * (1 if args.parity == "odd" else 0) + "0" * (args.p - (1 if args.parity == "odd" else 0))
    try:
        arr = parity_gadget(x, args.variant)
    except ValueError as exc:
        raise MalformedInputError(str(exc)) from None
    sys.stdout.write(dump_array_document(arr, x=x, variant=args.variant, parity=parity(x)))
    return EXIT_HOLDS


def cmd_export_dot(args, consts, fmt) -> int:
    obj = load_path(args.input)
    g = obj.to_graph() if isinstance(obj, AdjacencyArray) else obj
    if args.which == "G":
        sys.stdout.write(dot_base(g))
        return EXIT_HOLDS
    if not 1 <= args.k <= g.n:
        raise MalformedInputError(f"--k must lie in 1..{g.n}")
    col = sample_coloring(g.n, args.coloring_seed) if (args.coloring_seed is not None and args.s_mod == 3) else None
    spec = AncillarySpec(g, args.s_mod, args.k, col)
    sys.stdout.write(dot_lifted(spec) if args.which == "H" else dot_double(spec))
    return EXIT_HOLDS


COMMANDS = {"decide": cmd_decide, "spectrum": cmd_spectrum, "gadget": cmd_gadget, "export-dot": cmd_export_dot}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fmt = args.format or _env("FORMAT", "human")
    try:
        consts = resolve(_parse_consts([_env("CONST", "")] + list(args.const)))
        return COMMANDS[args.command](args, consts, fmt)
    except (MalformedInputError, KeyError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"qcycle: error: {msg}\n")
        return EXIT_MALFORMED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
