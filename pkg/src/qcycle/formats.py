"""Input parsing (edge lists, adjacency-array documents) and DOT export/import."""
from __future__ import annotations

import json
import re
from pathlib import Path

from .graphs import (AdjacencyArray, AncillarySpec, Graph, HVertex, InvalidEdgeError,
                     MalformedInputError, bipartite_double, build_ancillary_explicit)


def parse_edge_list(text: str) -> Graph:
    """``n m`` header then ``m`` lines ``u v``; ``#`` starts a comment."""
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append((lineno, line))
    if not rows:
        raise MalformedInputError("empty input: expected an 'n m' header")
    lineno, header = rows[0]
    try:
        n, m = (int(tok) for tok in header.split())
    except ValueError:
        raise MalformedInputError(f"line {lineno}: expected 'n m' header, got {header!r}") from None
    if n < 1 or m < 0:
        raise MalformedInputError(f"line {lineno}: need n >= 1 and m >= 0")
    if len(rows) - 1 != m:
        raise MalformedInputError(f"header announces {m} edges but {len(rows) - 1} edge lines follow")
    edges = []
    for lineno, line in rows[1:]:
        parts = line.split()
        if len(parts) != 2 or not all(re.fullmatch(r"-?\d+", p) for p in parts):
            raise MalformedInputError(f"line {lineno}: expected 'u v', got {line!r}")
        edges.append((int(parts[0]), int(parts[1])))
    try:
        return Graph.from_edges(n, edges)
    except InvalidEdgeError as exc:
        raise MalformedInputError(str(exc)) from None


def dump_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.sorted_edges()]
    return "\n".join(lines) + "\n"


def parse_array_document(text: str) -> AdjacencyArray:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInputError(f"line {exc.lineno}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict) or "degrees" not in doc or "neighbors" not in doc:
        raise MalformedInputError("adjacency-array document needs 'degrees' and 'neighbors'")
    try:
        degrees = tuple(int(d) for d in doc["degrees"])
        nbrs = tuple(tuple(int(v) for v in row) for row in doc["neighbors"])
    except (TypeError, ValueError):
        raise MalformedInputError("degrees/neighbors must be integer arrays") from None
    return AdjacencyArray(degrees, nbrs)


def dump_array_document(arr: AdjacencyArray, **extra) -> str:
    doc = {"degrees": list(arr.degrees), "neighbors": [list(r) for r in arr.neighbors]}
    doc.update(extra)
    return json.dumps(doc, sort_keys=True) + "\n"


def load_text(text: str) -> Graph | AdjacencyArray:
    """Array document if the text is JSON, edge list otherwise."""
    if text.lstrip().startswith("{"):
        return parse_array_document(text)
    return parse_edge_list(text)


def load_path(path: str | Path) -> Graph | AdjacencyArray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from None
    return load_text(text)


# --- DOT -------------------------------------------------------------------------

def _quote(name: str) -> str:
    return '"' + name.replace('"', r'\"') + '"'


def to_dot(nodes: list[str], edges: list[tuple[str, str]], name: str = "G",
           labels: dict[str, str] | None = None) -> str:
    out = [f"graph {name} {{"]
    for v in nodes:
        attr = f" [label={_quote(labels[v])}]" if labels and v in labels else ""
        out.append(f"  {_quote(v)}{attr};")
    for u, v in edges:
        out.append(f"  {_quote(u)} -- {_quote(v)};")
    out.append("}")
    return "\n".join(out) + "\n"


_NODE = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*(\[.*\])?\s*;\s*$')
_EDGE = re.compile(r'^\s*"((?:[^"\\]|\\.)*)"\s*--\s*"((?:[^"\\]|\\.)*)"\s*;\s*$')


def parse_dot(text: str) -> tuple[list[str], list[tuple[str, str]]]:
    """Parse the subset of DOT written by :func:`to_dot`."""
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines or not re.match(r"^\s*graph\s+\S+\s*\{\s*$", lines[0]) or lines[-1].strip() != "}":
        raise MalformedInputError("not an undirected DOT graph")
    nodes, edges = [], []
    for ln in lines[1:-1]:
        m = _EDGE.match(ln)
        if m:
            edges.append((m.group(1), m.group(2)))
            continue
        m = _NODE.match(ln)
        if m:
            nodes.append(m.group(1))
            continue
        raise MalformedInputError(f"unrecognised DOT line {ln!r}")
    return nodes, edges


def dot_base(g: Graph) -> str:
    nodes = [str(v) for v in range(1, g.n + 1)]
    return to_dot(nodes, [(str(u), str(v)) for u, v in g.sorted_edges()], "G")


def dot_lifted(spec: AncillarySpec) -> str:
    h = build_ancillary_explicit(spec)
    names = [str(spec.vertex(i)) for i in range(spec.num_vertices)]
    edges = [(names[u - 1], names[v - 1]) for u, v in h.sorted_edges()]
    return to_dot(names, edges, "H")


def dot_double(spec: AncillarySpec) -> str:
    h = build_ancillary_explicit(spec)
    hp, sp, tp = bipartite_double(h, 1, 2)
    base = [str(spec.vertex(i)) for i in range(spec.num_vertices)]
    names = [f"{base[(lab - 1) // 2]}|{(lab - 1) % 2}" for lab in range(1, hp.n + 1)]
    edges = [(names[u - 1], names[v - 1]) for u, v in hp.sorted_edges()]
    labels = {names[sp - 1]: "s'", names[tp - 1]: "t'"}
    return to_dot(names, edges, "Hprime", labels)


def hvertex_from_name(name: str) -> HVertex:
    if name in ("S", "T"):
        return HVertex(0, 0 if name == "S" else 1)
    v, b = name.split("_")
    return HVertex(int(v), int(b))
