"""Graph and link description files (JSON) and table emitters.

Graph file::

    {
      "vertices": 2,
      "edges": [{"u": 0, "v": 1, "length": 1.0,
                 "potential": [{"width": 0.1, "q": 2.0}], "cut": 0.5}],
      "rays": [{"vertex": 0, "potential": []}],
      "conditions": "kirchhoff"
    }

``potential`` and ``cut`` are optional (zero potential, midpoint cut).
``conditions`` is either ``"kirchhoff"`` or a list with one ``{"A": ..., "B": ...}``
per vertex, each a square matrix whose entries are numbers or ``[re, im]``
pairs, rows and columns following the end order of :mod:`qgscat.graph`.

Links file::

    {"links": [{"first": [0, 1], "second": [1, 0], "length": 1.0}]}

where ``first``/``second`` are ``[graph index, ray index]``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import numpy as np

from .graph import Edge, Link, LinkSpec, MetricGraph, PiecewisePotential, Ray, VertexConditions, kirchhoff_conditions


class ParseError(ValueError):
    """Malformed input file; the message names the offending field."""


def _expect_keys(obj, where, required, optional=()):
    if not isinstance(obj, dict):
        raise ParseError(f"{where}: expected an object")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ParseError(f"{where}: unknown field(s) {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ParseError(f"{where}: missing field(s) {missing}")


def _number(x, where) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ParseError(f"{where}: expected a number, got {x!r}")
    return float(x)


def _integer(x, where) -> int:
    if isinstance(x, bool) or not isinstance(x, int):
        raise ParseError(f"{where}: expected an integer, got {x!r}")
    return x


def _list(x, where) -> list:
    if not isinstance(x, list):
        raise ParseError(f"{where}: expected a list")
    return x


def _complex(x, where) -> complex:
    if isinstance(x, list):
        if len(x) != 2:
            raise ParseError(f"{where}: complex entries are [re, im]")
        return complex(_number(x[0], where), _number(x[1], where))
    return complex(_number(x, where))


def _matrix(x, where) -> np.ndarray:
    rows = _list(x, where)
    out = [[_complex(e, f"{where}[{i}][{j}]") for j, e in enumerate(_list(r, f"{where}[{i}]"))]
           for i, r in enumerate(rows)]
    if any(len(r) != len(rows) for r in out):
        raise ParseError(f"{where}: matrix must be square")
    return np.array(out, dtype=complex).reshape(len(rows), len(rows))


def _potential(x, where) -> PiecewisePotential:
    segs = []
    for s, seg in enumerate(_list(x, where)):
        w = f"{where}[{s}]"
        _expect_keys(seg, w, ("width", "q"))
        segs.append((_number(seg["width"], f"{w}.width"), _number(seg["q"], f"{w}.q")))
    return PiecewisePotential(tuple(segs))


def parse_graph(doc) -> tuple[MetricGraph, VertexConditions, dict[int, float]]:
    """Graph, conditions and per-edge cut overrides from a decoded JSON document."""
    _expect_keys(doc, "graph", ("vertices", "rays", "conditions"), ("edges",))
    nv = _integer(doc["vertices"], "vertices")
    edges, cuts = [], {}
    for j, e in enumerate(_list(doc.get("edges", []), "edges")):
        w = f"edges[{j}]"
        _expect_keys(e, w, ("u", "v", "length"), ("potential", "cut"))
        pot = _potential(e.get("potential", []), f"{w}.potential")
        edges.append(Edge(_integer(e["u"], f"{w}.u"), _integer(e["v"], f"{w}.v"),
                          _number(e["length"], f"{w}.length"), pot))
        if "cut" in e:
            cuts[j] = _number(e["cut"], f"{w}.cut")
    rays = []
    for i, r in enumerate(_list(doc["rays"], "rays")):
        w = f"rays[{i}]"
        _expect_keys(r, w, ("vertex",), ("potential",))
        rays.append(Ray(_integer(r["vertex"], f"{w}.vertex"), _potential(r.get("potential", []), f"{w}.potential")))
    graph = MetricGraph(nv, tuple(edges), tuple(rays))

    cond = doc["conditions"]
    if cond == "kirchhoff":
        conditions = kirchhoff_conditions(graph)
    elif isinstance(cond, list):
        As, Bs = [], []
        for v, c in enumerate(cond):
            w = f"conditions[{v}]"
            _expect_keys(c, w, ("A", "B"))
            As.append(_matrix(c["A"], f"{w}.A"))
            Bs.append(_matrix(c["B"], f"{w}.B"))
        conditions = VertexConditions(tuple(As), tuple(Bs))
    else:
        raise ParseError('conditions: expected "kirchhoff" or a list of {"A", "B"} objects')
    return graph, conditions, cuts


def parse_links(doc) -> LinkSpec:
    _expect_keys(doc, "links file", ("links",))
    links = []
    for i, ln in enumerate(_list(doc["links"], "links")):
        w = f"links[{i}]"
        _expect_keys(ln, w, ("first", "second", "length"))
        ends = []
        for key in ("first", "second"):
            pair = _list(ln[key], f"{w}.{key}")
            if len(pair) != 2:
                raise ParseError(f"{w}.{key}: expected [graph index, ray index]")
            ends.append((_integer(pair[0], f"{w}.{key}[0]"), _integer(pair[1], f"{w}.{key}[1]")))
        length = _number(ln["length"], f"{w}.length")
        if not length > 0:
            raise ParseError(f"{w}.length: must be positive")
        links.append(Link(ends[0], ends[1], length))
    try:
        return LinkSpec(tuple(links))
    except ValueError as exc:
        raise ParseError(f"links: {exc}") from None


def _load_json(path):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def load_graph(path):
    try:
        return parse_graph(_load_json(path))
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def load_links(path) -> LinkSpec:
    try:
        return parse_links(_load_json(path))
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


def graph_to_doc(graph: MetricGraph, conditions: VertexConditions | str = "kirchhoff") -> dict:
    """Inverse of :func:`parse_graph` (cut overrides are not recorded)."""
    def pot(p):
        return [{"width": w, "q": q} for w, q in p.segments]

    def mat(M):
        return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]

    doc = {
        "vertices": graph.vertex_count,
        "edges": [{"u": e.u, "v": e.v, "length": e.length, "potential": pot(e.potential)} for e in graph.edges],
        "rays": [{"vertex": r.vertex, "potential": pot(r.potential)} for r in graph.rays],
    }
    if isinstance(conditions, str):
        doc["conditions"] = conditions
    else:
        doc["conditions"] = [{"A": mat(A), "B": mat(B)} for A, B in zip(conditions.A, conditions.B)]
    return doc


# -- tables -----------------------------------------------------------------------

def fmt(x) -> str:
    """17 significant digits; round-trips every double."""
    if x is None:
        return "nan"
    return format(float(x), ".17g")


def _cell(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return fmt(v)


def _json_number(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) else x


def write_table(columns: list[str], rows: list[dict], meta: dict, fmt_name: str, matrix_key: str | None = "S") -> str:
    """Render rows as CSV or JSON.

    Each row maps the scalar ``columns`` to values; ``row[matrix_key]`` (if
    present) is a complex matrix emitted as ``S_i_j_re``/``S_i_j_im`` columns in
    CSV and as nested ``[re, im]`` pairs in JSON.
    """
    if fmt_name == "json":
        out_rows = []
        for row in rows:
            r = {}
            for c in columns:
                v = row.get(c)
                if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
                    r[c] = int(v)
                else:
                    r[c] = v if isinstance(v, str) else _json_number(v)
            if matrix_key and matrix_key in row:
                M = row[matrix_key]
                r[matrix_key] = None if M is None else [[[_json_number(z.real), _json_number(z.imag)] for z in line]
                                                        for line in M]
            out_rows.append(r)
        body = ",\n".join(json.dumps(r, sort_keys=True, allow_nan=False) for r in out_rows)
        head = json.dumps(meta, sort_keys=True, allow_nan=False)
        if not out_rows:
            return f'{{"meta": {head},\n "rows": []}}\n'
        return f'{{"meta": {head},\n "rows": [\n{body}\n]}}\n'

    size = 0
    if matrix_key:
        size = max((len(r[matrix_key]) for r in rows if r.get(matrix_key) is not None), default=meta.get("n", 0))
    mcols = [f"{matrix_key}_{i}_{j}_{part}" for i in range(size) for j in range(size) for part in ("re", "im")]
    buf = io.StringIO()
    buf.write("# " + json.dumps(meta, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns + mcols)
    for row in rows:
        line = [_cell(row.get(c)) for c in columns]
        M = row.get(matrix_key) if matrix_key else None
        if mcols:
            if M is None:
                line += ["nan"] * len(mcols)
            else:
                line += [fmt(part) for z in np.asarray(M).ravel() for part in (z.real, z.imag)]
        w.writerow(line)
    return buf.getvalue()


def read_table(text: str, fmt_name: str) -> tuple[dict, list[dict]]:
    """Parse output of :func:`write_table` back into ``(meta, rows)`` with complex matrices."""
    if fmt_name == "json":
        doc = json.loads(text)
        rows = []
        for r in doc["rows"]:
            r = dict(r)
            for key, v in list(r.items()):
                if isinstance(v, list):
                    r[key] = np.array([[complex(nan(a), nan(b)) for a, b in line] for line in v])
                elif v is None:
                    r[key] = math.nan
            rows.append(r)
        return doc["meta"], rows
    lines = text.splitlines()
    meta = json.loads(lines[0][2:])
    reader = csv.DictReader(lines[1:])
    rows = []
    for rec in reader:
        row, mats = {}, {}
        for key, val in rec.items():
            parts = key.split("_")
            if len(parts) == 4 and parts[3] in ("re", "im"):
                mats.setdefault(parts[0], {})[(int(parts[1]), int(parts[2]), parts[3])] = float(val)
                continue
            try:
                row[key] = int(val)
            except ValueError:
                try:
                    row[key] = float(val)
                except ValueError:
                    row[key] = val
        for name, entries in mats.items():
            size = int(round(math.sqrt(len(entries) // 2)))
            M = np.empty((size, size), dtype=complex)
            for i in range(size):
                for j in range(size):
                    M[i, j] = complex(entries[(i, j, "re")], entries[(i, j, "im")])
            row[name] = M
        rows.append(row)
    return meta, rows


def nan(x):
    return math.nan if x is None else x
