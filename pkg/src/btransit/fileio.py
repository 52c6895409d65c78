"""
Reading and writing triangulations, decorations and move sequences.

Triangulations are stored as ``btw-tri/1`` JSON; census tables can also
be read as plain text, one line per tetrahedron made of four
``tet p0p1p2p3`` tokens (blank lines and ``#`` comments are ignored).
"""
from __future__ import annotations

import json
import os

from . import census
from .decor import validate_branching, validate_prebranching
from .kernel import Triangulation, TriangulationError, validate


class ParseError(ValueError):
    def __init__(self, msg, line=None, col=None):
        where = f"line {line}, column {col}: " if line is not None else ""
        super().__init__(where + msg)
        self.line, self.col = line, col


def dumps(doc) -> str:
    """The one JSON style used for every output."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


# --------------------------------------------------------------------------
# triangulations

def tri_to_json(tri: Triangulation):
    return {"format": "btw-tri/1", "name": tri.name, "tetrahedra": tri.n_tets,
            "gluings": [[{"tet": j, "perm": list(p)} for (j, p) in row] for row in tri.gluings]}


def tri_from_json(doc) -> Triangulation:
    if not isinstance(doc, dict) or doc.get("format") != "btw-tri/1":
        raise ParseError("not a btw-tri/1 document")
    try:
        table = [[(int(g["tet"]), tuple(int(x) for x in g["perm"])) for g in row]
                 for row in doc["gluings"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed gluing table: {exc}") from None
    if "tetrahedra" in doc and doc["tetrahedra"] != len(table):
        raise ParseError(f"tetrahedra = {doc['tetrahedra']} but {len(table)} rows")
    return validate(table, doc.get("name", ""))


def parse_plain(text, name="") -> list:
    """Raw gluing table from the plain census format (not yet validated)."""
    table = []
    for ln, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0]
        if not body.strip():
            continue
        tokens = []
        pos = 0
        for tok in body.split():
            col = body.index(tok, pos) + 1
            pos = col - 1 + len(tok)
            tokens.append((tok, col))
        if len(tokens) != 8:
            raise ParseError(f"expected 8 tokens (4 x 'tet perm'), found {len(tokens)}",
                             ln, tokens[0][1] if tokens else 1)
        row = []
        for k in range(4):
            (t, ct), (p, cp) = tokens[2 * k], tokens[2 * k + 1]
            if not t.isdigit():
                raise ParseError(f"bad tetrahedron index {t!r}", ln, ct)
            if len(p) != 4 or sorted(p) != ["0", "1", "2", "3"]:
                raise ParseError(f"bad permutation token {p!r}", ln, cp)
            row.append((int(t), tuple(int(c) for c in p)))
        table.append(row)
    if not table:
        raise ParseError("empty table", 1, 1)
    return table


def tri_to_plain(tri: Triangulation) -> str:
    lines = []
    for row in tri.gluings:
        lines.append(" ".join(f"{j} {''.join(map(str, p))}" for (j, p) in row))
    return "\n".join(lines) + "\n"


def import_census(path, fmt=None) -> Triangulation:
    """Read a triangulation in either format (guessed from the content
    when ``fmt`` is None) and validate it."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    name = os.path.splitext(os.path.basename(path))[0]
    if fmt is None:
        fmt = "btw-tri" if text.lstrip().startswith("{") else "plain-gluing-table"
    if fmt == "btw-tri":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None
        return tri_from_json(doc)
    if fmt == "plain-gluing-table":
        return validate(parse_plain(text), name)
    raise ValueError(f"unknown census format {fmt!r}")


def load_triangulation(source) -> Triangulation:
    """A file in either format, or a built-in census name such as ``m004``."""
    if not os.path.exists(source) and source in census.TABLES:
        return census.get(source)
    return import_census(source)


def save_triangulation(tri, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(tri_to_json(tri)))


# --------------------------------------------------------------------------
# decorations and moves

def _read_json(path):
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def decoration_from_json(tri, doc):
    fmt = doc.get("format") if isinstance(doc, dict) else None
    if fmt == "btw-branching/1":
        return validate_branching(tri, doc["edges"])
    if fmt == "btw-pb/1":
        return validate_prebranching(tri, doc["faces"])
    raise ParseError(f"unknown decoration format {fmt!r}")


def load_decoration(tri, path):
    return decoration_from_json(tri, _read_json(path))


def load_steps(path):
    from .connect import Step

    doc = _read_json(path)
    if not isinstance(doc, dict) or doc.get("format") != "btw-moves/1":
        raise ParseError("not a btw-moves/1 document")
    return [Step.from_json(s) for s in doc["steps"]]


__all__ = ["ParseError", "TriangulationError", "dumps", "tri_to_json", "tri_from_json",
           "parse_plain", "tri_to_plain", "import_census", "load_triangulation",
           "save_triangulation", "decoration_from_json", "load_decoration", "load_steps"]
