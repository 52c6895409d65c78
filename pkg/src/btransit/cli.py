"""
Command-line front end.  Every invocation prints one JSON document.

Exit codes: 0 success, 1 validation or assertion failure, 2 blocked /
not found / budget exceeded, 64 usage error.
"""
from __future__ import annotations

import argparse
import random
import sys

from . import connect as cn
from . import fileio
from . import moves as mv
from .decor import (Branching, DecorationError, PreBranching, enumerate_branchings,
                    enumerate_prebranchings, induced_prebranching)
from .kernel import TriangulationError, boundary_surface, is_orientable, signature

EXIT_OK, EXIT_FAIL, EXIT_OUTCOME, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _Outcome(Exception):
    """A Blocked / NotFound / BudgetExceeded result with a report."""

    def __init__(self, doc):
        super().__init__(doc.get("error", ""))
        self.doc = doc


def _decoration(args, tri, required=False):
    b = getattr(args, "branching", None)
    w = getattr(args, "prebranching", None)
    if b and w:
        raise UsageError("give --branching or --prebranching, not both")
    if b:
        d = fileio.load_decoration(tri, b)
        if not isinstance(d, Branching):
            raise UsageError(f"{b} is not a branching file")
        return d
    if w:
        d = fileio.load_decoration(tri, w)
        if not isinstance(d, PreBranching):
            raise UsageError(f"{w} is not a pre-branching file")
        return d
    if required:
        raise UsageError("a decoration (--branching or --prebranching) is required")
    return None


# --------------------------------------------------------------------------
# subcommands

def cmd_validate(args):
    tri = fileio.load_triangulation(args.tri)
    return {"valid": True, "name": tri.name, "tetrahedra": tri.n_tets, "edges": tri.n_edges,
            "faces": tri.n_faces, "vertices": tri.n_vertices, "orientable": is_orientable(tri),
            "euler_characteristic": tri.euler_characteristic(), "signature": signature(tri)}


def cmd_skeleta(args):
    tri = fileio.load_triangulation(args.tri)
    sk = tri.skeleta
    return {"edges": [{"index": e.index, "valence": e.valence, "rep": list(e.rep),
                       "consistent": e.consistent} for e in sk.edges],
            "faces": [{"index": f.index, "sides": [list(s) for s in f.sides]} for f in sk.faces],
            "vertices": [{"index": v.index, "corners": len(v.embeddings)} for v in sk.vertices]}


def cmd_enumerate(args):
    tri = fileio.load_triangulation(args.tri)
    if args.kind == "branchings":
        found = enumerate_branchings(tri)
    else:
        found = enumerate_prebranchings(tri)
    return {"kind": args.kind, "count": len(found), "items": [d.to_json() for d in found]}


def cmd_invariants(args):
    from .invariants.spine import spine_complex

    tri = fileio.load_triangulation(args.tri)
    deco = _decoration(args, tri)
    cx = spine_complex(tri)
    hz, h2 = cx.homology_z, cx.homology_z2
    out = {"h1": hz.H1.as_json(), "h2": hz.H2.as_json(), "h2_mod2": h2.H2.as_json(),
           "euler_characteristic": tri.euler_characteristic()}
    if isinstance(deco, Branching):
        from .invariants.boundary import bicoloring
        from .invariants.cochains import euler_cochain
        from .invariants.cone import measure_cone
        bc = bicoloring(tri, deco)
        out["bicoloring"] = {"chi_w": bc.chi_white, "chi_b": bc.chi_black,
                             "x_components": bc.x_components}
        ec = euler_cochain(tri, deco)
        out["euler_sum"] = ec.total
        out["euler_cochain"] = list(ec.values)
        cone = measure_cone(tri, deco)
        out["cone"] = {"dim": cone.dim, "positive": cone.positive}
        deco = induced_prebranching(tri, deco)
    if isinstance(deco, PreBranching):
        from .invariants.omega import omega_class
        om = omega_class(tri, deco)
        out["omega_class"] = om.as_json()
        out["even_witness"] = None if om.witness is None else {
            "alpha": list(om.alpha), "alpha_chain": list(om.alpha_chain), "x": list(om.witness)}
    return out


def cmd_transits(args):
    tri = fileio.load_triangulation(args.tri)
    deco = _decoration(args, tri)
    sites = mv.enumerate_sites(tri, args.kind)
    if args.sample is not None and args.sample < len(sites):
        sites = random.Random(args.seed).sample(sites, args.sample)
    rows = []
    for m in sites:
        row = {"move": m.to_json()}
        if deco is not None:
            if m.positive:
                trs = mv.enhance_positive(tri, m, deco)
                row["enhancements"] = len(trs)
                row["forced"] = len(trs) == 1
                tr = trs[0] if trs else None
            else:
                tr = mv.enhance_negative(tri, m, deco)
                row["blocked"] = not tr
                if not tr:
                    row["reason"] = tr.reason
                    tr = None
            if args.classify and tr is not None and isinstance(deco, Branching) and m.ideal:
                row["class"] = cn.transit_class(tr)
        else:
            try:
                row["tetrahedra_after"] = mv.apply(tri, m).n_tets
            except mv.InvalidSite as exc:
                row["invalid"] = str(exc)
        rows.append(row)
    return {"kind": args.kind, "count": len(rows), "sites": rows}


def cmd_apply(args):
    tri = fileio.load_triangulation(args.tri)
    deco = _decoration(args, tri)
    steps = fileio.load_steps(args.moves)
    seq = cn.MoveSequence(tri, deco, steps, signature(tri, deco))
    try:
        t, d = seq.replay()
    except cn.ReplayError as exc:
        msg = str(exc)
        if "blocked" in msg:
            raise _Outcome({"error": "Blocked", "detail": msg}) from None
        raise
    out = {"triangulation": fileio.tri_to_json(t), "signature": signature(t, d), "steps": len(steps)}
    if d is not None:
        out["decoration"] = d.to_json()
    return out


def cmd_connect(args):
    tri = fileio.load_triangulation(args.tri)
    b1 = fileio.load_decoration(tri, args.src)
    b2 = fileio.load_decoration(tri, args.dst)
    if not (isinstance(b1, Branching) and isinstance(b2, Branching)):
        raise UsageError("connect needs two branching files")
    try:
        seq = (cn.connect_ideal if args.ideal else cn.connect_completed)(tri, b1, b2)
    except cn.MarkingFailure as exc:
        raise _Outcome({"error": "MarkingFailure", "detail": str(exc)}) from None
    if not seq.verify():
        raise AssertionError("certificate does not replay")
    doc = seq.to_json()
    doc["ideal"] = seq.ideal
    doc["length"] = len(seq)
    return doc


def cmd_explore(args):
    tri = fileio.load_triangulation(args.tri)
    rel = "full-b" if args.relation == "full" else args.relation
    decos = [fileio.load_decoration(tri, p) for p in args.branching or []]
    decos += [fileio.load_decoration(tri, p) for p in args.prebranching or []]
    if rel == "naked":
        decos = [None]
    elif not decos:
        decos = enumerate_prebranchings(tri) if rel == "pb" else enumerate_branchings(tri)
        if not decos:
            raise _Outcome({"error": "NotFound", "detail": "the triangulation carries no decoration"})
    try:
        res = cn.explore(tri, decos, rel, depth=args.depth, budget=args.budget,
                         max_tets=args.max_tets, workers=args.workers)
    except cn.BudgetExceeded as exc:
        raise _Outcome(dict(exc.partial.to_json(), error="BudgetExceeded")) from None
    return res.to_json()


def cmd_boundary(args):
    tri = fileio.load_triangulation(args.tri)
    deco = _decoration(args, tri)
    surf = boundary_surface(tri)
    out = {"components": [{"vertex_class": c.vertex_class, "euler": c.euler, "genus": c.genus,
                           "orientable": c.orientable, "triangles": len(c.triangles)}
                          for c in surf.components],
           "euler": surf.euler}
    if isinstance(deco, Branching):
        from .invariants.boundary import bicoloring
        out["bicoloring"] = bicoloring(tri, deco).as_json()
    elif isinstance(deco, PreBranching):
        from .invariants.boundary import boundary_branching
        out["boundary_branching"] = boundary_branching(tri, deco).as_json()
    return out


def cmd_census_import(args):
    tri = fileio.import_census(args.path, args.format)
    return fileio.tri_to_json(tri)


def cmd_census_types(args):
    return mv.census_types().as_json()


# --------------------------------------------------------------------------

def build_parser():
    p = _Parser(prog="btransit", description="Branched triangulations and their transits.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def deco_flags(sp):
        sp.add_argument("--branching", metavar="FILE")
        sp.add_argument("--prebranching", metavar="FILE")

    def out_flag(sp):
        sp.add_argument("--out", metavar="FILE")

    sp = sub.add_parser("validate", help="check a triangulation file")
    sp.add_argument("tri")
    out_flag(sp)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("skeleta", help="edge, face and vertex classes")
    sp.add_argument("tri")
    out_flag(sp)
    sp.set_defaults(func=cmd_skeleta)

    sp = sub.add_parser("enumerate", help="list branchings or pre-branchings")
    sp.add_argument("tri")
    sp.add_argument("--kind", choices=("branchings", "prebranchings"), default="branchings")
    out_flag(sp)
    sp.set_defaults(func=cmd_enumerate)

    sp = sub.add_parser("invariants", help="homology and decoration invariants")
    sp.add_argument("tri")
    deco_flags(sp)
    out_flag(sp)
    sp.set_defaults(func=cmd_invariants)

    sp = sub.add_parser("transits", help="move sites and their enhancements")
    sp.add_argument("tri")
    sp.add_argument("--kind", choices=mv.KINDS, required=True)
    sp.add_argument("--classify", action="store_true")
    sp.add_argument("--sample", type=int)
    sp.add_argument("--seed", type=int, default=0)
    deco_flags(sp)
    out_flag(sp)
    sp.set_defaults(func=cmd_transits)

    sp = sub.add_parser("apply", help="replay a btw-moves/1 file")
    sp.add_argument("tri")
    sp.add_argument("--moves", required=True, metavar="FILE")
    deco_flags(sp)
    out_flag(sp)
    sp.set_defaults(func=cmd_apply)

    sp = sub.add_parser("connect", help="certificate joining two branchings")
    sp.add_argument("tri")
    sp.add_argument("--from", dest="src", required=True, metavar="FILE")
    sp.add_argument("--to", dest="dst", required=True, metavar="FILE")
    sp.add_argument("--ideal", action="store_true")
    out_flag(sp)
    sp.set_defaults(func=cmd_connect)

    sp = sub.add_parser("explore", help="bounded search of a transit graph")
    sp.add_argument("tri")
    sp.add_argument("--relation", choices=("full", "full-b", "sliding", "na", "pb", "naked"),
                    default="full")
    sp.add_argument("--branching", action="append", metavar="FILE")
    sp.add_argument("--prebranching", action="append", metavar="FILE")
    sp.add_argument("--depth", type=int, default=8)
    sp.add_argument("--budget", type=int, default=100000)
    sp.add_argument("--max-tets", type=int)
    sp.add_argument("--workers", type=int)
    sp.add_argument("--seed", type=int, default=0)
    out_flag(sp)
    sp.set_defaults(func=cmd_explore)

    sp = sub.add_parser("boundary", help="boundary surface, bicoloring, boundary branching")
    sp.add_argument("tri")
    deco_flags(sp)
    out_flag(sp)
    sp.set_defaults(func=cmd_boundary)

    sp = sub.add_parser("census-import", help="normalise a census file to btw-tri/1")
    sp.add_argument("path")
    sp.add_argument("--format", choices=("btw-tri", "plain-gluing-table"))
    out_flag(sp)
    sp.set_defaults(func=cmd_census_import)

    sp = sub.add_parser("census-types", help="the 2-3 transit type table")
    out_flag(sp)
    sp.set_defaults(func=cmd_census_types)
    return p


def _emit(doc, out, stdout):
    text = fileio.dumps(doc)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    stdout.write(text)


def run(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    out = None
    try:
        args = build_parser().parse_args(argv)
        out = getattr(args, "out", None)
        doc = args.func(args)
        code = EXIT_OK
    except UsageError as exc:
        doc, code = {"error": "Usage", "detail": str(exc)}, EXIT_USAGE
    except _Outcome as exc:
        doc, code = exc.doc, EXIT_OUTCOME
    except fileio.ParseError as exc:
        doc = {"error": "ParseError", "detail": str(exc), "line": exc.line, "column": exc.col}
        code = EXIT_FAIL
    except TriangulationError as exc:
        doc, code = {"valid": False, "error": type(exc).__name__, "detail": str(exc)}, EXIT_FAIL
    except (DecorationError, AssertionError, cn.ReplayError, mv.InvalidSite) as exc:
        doc, code = {"error": type(exc).__name__, "detail": str(exc)}, EXIT_FAIL
    except OSError as exc:
        doc, code = {"error": "OSError", "detail": str(exc)}, EXIT_FAIL
    _emit(doc, out if code == EXIT_OK else None, stdout)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
