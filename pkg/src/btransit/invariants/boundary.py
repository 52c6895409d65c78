"""
Boundary shadows of a decoration: the white/black bicoloring of the
boundary surface induced by a branching, and the branched boundary
triangulation induced by a pre-branching.

A link triangle ``(i, v)`` has one corner toward each other vertex ``w`` of
tetrahedron ``i`` and one side in each face ``f != v`` of it.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from ..decor import Branching, PreBranching
from ..kernel import orient, perm_sign

WHITE, BLACK, SPLIT_T1, SPLIT_T2 = "White", "Black", "SplitT1", "SplitT2"
_COLOR = (WHITE, SPLIT_T1, SPLIT_T2, BLACK)


class _UF:
    def __init__(self):
        self.parent = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        a, b = self.find(a), self.find(b)
        if a != b:
            self.parent[max(a, b)] = min(a, b)


def _others(*xs):
    return [y for y in range(4) if y not in xs]


def _cells(tri):
    """Corner classes and side classes of the boundary surface."""
    corners = _UF()
    sides = {}
    for i in range(tri.n_tets):
        for f in range(4):
            j, p = tri.gluings[i][f]
            for v in range(4):
                if v == f:
                    continue
                sides.setdefault((i, v, f), min((i, v, f), (j, p[v], p[f])))
                for w in range(4):
                    if w not in (v, f):
                        corners.union((i, v, w), (j, p[v], p[w]))
    return corners, sides


@dataclass(frozen=True)
class Bicoloring:
    colors: dict            # (tet, vertex) -> colour
    split_points: tuple     # side classes carrying a split point
    arcs: tuple             # ((tet, vertex), side class, side class) per split triangle
    x_components: int
    chi_white: int
    chi_black: int
    fingerprint: tuple

    def as_json(self):
        return {"chi_w": self.chi_white, "chi_b": self.chi_black,
                "x_components": self.x_components,
                "colors": {f"{i},{v}": c for (i, v), c in sorted(self.colors.items())}}


def _side_kind(rk, v, f):
    """'w', 'b' or 's' for the side of link triangle v in face f."""
    u, w = _others(v, f)
    below = (rk[u] < rk[v]) + (rk[w] < rk[v])
    return "wsb"[below]


def bicoloring(tri, b: Branching) -> Bicoloring:
    corners, sides = _cells(tri)
    ranks = [b.ranks(i) for i in range(tri.n_tets)]
    colors = {}
    cells = {"w": {}, "b": {}}   # cell -> boundary cells

    def add(colour, cell, bd=()):
        cells[colour].setdefault(cell, set()).update(bd)

    split_points = set()
    arcs = []
    for i in range(tri.n_tets):
        rk = ranks[i]
        for v in range(4):
            colors[(i, v)] = _COLOR[rk[v]]
            tri_bd = {"w": set(), "b": set()}
            split = []
            for w in range(4):
                if w == v:
                    continue
                c = ("c", corners.find((i, v, w)))
                col = "w" if rk[v] < rk[w] else "b"
                add(col, c)
                tri_bd[col].add(c)
            for f in range(4):
                if f == v:
                    continue
                s = sides[(i, v, f)]
                u, w = _others(v, f)
                cu, cw = ("c", corners.find((i, v, u))), ("c", corners.find((i, v, w)))
                kind = _side_kind(rk, v, f)
                if kind == "s":
                    pt = ("p", s)
                    split_points.add(s)
                    split.append(s)
                    lo, hi = (cu, cw) if rk[u] < rk[w] else (cw, cu)
                    add("w", pt)
                    add("b", pt)
                    add("w", ("hw", s), {pt, hi})
                    add("b", ("hb", s), {pt, lo})
                    tri_bd["w"].add(("hw", s))
                    tri_bd["b"].add(("hb", s))
                else:
                    add(kind, ("s", s), {cu, cw})
                    tri_bd[kind].add(("s", s))
            if split:
                arc = ("x", i, v)
                pts = {("p", s) for s in split}
                add("w", arc, pts)
                add("b", arc, pts)
                tri_bd["w"].add(arc)
                tri_bd["b"].add(arc)
                arcs.append(((i, v), split[0], split[1]))
            if rk[v] < 3:
                add("w", ("t", i, v), tri_bd["w"])
            if rk[v] > 0:
                add("b", ("t", i, v), tri_bd["b"])

    x = _UF()
    for _, s1, s2 in arcs:
        x.union(("p", s1), ("p", s2))
    x_roots = {x.find(("p", s)) for s in split_points}

    chi = {}
    regions = {}
    for colour, cx in cells.items():
        uf = _UF()
        for cell, bd in cx.items():
            uf.find(cell)
            for c in bd:
                uf.union(cell, c)
        per = Counter()
        for cell in cx:
            dim = 2 if cell[0] == "t" else (1 if cell[0] in ("s", "hw", "hb", "x") else 0)
            per[uf.find(cell)] += (-1) ** dim
        chi[colour] = sum(per.values())
        regions[colour] = (uf, per)

    # per boundary component: regions with their chi and adjacent X circles
    comp_of = _UF()
    for (i, v) in colors:
        for f in range(4):
            if f != v:
                j, p = tri.gluings[i][f]
                comp_of.union((i, v), (j, p[v]))
    fp = {}
    for colour in ("w", "b"):
        uf, per = regions[colour]
        circles = Counter()
        for (tv, s1, _) in arcs:
            circles[uf.find(("x",) + tv)] += 0
        circle_region = {}
        for (tv, s1, _) in arcs:
            circle_region[x.find(("p", s1))] = uf.find(("x",) + tv)
        for r in circle_region.values():
            circles[r] += 1
        for root, c in per.items():
            # locate the boundary component through any triangle in the region
            tv = next(cell[1:] for cell in uf.parent if uf.find(cell) == root and cell[0] == "t")
            fp.setdefault(comp_of.find(tv), []).append((colour, c, circles[root]))
    fingerprint = tuple(sorted((len(x_roots_in), tuple(sorted(v)))
                               for x_roots_in, v in _group_x(fp, comp_of, arcs, x).items()))
    return Bicoloring(colors, tuple(sorted(split_points)), tuple(arcs), len(x_roots),
                      chi["w"], chi["b"], fingerprint)


def _group_x(fp, comp_of, arcs, x):
    """Re-key the per-component region lists by the set of X circles in
    each component (only their number enters the fingerprint)."""
    circles = {}
    for (tv, s1, _) in arcs:
        circles.setdefault(comp_of.find(tv), set()).add(x.find(("p", s1)))
    return {frozenset(circles.get(k, ())): v for k, v in fp.items()}


def fingerprint(tri, b: Branching):
    return bicoloring(tri, b).fingerprint


# --------------------------------------------------------------------------
# boundary branching

@dataclass(frozen=True)
class BoundaryBranching:
    orders: dict   # (tet, vertex) -> corner directions (w, ...) from rank 0 to 2

    def rank(self, tet, v, w):
        return self.orders[(tet, v)].index(w)

    def as_json(self):
        return {f"{i},{v}": list(o) for (i, v), o in sorted(self.orders.items())}


def _face_positive(eps_i, f, is_in, x, y, z):
    """Whether the cyclic order (x, y, z) on face ``f`` agrees with the
    orientation of the face determined by its co-orientation and the
    ambient orientation."""
    return eps_i * perm_sign((x, y, z, f)) * (1 if is_in else -1) > 0


def boundary_branching(tri, w: PreBranching, eps=None) -> BoundaryBranching:
    """Each side of a link triangle is parallel to an edge of its face and
    is oriented against the orientation of that face; the three sides of
    a link triangle are then never cyclic since the three faces through a
    vertex are never all co-oriented alike."""
    if eps is None:
        eps = orient(tri)
    orders = {}
    for i in range(tri.n_tets):
        for v in range(4):
            outdeg = Counter()
            for f in range(4):
                if f == v:
                    continue
                u, x = _others(v, f)
                # side between corners toward u and x, parallel to edge ux
                fwd = _face_positive(eps[i], f, w.is_in(i, f), v, u, x)
                tail, head = (x, u) if fwd else (u, x)
                outdeg[tail] += 1
                outdeg[head] += 0
            if sorted(outdeg.values()) != [0, 1, 2]:
                raise AssertionError(f"cyclic boundary triangle ({i},{v})")
            orders[(i, v)] = tuple(sorted(outdeg, key=lambda y: -outdeg[y]))
    return BoundaryBranching(orders)
