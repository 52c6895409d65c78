"""
Naked moves, decorated transits and the classification of branched 2->3
transits.

Every move is a local rewrite: some tetrahedra are removed, some are
added, and the faces on the boundary of the region are reglued.  The
rewrite is described by giving names to the vertices of the region; new
faces are matched to old ones through their vertex names.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

from .decor import Branching, DecorationError, PreBranching
from .kernel import (PERMS4, Triangulation, TriangulationError, components, edge_class, perm_compose,
                     perm_inverse, perm_sign, seeded_isomorphism, signature,
                     validate)

POSITIVE = ("M23", "M02Q", "M02T", "M14")
NEGATIVE = ("M32", "M20Q", "M20T", "M41")
KINDS = POSITIVE + NEGATIVE
INVERSE_KIND = {"M23": "M32", "M32": "M23", "M02Q": "M20Q", "M20Q": "M02Q",
                "M02T": "M20T", "M20T": "M02T", "M14": "M41", "M41": "M14"}
IDEAL_KINDS = ("M23", "M32", "M02Q", "M20Q")
TET_DELTA = {"M23": 1, "M32": -1, "M02Q": 2, "M20Q": -2,
             "M02T": 2, "M20T": -2, "M14": 3, "M41": -3}
SITE_KEYS = {"M23": ("face",), "M32": ("edge",), "M02Q": ("edge", "p", "q"),
             "M20Q": ("tet", "f1", "f2"), "M02T": ("face",), "M20T": ("tet", "face"),
             "M14": ("tet",), "M41": ("vertex",)}


class InvalidSite(ValueError):
    pass


@dataclass(frozen=True)
class Move:
    kind: str
    site: tuple

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSite(f"unknown move kind {self.kind!r}")

    @property
    def positive(self):
        return self.kind in POSITIVE

    @property
    def ideal(self):
        return self.kind in IDEAL_KINDS

    def to_json(self):
        return {"kind": self.kind, "site": dict(zip(SITE_KEYS[self.kind], self.site))}

    @classmethod
    def from_json(cls, d):
        kind = d["kind"]
        site = d["site"]
        if isinstance(site, dict):
            site = tuple(int(site[k]) for k in SITE_KEYS[kind])
        return cls(kind, tuple(site))


@dataclass
class Rewrite:
    """Outcome of a naked move, with what decorations need to follow it."""

    move: Move
    before: Triangulation
    tri: Triangulation
    old_to_new: dict          # surviving tetrahedra
    new_tets: list            # indices in ``tri``
    new_names: list           # vertex names of each new tetrahedron
    contexts: list            # (old tet, {local vertex: name})
    face_src: dict            # (new index k, face) -> ("old", side) | ("side", side) | ("new", key)
    inverse: Move | None = None


# --------------------------------------------------------------------------
# the rewrite engine

def _rewrite(tri, removed, new_names, explicit=(), cut=(), contexts_extra=()):
    """``removed``: {tet: names tuple}.  ``new_names``: list of names tuples.
    ``explicit``: ((k, x), (j, g), {vertex of j: name}) attachments of new
    faces onto sides of surviving tetrahedra; those sides are listed in
    ``cut`` together with their old partners."""
    n = tri.n_tets
    survivors = [i for i in range(n) if i not in removed]
    old_to_new = {t: k for k, t in enumerate(survivors)}
    base = len(survivors)
    total = base + len(new_names)
    gl = [[None] * 4 for _ in range(total)]
    cut = set(cut)

    def put(t, f, j, p):
        if gl[t][f] is not None:
            raise InvalidSite(f"face ({t},{f}) glued twice")
        gl[t][f] = (j, tuple(p))

    for i in survivors:
        for f in range(4):
            if (i, f) in cut:
                continue
            j, p = tri.gluings[i][f]
            if j in removed:
                continue
            gl[old_to_new[i]][f] = (old_to_new[j], p)

    face_src = {}
    explicit_faces = set()
    for (k, x), (j, g), nm in explicit:
        by_name = {v: z for z, v in nm.items()}
        perm = [None] * 4
        for y in range(4):
            perm[y] = g if y == x else by_name[new_names[k][y]]
        put(base + k, x, old_to_new[j], perm)
        put(old_to_new[j], g, base + k, perm_inverse(perm))
        face_src[(k, x)] = ("side", (j, g))
        explicit_faces.add((k, x))

    new_by_key = {}
    for k, names in enumerate(new_names):
        for x in range(4):
            if (k, x) in explicit_faces:
                continue
            key = frozenset(names[y] for y in range(4) if y != x)
            new_by_key.setdefault(key, []).append((k, x))
    old_by_key = {}
    for i, names in removed.items():
        for f in range(4):
            key = frozenset(names[y] for y in range(4) if y != f)
            old_by_key.setdefault(key, []).append((i, f))

    def pos(names, name):
        return names.index(name)

    bmap = {}
    for key, faces in new_by_key.items():
        if len(faces) == 2:
            (k, x), (k2, x2) = faces
            perm = [x2 if y == x else pos(new_names[k2], new_names[k][y]) for y in range(4)]
            put(base + k, x, base + k2, perm)
            put(base + k2, x2, base + k, perm_inverse(perm))
            face_src[(k, x)] = ("new", key)
            face_src[(k2, x2)] = ("new", key)
        elif len(faces) == 1:
            olds = old_by_key.get(key, [])
            if len(olds) != 1:
                raise InvalidSite(f"cannot match new face {sorted(key)}")
            (k, x), (i, f) = faces[0], olds[0]
            sigma = [x if y == f else pos(new_names[k], removed[i][y]) for y in range(4)]
            bmap[(i, f)] = (k, x, tuple(sigma))
            face_src[(k, x)] = ("old", (i, f))
        else:
            raise InvalidSite(f"name set {sorted(key)} used {len(faces)} times")

    for (i, f), (k, x, sigma) in bmap.items():
        j, p = tri.gluings[i][f]
        g = p[f]
        sinv = perm_inverse(sigma)
        if j not in removed:
            perm = perm_compose(p, sinv)
            put(base + k, x, old_to_new[j], perm)
            put(old_to_new[j], g, base + k, perm_inverse(perm))
        else:
            if (j, g) not in bmap:
                raise InvalidSite("region boundary glued into the region interior")
            k2, x2, sigma2 = bmap[(j, g)]
            put(base + k, x, base + k2, perm_compose(sigma2, perm_compose(p, sinv)))

    # removed faces not matched by a new face: internal pairs or ports
    ports = {}
    for key, olds in old_by_key.items():
        if key in new_by_key:
            continue
        for (i, f) in olds:
            j, p = tri.gluings[i][f]
            if j in removed:
                if (j, p[f]) not in olds:
                    raise InvalidSite("unmatched internal face")
                continue
            ports.setdefault(key, []).append((i, f))
    for key, sides in ports.items():
        if len(sides) != 2:
            raise InvalidSite(f"dangling port {sorted(key)}")
        (i, f), (i2, f2) = sides
        j, p = tri.gluings[i][f]
        j2, p2 = tri.gluings[i2][f2]
        # j -> i -> (names) -> i2 -> j2
        pinv = perm_inverse(p)
        perm = [None] * 4
        for z in range(4):
            y = pinv[z]
            y2 = f2 if y == f else pos(removed[i2], removed[i][y])
            perm[z] = p2[y2]
        put(old_to_new[j], p[f], old_to_new[j2], perm)
        put(old_to_new[j2], p2[f2], old_to_new[j], perm_inverse(perm))

    for t in range(total):
        for f in range(4):
            if gl[t][f] is None:
                raise InvalidSite(f"face ({t},{f}) left unglued")
    try:
        new_tri = validate(gl)
    except TriangulationError as exc:
        raise InvalidSite(str(exc)) from None
    contexts = [(i, dict(enumerate(names))) for i, names in removed.items()]
    contexts += list(contexts_extra)
    return new_tri, old_to_new, list(range(base, total)), face_src, contexts, list(new_names)


# --------------------------------------------------------------------------
# sites

def _face_class(tri, F):
    faces = tri.skeleta.faces
    if not 0 <= F < len(faces):
        raise InvalidSite(f"no face class {F}")
    return faces[F]


def _edge(tri, e):
    edges = tri.skeleta.edges
    if not 0 <= e < len(edges):
        raise InvalidSite(f"no edge class {e}")
    return edges[e]


def _pillow_faces(tri, U, n_shared):
    """Faces of ``U`` glued to one other tetrahedron ``L`` by a common
    permutation; returns list of (L, sigma, shared faces, free faces)."""
    out = []
    groups = {}
    for f in range(4):
        j, p = tri.gluings[U][f]
        if j != U:
            groups.setdefault((j, p), []).append(f)
    for (L, sigma), faces in sorted(groups.items()):
        if len(faces) != n_shared:
            continue
        free = [g for g in range(4) if g not in faces]
        partners = {tri.gluings[U][g][0] for g in free}
        partners |= {tri.gluings[L][sigma[g]][0] for g in free}
        if partners & {U, L}:
            continue
        out.append((L, sigma, tuple(faces), tuple(free)))
    return out


def _star4(tri, v):
    """Check vertex class ``v`` is a 4-tetrahedron star; return the names
    of its tetrahedra or ``None``."""
    verts = tri.skeleta.vertices
    if not 0 <= v < len(verts):
        return None
    embs = verts[v].embeddings
    tets = sorted(t for t, _ in embs)
    if len(embs) != 4 or len(set(tets)) != 4:
        return None
    apex = dict(embs)
    idx = {t: k for k, t in enumerate(tets)}
    names = {}
    for t in tets:
        nm = [None] * 4
        for x in range(4):
            if x == apex[t]:
                nm[x] = "P"
                continue
            j, p = tri.gluings[t][x]
            if j not in idx or j == t or p[apex[t]] != apex[j]:
                return None
            nm[x] = f"a{idx[j]}"
        if len(set(nm)) != 4:
            return None
        names[t] = tuple(nm)
    # gluings inside the star must respect the names
    for t in tets:
        for x in range(4):
            if x == apex[t]:
                continue
            j, p = tri.gluings[t][x]
            for y in range(4):
                if y != x and names[t][y] != names[j][p[y]]:
                    return None
    return tets, names


def enumerate_sites(tri: Triangulation, kind) -> list:
    sk = tri.skeleta
    out = []
    if kind == "M23":
        out = [Move(kind, (fc.index,)) for fc in sk.faces if fc.sides[0][0] != fc.sides[1][0]]
    elif kind == "M32":
        for e in sk.edges:
            if e.valence == 3 and e.consistent and len({s[0] for s in e.link}) == 3:
                out.append(Move(kind, (e.index,)))
    elif kind == "M02Q":
        for e in sk.edges:
            if not e.consistent:
                continue
            fcs = [sk.face_of[(i, d)] for (i, a, b, c, d) in e.link]
            for p, q in combinations(range(e.valence), 2):
                if fcs[p] != fcs[q]:
                    out.append(Move(kind, (e.index, p, q)))
    elif kind == "M20Q":
        for U in range(tri.n_tets):
            for (L, sigma, faces, free) in _pillow_faces(tri, U, 2):
                if U < L:
                    out.append(Move(kind, (U,) + faces))
    elif kind == "M02T":
        out = [Move(kind, (fc.index,)) for fc in sk.faces]
    elif kind == "M20T":
        for U in range(tri.n_tets):
            for (L, sigma, faces, free) in _pillow_faces(tri, U, 3):
                if U < L:
                    out.append(Move(kind, (U, free[0])))
    elif kind == "M14":
        out = [Move(kind, (i,)) for i in range(tri.n_tets)]
    elif kind == "M41":
        out = [Move(kind, (v.index,)) for v in sk.vertices if _star4(tri, v.index)]
    else:
        raise InvalidSite(f"unknown move kind {kind!r}")
    if kind in NEGATIVE:
        ok = []
        for m in out:
            try:
                rewrite(tri, m)
            except InvalidSite:
                continue
            ok.append(m)
        out = ok
    return out


def all_sites(tri, kinds=KINDS):
    return [m for k in kinds for m in enumerate_sites(tri, k)]


# --------------------------------------------------------------------------
# the eight moves

def _m23(tri, F):
    fc = _face_class(tri, F)
    (i, f), (j, g) = fc.sides
    if i == j:
        raise InvalidSite("2-3 move needs two distinct tetrahedra")
    sigma = tri.gluings[i][f][1]
    xs = [x for x in range(4) if x != f]
    ni = [None] * 4
    nj = [None] * 4
    for k, x in enumerate(xs):
        ni[x] = f"x{k}"
        nj[sigma[x]] = f"x{k}"
    ni[f] = "v1"
    nj[g] = "v2"
    new = [("v1", "v2", f"x{a}", f"x{b}") for a, b in ((1, 2), (0, 2), (0, 1))]
    res = _rewrite(tri, {i: tuple(ni), j: tuple(nj)}, new)
    t2 = res[0]
    inv = Move("M32", (t2.skeleta.edge_of[(res[2][0], 0, 1)][0],))
    return res, inv


def _m32(tri, e):
    ec = _edge(tri, e)
    if ec.valence != 3 or not ec.consistent or len({s[0] for s in ec.link}) != 3:
        raise InvalidSite("3-2 move needs a valence-3 edge in three distinct tetrahedra")
    removed = {}
    for k, (t, a, b, c, d) in enumerate(ec.link):
        nm = [None] * 4
        nm[a], nm[b] = "A", "B"
        nm[c], nm[d] = f"l{k}", f"l{(k - 1) % 3}"
        removed[t] = tuple(nm)
    new = [("A", "l0", "l1", "l2"), ("B", "l0", "l1", "l2")]
    res = _rewrite(tri, removed, new)
    inv = Move("M23", (res[0].skeleta.face_of[(res[2][0], 0)],))
    return res, inv


def _m02q(tri, e, p, q):
    ec = _edge(tri, e)
    val = ec.valence
    if not (0 <= p < q < val) or not ec.consistent:
        raise InvalidSite("bad quadrilateral site")
    sk = tri.skeleta
    link = ec.link
    fp = sk.face_of[(link[p][0], link[p][4])]
    fq = sk.face_of[(link[q][0], link[q][4])]
    if fp == fq:
        raise InvalidSite("quadrilateral 0-2 move needs two distinct face classes")
    tp, tp1, tq, tq1 = link[p], link[(p + 1) % val], link[q], link[(q + 1) % val]

    def nm(state, third, name):
        i, a, b, c, d = state
        return {a: "E0", b: "E1", third: name}

    # U and L are both (E0, E1, V1, V2); faces 2,3 attach, faces 0,1 glue U to L
    explicit = [
        ((0, 3), (tp1[0], tp1[3]), nm(tp1, tp1[4], "V1")),
        ((0, 2), (tq[0], tq[4]), nm(tq, tq[3], "V2")),
        ((1, 3), (tp[0], tp[4]), nm(tp, tp[3], "V1")),
        ((1, 2), (tq1[0], tq1[3]), nm(tq1, tq1[4], "V2")),
    ]
    cut = [(s[0], s[1]) for _, s, _ in explicit]
    ctx = [(s[0], m) for _, s, m in explicit]
    new = [("E0", "E1", "V1", "V2"), ("E0", "E1", "V1", "V2")]
    res = _rewrite(tri, {}, new, explicit=explicit, cut=cut, contexts_extra=ctx)
    U = res[2][0]
    return res, Move("M20Q", (U, 0, 1))


def _m20q(tri, U, f1, f2):
    if not 0 <= U < tri.n_tets:
        raise InvalidSite("no such tetrahedron")
    for (L, sigma, faces, free) in _pillow_faces(tri, U, 2):
        if faces == (f1, f2):
            break
    else:
        raise InvalidSite("not a quadrilateral pillow")
    nu = tuple(f"u{x}" for x in range(4))
    nl = [None] * 4
    for x in range(4):
        nl[sigma[x]] = f"u{x}"
    res = _rewrite(tri, {U: nu, L: tuple(nl)}, [])
    return res, None


def _m02t(tri, F):
    fc = _face_class(tri, F)
    (i, f), (j, g) = fc.sides
    sigma = tri.gluings[i][f][1]
    ni, nj = {}, {}
    for k, x in enumerate(y for y in range(4) if y != f):
        ni[x] = "ABC"[k]
        nj[sigma[x]] = "ABC"[k]
    explicit = [((0, 3), (i, f), ni), ((1, 3), (j, g), nj)]
    new = [("A", "B", "C", "P"), ("A", "B", "C", "P")]
    res = _rewrite(tri, {}, new, explicit=explicit, cut=[(i, f), (j, g)],
                   contexts_extra=[(i, ni), (j, nj)])
    return res, Move("M20T", (res[2][0], 3))


def _m20t(tri, U, g):
    if not 0 <= U < tri.n_tets:
        raise InvalidSite("no such tetrahedron")
    for (L, sigma, faces, free) in _pillow_faces(tri, U, 3):
        if free == (g,):
            break
    else:
        raise InvalidSite("not a triangular pillow")
    nl = [None] * 4
    for x in range(4):
        nl[sigma[x]] = f"u{x}"
    res = _rewrite(tri, {U: tuple(f"u{x}" for x in range(4)), L: tuple(nl)}, [])
    return res, None


def _m14(tri, i):
    if not 0 <= i < tri.n_tets:
        raise InvalidSite("no such tetrahedron")
    names = tuple(f"o{x}" for x in range(4))
    new = [tuple("P" if y == m else names[y] for y in range(4)) for m in range(4)]
    res = _rewrite(tri, {i: names}, new)
    t2 = res[0]
    return res, Move("M41", (t2.skeleta.vertex_of[(res[2][0], 0)],))


def _m41(tri, v):
    star = _star4(tri, v)
    if star is None:
        raise InvalidSite("not a 4-tetrahedron vertex star")
    tets, names = star
    res = _rewrite(tri, names, [tuple(f"a{k}" for k in range(4))])
    return res, Move("M14", (res[2][0],))


_IMPL = {"M23": _m23, "M32": _m32, "M02Q": _m02q, "M20Q": _m20q,
         "M02T": _m02t, "M20T": _m20t, "M14": _m14, "M41": _m41}


def rewrite(tri: Triangulation, move: Move) -> Rewrite:
    try:
        (t2, old_to_new, new_tets, face_src, contexts, names), inv = _IMPL[move.kind](tri, *move.site)
    except (KeyError, IndexError, TypeError) as exc:
        raise InvalidSite(f"{move.kind} site {move.site}: {exc}") from None
    return Rewrite(move, tri, t2, old_to_new, new_tets, names, contexts, face_src, inv)


def apply(tri: Triangulation, move: Move) -> Triangulation:
    return rewrite(tri, move).tri


# --------------------------------------------------------------------------
# decorations through a rewrite

def _known_orders(b: Branching, contexts):
    known = {}
    for t, nm in contexts:
        r = b.ranks(t)
        for x, u in nm.items():
            for y, v in nm.items():
                if x == y:
                    continue
                val = r[x] < r[y]
                if known.get((u, v), val) != val:
                    return None
                known[(u, v)] = val
    return known


def new_tet_orders(new_names, known):
    """All ways to complete name-pair orientations into total orders on the
    new tetrahedra.  Yields lists of rank tuples."""
    unknown = sorted({tuple(sorted((u, v))) for names in new_names
                      for u, v in combinations(names, 2) if (u, v) not in known})
    for choice in product((True, False), repeat=len(unknown)):
        less = dict(known)
        for (u, v), c in zip(unknown, choice):
            less[(u, v)] = c
            less[(v, u)] = not c
        ranks = []
        for names in new_names:
            r = tuple(sum(1 for y in names if y != x and less[(y, x)]) for x in names)
            if sorted(r) != [0, 1, 2, 3]:
                break
            ranks.append(r)
        else:
            yield ranks


def transport_branching(rw: Rewrite, b: Branching):
    """Branchings on ``rw.tri`` agreeing with ``b`` on the persistent part."""
    known = _known_orders(b, rw.contexts)
    if known is None:
        return []
    out = []
    base = [None] * rw.tri.n_tets
    for old, new in rw.old_to_new.items():
        base[new] = b.ranks(old)
    for ranks in new_tet_orders(rw.new_names, known):
        for k, r in zip(rw.new_tets, ranks):
            base[k] = r
        try:
            out.append(Branching.from_ranks(rw.tri, base))
        except DecorationError:
            continue
    return out


def new_face_flags(rw: Rewrite, is_in):
    """All 2-in/2-out flag assignments of the new tetrahedra given the
    in-flag function of the old triangulation."""
    base = len(rw.old_to_new)
    fixed = {}
    pairs = {}
    for (k, x), (what, ref) in rw.face_src.items():
        if what == "old":
            fixed[(k, x)] = is_in(*ref)
        elif what == "side":
            fixed[(k, x)] = not is_in(*ref)
        else:
            pairs.setdefault(ref, []).append((k, x))
    keys = sorted(pairs, key=lambda s: sorted(s))
    n_new = len(rw.new_tets)
    for choice in product((0, 1), repeat=len(keys)):
        flags = dict(fixed)
        for key, c in zip(keys, choice):
            a, b = pairs[key]
            flags[a] = c == 0
            flags[b] = c == 1
        rows = [tuple(flags[(k, x)] for x in range(4)) for k in range(n_new)]
        if all(sum(r) == 2 for r in rows):
            yield rows


def transport_prebranching(rw: Rewrite, w: PreBranching):
    base = [None] * rw.tri.n_tets
    for old, new in rw.old_to_new.items():
        base[new] = tuple(w.is_in(old, f) for f in range(4))
    out = []
    for rows in new_face_flags(rw, w.is_in):
        for k, r in zip(rw.new_tets, rows):
            base[k] = r
        try:
            out.append(PreBranching.from_flags(rw.tri, base))
        except DecorationError:
            continue
    return out


def transport(rw: Rewrite, deco):
    if isinstance(deco, Branching):
        return transport_branching(rw, deco)
    if isinstance(deco, PreBranching):
        return transport_prebranching(rw, deco)
    raise TypeError(f"unsupported decoration {deco!r}")


@dataclass
class DecoratedTransit:
    move: Move
    tri_before: Triangulation
    before: object
    tri_after: Triangulation
    after: object
    forced: bool
    choice: int = 0
    rewrite: Rewrite | None = field(default=None, repr=False)


@dataclass
class Blocked:
    move: Move
    reason: str
    witness: object = None

    def __bool__(self):
        return False


def enhance_positive(tri: Triangulation, move: Move, deco) -> list:
    if not move.positive:
        raise InvalidSite(f"{move.kind} is not a positive move")
    rw = rewrite(tri, move)
    outs = transport(rw, deco)
    forced = len(outs) == 1
    return [DecoratedTransit(move, tri, deco, rw.tri, d, forced, k, rw) for k, d in enumerate(outs)]


def _positive_candidates(rw_neg: Rewrite):
    """Positive moves on the result of a negative move that could undo it."""
    if rw_neg.inverse is not None:
        return [rw_neg.inverse]
    kind = INVERSE_KIND[rw_neg.move.kind]
    if kind != "M02Q":
        return enumerate_sites(rw_neg.tri, kind)
    return pillow_sites(rw_neg)


def pillow_seams(rw: Rewrite):
    """Face classes of ``rw.tri`` made by gluing together the outer
    neighbours of tetrahedra removed by ``rw``."""
    old = rw.before
    gone = {i for i in range(old.n_tets) if i not in rw.old_to_new}
    seams = set()
    for i in gone:
        for f in range(4):
            j, p = old.gluings[i][f]
            if j not in gone:
                seams.add(rw.tri.skeleta.face_of[(rw.old_to_new[j], p[f])])
    return seams


def quad_sites(tri: Triangulation, seams, edges=None):
    """Quadrilateral 0-2 sites splitting two distinct faces of ``seams``."""
    sk = tri.skeleta
    out = []
    for e in (range(tri.n_edges) if edges is None else edges):
        ec = sk.edges[e]
        if not ec.consistent:
            continue
        fs = [sk.face_of[(s[0], s[4])] for s in ec.link]
        for p in range(len(fs)):
            if fs[p] not in seams:
                continue
            for q in range(p + 1, len(fs)):
                if fs[q] in seams and fs[q] != fs[p]:
                    out.append(Move("M02Q", (e, p, q)))
    return out


def pillow_sites(rw_neg: Rewrite):
    """Quadrilateral 0-2 moves on ``rw_neg.tri`` that may restore the
    pillow removed by the 2-0 move ``rw_neg``."""
    seams = pillow_seams(rw_neg)
    old = rw_neg.before
    gone = [i for i in range(old.n_tets) if i not in rw_neg.old_to_new]
    touched = {edge_class(old, i, u, v)[0] for i in gone for u in range(4) for v in range(u + 1, 4)}
    edges = [k for k, src in enumerate(region_correspondence(rw_neg)) if src in touched]
    out = quad_sites(rw_neg.tri, seams, edges)
    if out:
        return out
    # degenerate pillows (glued to themselves): every site on those edges
    sk = rw_neg.tri.skeleta
    return [Move("M02Q", (k, p, q)) for k in edges
            for p in range(sk.edges[k].valence) for q in range(p + 1, sk.edges[k].valence)]


def enhance_negative(tri: Triangulation, move: Move, deco):
    """The decorated negative move, or :class:`Blocked` when the decoration
    on the disappearing region is not the output of any positive
    enhancement."""
    if move.positive:
        raise InvalidSite(f"{move.kind} is not a negative move")
    rw = rewrite(tri, move)
    cands = transport(rw, deco)
    if not cands:
        return Blocked(move, "no decoration of the result agrees on the persistent part")
    back = {new: old for old, new in rw.old_to_new.items()}
    rws = []
    for pm in _positive_candidates(rw):
        try:
            r2 = rewrite(rw.tri, pm)
        except InvalidSite:
            continue
        if r2.tri.n_tets != tri.n_tets:
            continue
        seeds = [(back[k], k2) for k, k2 in r2.old_to_new.items() if k in back][:1]
        naked = seeded_isomorphism(tri, r2.tri, *seeds[0]) if seeds else None
        rws.append((r2, naked))

    def found(d):
        return DecoratedTransit(move, tri, deco, rw.tri, d, len(cands) == 1, 0, rw)

    # survivors usually keep their labels: try that first
    for r2, naked in rws:
        if naked is None:
            continue
        for d in cands:
            for d2 in transport(r2, d):
                if decoration_matches(tri, deco, r2.tri, d2, naked):
                    return found(d)
    for r2, _ in rws:
        for d in cands:
            for d2 in transport(r2, d):
                if same_decorated(tri, deco, r2.tri, d2):
                    return found(d)
    return Blocked(move, "decoration is not the output of a positive transit", cands)


def _seeded_match(t1, d1, t2, d2, seed):
    iso = seeded_isomorphism(t1, t2, seed[0], seed[1])
    return iso is not None and decoration_matches(t1, d1, t2, d2, iso)


def decoration_matches(t1, d1, t2, d2, iso):
    tmap, vmap = iso
    for i in range(t1.n_tets):
        j, v = tmap[i], vmap[i]
        if isinstance(d1, Branching):
            r1, r2 = d1.ranks(i), d2.ranks(j)
            if any(r1[x] != r2[v[x]] for x in range(4)):
                return False
        else:
            if any(d1.is_in(i, f) != d2.is_in(j, v[f]) for f in range(4)):
                return False
    return True


def same_decorated(t1, d1, t2, d2, seeds=()):
    """Whether two decorated triangulations are isomorphic.  ``seeds``
    lists tetrahedron pairs known to correspond with identical vertex
    labels; without a usable seed this compares signatures."""
    if t1.n_tets != t2.n_tets or type(d1) is not type(d2):
        return False
    for a0, b0 in seeds:
        iso = seeded_isomorphism(t1, t2, a0, b0)
        if iso is not None:
            return decoration_matches(t1, d1, t2, d2, iso)
    if len(components(t1)) > 1:
        return signature(t1, d1) == signature(t2, d2)
    for b0 in range(t2.n_tets):
        for perm in PERMS4:
            iso = seeded_isomorphism(t1, t2, 0, b0, perm)
            if iso is not None and decoration_matches(t1, d1, t2, d2, iso):
                return True
    return False


def decorated_apply(tri, move, deco, choice=0):
    """Apply a move to a decorated triangulation; for positive moves
    ``choice`` picks among the enhancements."""
    if move.positive:
        outs = enhance_positive(tri, move, deco)
        if not 0 <= choice < len(outs):
            raise InvalidSite(f"choice {choice} out of range ({len(outs)} enhancements)")
        return outs[choice]
    res = enhance_negative(tri, move, deco)
    return res


# --------------------------------------------------------------------------
# classification of branched transits

NA_COUPLES = (((-1, 1), (-1, 0)), ((+1, 1), (+1, 0)), ((+1, 2), (+1, 3)), ((-1, 2), (-1, 3)),
              ((+1, 2), (-1, 0)), ((-1, 3), (+1, 1)), ((-1, 2), (+1, 0)), ((+1, 3), (-1, 1)),
              ((+1, 2), (+1, 1)), ((-1, 2), (-1, 1)))
SCHAEFFER_COUPLES = (((+1, 2), (+1, 1)), ((-1, 2), (-1, 1)))
SLIDING_COUPLES = (((-1, 1), (+1, 1)), ((+1, 1), (-1, 1)), ((+1, 2), (-1, 2)), ((-1, 2), (+1, 2)),
                   ((-1, 3), (-1, 0)), ((+1, 3), (+1, 0)))
FORCED_AMBIGUOUS_COUPLES = (((-1, 3), (-1, 0)), ((+1, 3), (+1, 0)))
BUMP_COUPLES = (((+1, 0), (-1, 0)), ((-1, 0), (+1, 0)), ((+1, 3), (-1, 3)), ((-1, 3), (+1, 3)))


def _with_swaps(couples):
    return set(couples) | {(c[1], c[0]) for c in couples}


_TABLE = {}
for _c in _with_swaps(NA_COUPLES):
    _TABLE[_c] = "NonAmbiguous"
for _c in _with_swaps(SLIDING_COUPLES):
    _TABLE[_c] = "ForcedAmbiguous" if _c in _with_swaps(FORCED_AMBIGUOUS_COUPLES) else "AmbiguousSliding"
for _c in _with_swaps(BUMP_COUPLES):
    _TABLE[_c] = "Bump"


def table_class(couple):
    return _TABLE.get(tuple(map(tuple, couple)))


@dataclass(frozen=True)
class TransitType:
    couple: tuple
    cls: str
    schaeffer: bool
    rule_bump: bool = False       # pit/source rule
    pb_forced: bool = False       # induced pre-branched transit is forced
    b_forced: bool = False        # branched transit is forced

    @property
    def rule_class(self):
        """Class derived without the table: bump by the pit/source rule,
        otherwise non-ambiguous iff the induced pb-transit is forced."""
        if self.rule_bump:
            return "Bump"
        if self.pb_forced:
            return "NonAmbiguous"
        return "ForcedAmbiguous" if self.b_forced else "AmbiguousSliding"

    @property
    def consistent(self):
        return self.cls == self.rule_class

    def as_json(self):
        return {"couple": [list(c) for c in self.couple], "class": self.cls,
                "schaeffer": self.schaeffer, "pit_source_bump": self.rule_bump,
                "pb_forced": self.pb_forced, "b_forced": self.b_forced}


def local_in_faces(sign, ranks):
    """In-faces of the induced pre-branching on one tetrahedron: the
    faces opposite the vertices of rank 1 and 3 when the tetrahedron is
    positive, rank 0 and 2 when negative."""
    want = (1, 3) if sign > 0 else (0, 2)
    return tuple(ranks[f] in want for f in range(4))


_M23_NEW = [("v1", "v2", f"x{a}", f"x{b}") for a, b in ((1, 2), (0, 2), (0, 1))]


def _local_23_counts(r1, r2, eps1, eps2):
    """Counts of branched and of induced pre-branched enhancements of an
    abstract 2-3 site.  ``r1``/``r2``: ranks of the local vertices of tau1
    = (x0, x1, x2, v1) and tau2 = (x0, x1, x2, v2)."""
    n1 = ("x0", "x1", "x2", "v1")
    n2 = ("x0", "x1", "x2", "v2")
    known = {}
    for names, r in ((n1, r1), (n2, r2)):
        for x, y in combinations(range(4), 2):
            known[(names[x], names[y])] = r[x] < r[y]
            known[(names[y], names[x])] = r[y] < r[x]
    nb = sum(1 for _ in new_tet_orders(_M23_NEW, known))
    s1 = eps1 * perm_sign(perm_inverse(r1))
    s2 = eps2 * perm_sign(perm_inverse(r2))
    f1 = local_in_faces(s1, r1)
    f2 = local_in_faces(s2, r2)
    if f1[3] == f2[3]:
        raise AssertionError("induced co-orientations disagree on the common face")
    # new tet k omits x_k; its face opposite v2 is tau1's face opposite x_k,
    # its face opposite v1 is tau2's face opposite x_k
    fixed = [(f1[k], f2[k]) for k in range(3)]  # (face opp v2, face opp v1) per new tet
    npb = 0
    # internal faces: {v1,v2,x_c} shared by the two new tets that contain x_c
    for choice in product((0, 1), repeat=3):
        n_in = [fixed[k][0] + fixed[k][1] for k in range(3)]
        for c, bit in enumerate(choice):
            a, b = [k for k in range(3) if k != c]
            n_in[a if bit == 0 else b] += 1
        if all(x == 2 for x in n_in):
            npb += 1
    return nb, npb


def _type_from_local(r1, r2, eps1, eps2):
    s1 = eps1 * perm_sign(perm_inverse(r1))
    s2 = eps2 * perm_sign(perm_inverse(r2))
    a1, a2 = r1[3], r2[3]
    couple = ((s1, a1), (s2, a2))
    nb, npb = _local_23_counts(r1, r2, eps1, eps2)
    cls = table_class(couple)
    return TransitType(couple, cls, couple in _with_swaps(SCHAEFFER_COUPLES),
                       rule_bump=(a1 == a2 and a1 in (0, 3)), pb_forced=(npb == 1), b_forced=(nb == 1))


def classify_23(tri: Triangulation, b: Branching, move: Move) -> TransitType:
    """Type of the branched 2-3 transit at face class ``move.site[0]``; the
    auxiliary orientation is +1 on the tetrahedron containing v1."""
    if move.kind != "M23":
        raise InvalidSite("classify_23 needs a 2-3 move")
    fc = _face_class(tri, move.site[0])
    (i, f), (j, g) = fc.sides
    if i == j:
        raise InvalidSite("2-3 move needs two distinct tetrahedra")
    sigma = tri.gluings[i][f][1]
    eps1 = 1
    eps2 = -perm_sign(sigma)
    # relabel to the abstract site: tau1 local vertex order (x0,x1,x2,v1)
    xs = [x for x in range(4) if x != f]
    ri, rj = b.ranks(i), b.ranks(j)
    rel1 = xs + [f]
    rel2 = [sigma[x] for x in xs] + [g]
    r1 = tuple(ri[x] for x in rel1)
    r2 = tuple(rj[x] for x in rel2)
    # carry the orientation along the relabelling so the signs are unchanged
    eps1 *= perm_sign(tuple(rel1))
    eps2 *= perm_sign(tuple(rel2))
    return _type_from_local(r1, r2, eps1, eps2)


@dataclass(frozen=True)
class CensusRow:
    order: tuple       # names from smallest to largest
    type_id: int
    ttype: TransitType


@dataclass
class Census:
    rows: list
    types: list        # list of (representative TransitType, [row indices])

    def class_counts(self):
        out = {}
        for t, _ in self.types:
            out[t.cls] = out.get(t.cls, 0) + 1
        return out

    def as_json(self):
        counts = self.class_counts()
        return {
            "configurations": len(self.rows),
            "types": len(self.types),
            "per_type": sorted({len(r) for _, r in self.types}),
            "classes": counts,
            "ambiguous_sliding_total": counts.get("AmbiguousSliding", 0) + counts.get("ForcedAmbiguous", 0),
            "schaeffer_types": sum(1 for t, _ in self.types if t.schaeffer),
            "cross_check_agreement": sum(1 for r in self.rows if r.ttype.consistent),
            "table": [dict(t.as_json(), configurations=len(r)) for t, r in self.types],
        }


CENSUS_NAMES = ("x0", "x1", "x2", "v1", "v2")


def census_types() -> Census:
    """All 120 total orders of the five vertices of an abstract 2-3 site,
    grouped into orbits of the cyclic permutations of the common face."""
    from itertools import permutations

    rows = []
    seen = {}
    types = []
    for order in permutations(CENSUS_NAMES):
        rank = {v: k for k, v in enumerate(order)}
        r1 = _compress([rank[v] for v in ("x0", "x1", "x2", "v1")])
        r2 = _compress([rank[v] for v in ("x0", "x1", "x2", "v2")])
        t = _type_from_local(r1, r2, 1, -1)
        key = _cyclic_key(order)
        if key not in seen:
            seen[key] = len(types)
            types.append((t, []))
        tid = seen[key]
        types[tid][1].append(len(rows))
        rows.append(CensusRow(order, tid, t))
    return Census(rows, types)


def _compress(vals):
    s = sorted(vals)
    return tuple(s.index(v) for v in vals)


def _cyclic_key(order):
    def rot(v, k):
        if v.startswith("x"):
            return f"x{(int(v[1]) + k) % 3}"
        return v
    return min(tuple(rot(v, k) for v in order) for k in range(3))


# --------------------------------------------------------------------------
# quadrilateral 0-2 classification

@dataclass(frozen=True)
class QuadType:
    key: tuple          # ((rank of v1 in t1, co-orientation of t1), (rank of v2 in t2, co-orientation of t2))
    bump: bool
    b_forced: bool
    pb_forced: bool

    @property
    def cls(self):
        if self.bump:
            return "Bump"
        if self.pb_forced:
            return "NonAmbiguous"
        return "ForcedAmbiguous" if self.b_forced else "AmbiguousSliding"

    def as_json(self):
        return {"key": [list(k) for k in self.key], "class": self.cls,
                "b_forced": self.b_forced, "pb_forced": self.pb_forced}


_Q_NAMES = ("E0", "E1", "V1", "V2")


def _local_02q(ranks):
    """``ranks`` of (E0, E1, V1, V2) in the pillow produced by the move
    (tetrahedron U, auxiliary orientation +1; L is glued to U by the
    identity on faces 0 and 1 and so is negative)."""
    r_t1 = _compress([ranks[0], ranks[1], ranks[2]])
    r_t2 = _compress([ranks[0], ranks[1], ranks[3]])
    a1, a2 = r_t1[2], r_t2[2]
    bump = a1 == a2 and a1 in (0, 2)
    known = {}
    for (u, ru), (v, rv) in combinations(list(zip(_Q_NAMES, ranks)), 2):
        if {u, v} == {"V1", "V2"}:
            continue
        known[(u, v)] = ru < rv
        known[(v, u)] = rv < ru
    nb = sum(1 for _ in new_tet_orders([_Q_NAMES, _Q_NAMES], known))
    sU = perm_sign(perm_inverse(ranks))
    fU = local_in_faces(sU, ranks)
    fL = local_in_faces(-sU, ranks)
    # t1 is face 3 of U and of L, t2 is face 2; inputs are their co-orientations
    # (True = pointing into U) and the count of fillings of faces 0, 1
    up1, up2 = fU[3], fU[2]
    assert fL[3] != up1 and fL[2] != up2
    fixed_u = up1 + up2
    fixed_l = (not up1) + (not up2)
    npb = 0
    for c0, c1 in product((0, 1), repeat=2):
        nu = fixed_u + (c0 == 0) + (c1 == 0)
        nl = fixed_l + (c0 == 1) + (c1 == 1)
        if nu == 2 and nl == 2:
            npb += 1
    return QuadType(((a1, int(up1)), (a2, int(up2))), bump, nb == 1, npb == 1)


def quad_census():
    """All 24 orders of the four vertices of an abstract quadrilateral 0-2
    site, with their classification."""
    from itertools import permutations

    rows = []
    for ranks in permutations(range(4)):
        rows.append((ranks, _local_02q(ranks)))
    return rows


def classify_02q(tri: Triangulation, b: Branching, move: Move) -> QuadType:
    """Classify a branched quadrilateral 0-2 site; co-orientations are
    relative to the auxiliary orientation +1 on the new tetrahedron U."""
    if move.kind != "M02Q":
        raise InvalidSite("classify_02q needs a quadrilateral 0-2 move")
    rw = rewrite(tri, move)
    outs = transport_branching(rw, b)
    if not outs:
        raise InvalidSite("no branched enhancement")
    U = rw.new_tets[0]
    return _local_02q(outs[0].ranks(U))


def transported_orientation(rw: Rewrite, eps):
    """Orientation signs on ``rw.tri`` that agree with ``eps`` on the
    persistent part (needs ``rw.tri`` connected and orientable)."""
    from .kernel import orient

    new = orient(rw.tri)
    flip = None
    for old, k in rw.old_to_new.items():
        flip = new[k] != eps[old]
        break
    if flip is None:
        names_of = {i: nm for i, nm in rw.contexts}
        for (k, x), (what, ref) in rw.face_src.items():
            if what != "old":
                continue
            i, f = ref
            nm = names_of[i]
            sigma = tuple(x if y == f else rw.new_names[k].index(nm[y]) for y in range(4))
            want = eps[i] * perm_sign(sigma)
            flip = new[rw.new_tets[k]] != want
            break
    if flip:
        new = tuple(-s for s in new)
    return tuple(new)


def region_correspondence(rw):
    """Map each edge class of ``rw.tri`` to the edge class of ``rw.before``
    it persists from, or None for new edges."""
    old, new = rw.before, rw.tri
    back = {k: i for i, k in rw.old_to_new.items()}
    pos_of = {t: m for m, t in enumerate(rw.new_tets)}
    out = []
    for ec in new.skeleta.edges:
        found = None
        for (t, a, bb, *_rest) in ec.link:
            if t in back:
                found = edge_class(old, back[t], a, bb)[0]
                break
        if found is None:
            for (t, a, bb, *_rest) in ec.link:
                names = rw.new_names[pos_of[t]]
                na, nb = names[a], names[bb]
                for (i, ctx) in rw.contexts:
                    inv = {z: v for v, z in ctx.items()}
                    if na in inv and nb in inv:
                        found = edge_class(old, i, inv[na], inv[nb])[0]
                        break
                if found is not None:
                    break
        out.append(found)
    return out
