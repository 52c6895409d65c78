"""
Constructive connectivity of branched triangulations.

Every operation returns a :class:`MoveSequence`, a certificate that is
checked by replaying it move by move; nothing here is trusted without
that replay.
"""
from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache

from . import moves as mv
from .decor import (Branching, PreBranching, enumerate_branchings, invert,
                    is_good_ambiguous, link_orientations)
from .kernel import (PERMS4, components, edge_class, perm_inverse, seeded_isomorphism,
                     signature, validate)
from .moves import Blocked, InvalidSite, Move


class NotGoodAmbiguous(ValueError):
    pass


class ReplayError(RuntimeError):
    pass


class BudgetExceeded(RuntimeError):
    def __init__(self, msg, partial=None):
        super().__init__(msg)
        self.partial = partial


class NotAdmissible(ValueError):
    pass


class InvalidConfiguration(ValueError):
    pass


class MarkingFailure(RuntimeError):
    pass


# --------------------------------------------------------------------------
# certificates

@dataclass
class Step:
    move: Move
    choice: int = 0

    def to_json(self):
        d = self.move.to_json()
        d["choice"] = self.choice
        return d

    @classmethod
    def from_json(cls, d):
        return cls(Move.from_json(d), int(d.get("choice", 0)))


@dataclass
class MoveSequence:
    """Moves with enhancement choices, replayable from ``(tri, deco)``."""

    tri: object
    deco: object
    steps: list = field(default_factory=list)
    start_signature: str = ""
    end_signature: str = ""
    notes: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    @property
    def kinds(self):
        return [s.move.kind for s in self.steps]

    @property
    def ideal(self):
        return all(s.move.ideal for s in self.steps)

    def replay(self, check=True):
        """Replay every step; returns the final (tri, deco)."""
        t, d = self.tri, self.deco
        for k, s in enumerate(self.steps):
            if d is None:
                try:
                    t = mv.apply(t, s.move)
                except InvalidSite as exc:
                    raise ReplayError(f"step {k} ({s.move.kind} {s.move.site}): {exc}") from None
                continue
            try:
                res = mv.decorated_apply(t, s.move, d, s.choice)
            except InvalidSite as exc:
                raise ReplayError(f"step {k} ({s.move.kind} {s.move.site}): {exc}") from None
            if not res:
                raise ReplayError(f"step {k} ({s.move.kind} {s.move.site}) blocked: {res.reason}")
            t, d = res.tri_after, res.after
        if check and self.end_signature and signature(t, d) != self.end_signature:
            raise ReplayError("replay does not end at the recorded signature")
        return t, d

    def verify(self):
        try:
            if signature(self.tri, self.deco) != self.start_signature:
                return False
            self.replay()
        except ReplayError:
            return False
        return True

    def to_json(self):
        return {"format": "btw-moves/1",
                "start": self.start_signature, "end": self.end_signature,
                "steps": [s.to_json() for s in self.steps],
                "notes": list(self.notes)}


class _Builder:
    """Walks a decorated triangulation forward, recording steps."""

    def __init__(self, tri, deco):
        self.seq = MoveSequence(tri, deco, [], signature(tri, deco))
        self.tri, self.deco = tri, deco
        self.last = None
        self.transits = []

    def push(self, transit, move, choice=0):
        if not transit:
            raise ReplayError(f"{move.kind} {move.site} blocked: {transit.reason}")
        self.seq.steps.append(Step(move, choice))
        self.transits.append(transit)
        self.tri, self.deco = transit.tri_after, transit.after
        self.last = transit
        return transit

    def apply(self, move, choice=0):
        return self.push(mv.decorated_apply(self.tri, move, self.deco, choice), move, choice)

    def apply_where(self, move, accept):
        """Positive move with the first enhancement satisfying ``accept``."""
        for k, t in enumerate(mv.enhance_positive(self.tri, move, self.deco)):
            if accept(t):
                return self.push(t, move, k)
        raise ReplayError(f"no acceptable enhancement of {move.kind} {move.site}")

    def extend(self, seq: MoveSequence):
        for s in seq.steps:
            self.apply(s.move, s.choice)

    def extend_transits(self, seq: MoveSequence, transits):
        """Append an already replayed sequence starting at the current state."""
        for s, t in zip(seq.steps, transits):
            self.push(t, s.move, s.choice)

    def finish(self):
        self.seq.end_signature = signature(self.tri, self.deco)
        return self.seq


# --------------------------------------------------------------------------
# following cells through moves and isomorphisms

def edge_forward(rw, e):
    """Edge classes of ``rw.tri`` persisting from edge class ``e``."""
    return [k for k, old in enumerate(mv.region_correspondence(rw)) if old == e]


def side_forward(rw, side):
    """Where a face side ``(tet, face)`` of ``rw.before`` lives afterwards,
    or None if its tetrahedron was destroyed without trace."""
    if side is None:
        return None
    i, f = side
    if i in rw.old_to_new:
        return (rw.old_to_new[i], f)
    for (k, x), src in rw.face_src.items():
        if src == ("old", (i, f)):
            return (rw.new_tets[k], x)
    return None


def decorated_isomorphism(t1, d1, t2, d2, seeds=()):
    """An isomorphism ``(tmap, vmap)`` of connected decorated
    triangulations carrying ``d1`` to ``d2``, or None."""
    if t1.n_tets != t2.n_tets:
        return None
    for a0, b0 in seeds:
        iso = seeded_isomorphism(t1, t2, a0, b0)
        if iso is not None and mv.decoration_matches(t1, d1, t2, d2, iso):
            return iso
    if seeds:
        return None
    for b0 in range(t2.n_tets):
        for perm in PERMS4:
            iso = seeded_isomorphism(t1, t2, 0, b0, perm)
            if iso is not None and mv.decoration_matches(t1, d1, t2, d2, iso):
                return iso
    return None


def map_edge(t1, t2, iso, e):
    tmap, vmap = iso
    i, a, b = t1.skeleta.edges[e].rep
    return edge_class(t2, tmap[i], vmap[i][a], vmap[i][b])[0]


def map_face(t1, t2, iso, F):
    tmap, vmap = iso
    i, f = t1.skeleta.faces[F].sides[0]
    return t2.skeleta.face_of[(tmap[i], vmap[i][f])]


def translate_move(move, t1, t2, iso):
    """The move of ``t2`` corresponding to ``move`` on ``t1``."""
    tmap, vmap = iso
    k, s = move.kind, move.site
    if k == "M23" or k == "M02T":
        return Move(k, (map_face(t1, t2, iso, s[0]),))
    if k == "M32":
        return Move(k, (map_edge(t1, t2, iso, s[0]),))
    if k == "M14":
        return Move(k, (tmap[s[0]],))
    if k == "M41":
        i, x = t1.skeleta.vertices[s[0]].embeddings[0]
        return Move(k, (t2.skeleta.vertex_of[(tmap[i], vmap[i][x])],))
    if k == "M20T":
        return Move(k, (tmap[s[0]], vmap[s[0]][s[1]]))
    if k == "M20Q":
        f1, f2 = sorted((vmap[s[0]][s[1]], vmap[s[0]][s[2]]))
        return Move(k, (tmap[s[0]], f1, f2))
    raise ValueError(f"cannot translate {k}")


# --------------------------------------------------------------------------
# two-step barycentric refinement

@dataclass
class Refinement:
    tri: object
    deco: Branching
    sequence: MoveSequence
    original_edges: dict     # edge class of the input -> edge class of the output
    added_vertices: list     # vertex classes created by 1-4 moves
    states: list = field(default_factory=list, repr=False)   # (tri, deco, transit) per step


def _new_vertex_pit(t):
    """Enhancement test: the vertex created by a 1-4 move is a pit."""
    b = t.after
    return all(b.is_pit(k, m) for m, k in enumerate(t.rewrite.new_tets))


def refine_two_step(tri, b: Branching, *, stage3=None) -> Refinement:
    """1-4 at every tetrahedron, 1-4 beside every original face, then the
    2-3 move killing each original face.

    Each 1-4 makes its new vertex a pit.  The killing 2-3 joins a
    first-stage vertex ``P`` to a second-stage vertex ``Q``; both cannot
    stay pits, and by default the new edge is oriented ``P -> Q`` so that
    the later vertex stays a pit (``stage3`` may override the choice).
    """
    bld = _Builder(tri, b)
    states = [(tri, b, None)]
    tets = list(range(tri.n_tets))
    sides = [fc.sides[0] for fc in tri.skeleta.faces]
    edges = {e: [e] for e in range(tri.n_edges)}
    pits = []          # (tet, local vertex) embeddings of added vertices, tracked

    def follow(rw):
        nonlocal tets, sides, edges, pits
        tets = [rw.old_to_new[i] for i in tets if i in rw.old_to_new]
        sides = [side_forward(rw, s) for s in sides]
        edges = {e: [x for y in ys for x in edge_forward(rw, y)] for e, ys in edges.items()}
        moved = []
        for (i, v) in pits:
            if i in rw.old_to_new:
                moved.append((rw.old_to_new[i], v))
            else:
                vc = rw.before.skeleta.vertex_of[(i, v)]
                moved.append(_vertex_forward(rw, vc))
        pits = moved

    # stage 1
    for _ in range(len(tets)):
        i = tets.pop(0)
        t = bld.apply_where(Move("M14", (i,)), _new_vertex_pit)
        states.append((bld.tri, bld.deco, t))
        follow(t.rewrite)
        pits.append((t.rewrite.new_tets[0], 0))
    # stage 2
    stage2 = []
    for k in range(len(sides)):
        i, f = sides[k]
        t = bld.apply_where(Move("M14", (i,)), _new_vertex_pit)
        states.append((bld.tri, bld.deco, t))
        follow(t.rewrite)
        pits.append((t.rewrite.new_tets[0], 0))
        stage2.append(len(pits) - 1)
    # stage 3
    for k in range(len(sides)):
        F = bld.tri.skeleta.face_of[sides[k]]
        move = Move("M23", (F,))
        (i, f), (j, g) = bld.tri.skeleta.faces[F].sides
        if stage3 is not None:
            accept = stage3
        else:
            q_vertex = [bld.tri.skeleta.vertex_of[pits[n]] for n in stage2]

            def accept(t, i=i, f=f, j=j, g=g, q_vertex=q_vertex):
                # the new edge v1 -> v2 joins the apexes of the two tetrahedra
                sk = t.tri_before.skeleta
                qi = sk.vertex_of[(i, f)] in q_vertex
                new = t.rewrite.new_tets[0]
                head_is_v2 = t.after.orientation(new, 0, 1) > 0
                return head_is_v2 != qi
        t = bld.apply_where(move, accept)
        states.append((bld.tri, bld.deco, t))
        follow(t.rewrite)
    seq = bld.finish()
    out_edges = {}
    for e, ys in edges.items():
        assert len(ys) == 1, "original edge did not persist"
        out_edges[e] = ys[0]
    added = sorted({bld.tri.skeleta.vertex_of[p] for p in pits})
    return Refinement(bld.tri, bld.deco, seq, out_edges, added, states)


def _vertex_forward(rw, vc):
    """An embedding ``(tet, vertex)`` of the image of vertex class ``vc``."""
    for (i, v) in rw.before.skeleta.vertices[vc].embeddings:
        if i in rw.old_to_new:
            return (rw.old_to_new[i], v)
    # every tetrahedron around the vertex was replaced; use names
    pos = {t: m for m, t in enumerate(rw.new_tets)}
    for (i, ctx) in rw.contexts:
        for v, name in ctx.items():
            if rw.before.skeleta.vertex_of[(i, v)] != vc:
                continue
            for k, names in zip(rw.new_tets, rw.new_names):
                if name in names:
                    return (k, names.index(name))
    raise LookupError("vertex did not persist")


# --------------------------------------------------------------------------
# inverting a good ambiguous edge by ideal moves

def _conflict_face(tri, b, e):
    """A face of the star of ``e`` between two tetrahedra whose link
    edges have conflicting orientations."""
    link = tri.skeleta.edges[e].link
    signs = link_orientations(tri, b, e)
    n = len(link)
    for k in range(n):
        if signs[k] != signs[(k + 1) % n]:
            i, a, bb, c, d = link[k]
            return tri.skeleta.face_of[(i, d)]
    return None


def _restore_pillow(bld, site, rw20, pillow_tri, want):
    try:
        rw = mv.rewrite(bld.tri, site)
    except InvalidSite:
        return None
    # cheap naked test first
    anchor = [(x, rw.old_to_new[y]) for x, y in rw20.old_to_new.items() if y in rw.old_to_new][:1]
    if anchor and seeded_isomorphism(pillow_tri, rw.tri, *anchor[0]) is None:
        return None
    outs = [mv.DecoratedTransit(site, bld.tri, bld.deco, rw.tri, d, False, k, rw)
            for k, d in enumerate(mv.transport(rw, bld.deco))]
    for k, t in enumerate(outs):
        seeds = [(x, t.rewrite.old_to_new[y]) for x, y in rw20.old_to_new.items()
                 if y in t.rewrite.old_to_new][:1]
        iso = decorated_isomorphism(pillow_tri, want, t.tri_after, t.after, seeds)
        if iso is not None:
            return site, k, t, iso
    return None


def expand_good_inversion(tri, b: Branching, e) -> MoveSequence:
    """Ideal moves from ``(tri, b)`` to a copy of ``(tri, invert(b, e))``.

    While the star of ``e`` has more than two tetrahedra, a 2-3 move at a
    conflicting pair shrinks it; the two-tetrahedron star is then the
    output of a quadrilateral 0-2 move, replaced by its other branched
    version through 2-0 / 0-2; finally the 2-3 moves are undone.
    """
    if not is_good_ambiguous(tri, b, e):
        raise NotGoodAmbiguous(f"edge {e} is not good ambiguous")
    bld = _Builder(tri, b)
    target = b.inverted(e)
    created = []
    cur = e
    while bld.tri.skeleta.edges[cur].valence > 2:
        F = _conflict_face(bld.tri, bld.deco, cur)
        move = Move("M23", (F,))

        def keeps_good(t, cur=cur):
            ys = edge_forward(t.rewrite, cur)
            return len(ys) == 1 and is_good_ambiguous(t.tri_after, t.after, ys[0])

        t = bld.apply_where(move, keeps_good)
        rw = t.rewrite
        created = [edge_forward(rw, c)[0] for c in created]
        created.append(mv.region_correspondence(rw).index(None))
        cur = edge_forward(rw, cur)[0]

    # the pillow: remove it, then put it back with e reversed
    pillow_tri, pillow_deco = bld.tri, bld.deco
    want = pillow_deco.inverted(cur)
    i, a, bb, c, d = pillow_tri.skeleta.edges[cur].link[0]
    f1, f2 = sorted((c, d))
    rw20 = bld.apply(Move("M20Q", (i, f1, f2))).rewrite
    # the quadrilateral reappears on the edge the pillow collapsed onto
    found = None
    for site in mv.pillow_sites(rw20):
        found = _restore_pillow(bld, site, rw20, pillow_tri, want)
        if found:
            break
    if found is None:
        raise ReplayError("no quadrilateral 0-2 move restores the inverted pillow")
    site, k, t, iso = found
    bld.push(t, site, k)
    created = [map_edge(pillow_tri, bld.tri, iso, c) for c in created]

    for _ in range(len(created)):
        c = created.pop()
        t = bld.apply(Move("M32", (c,)))
        created = [edge_forward(t.rewrite, x)[0] for x in created]
    seq = bld.finish()
    if seq.end_signature != signature(tri, target):
        raise ReplayError("inversion did not reach the inverted branching")
    return seq


# --------------------------------------------------------------------------
# completed connectivity

def iso_compose(first, second):
    """The isomorphism ``second o first``."""
    t1, v1 = first
    t2, v2 = second
    return ({i: t2[j] for i, j in t1.items()},
            {i: tuple(v2[t1[i]][x] for x in v1[i]) for i in t1})


def iso_inverse(iso):
    tmap, vmap = iso
    return ({j: i for i, j in tmap.items()},
            {tmap[i]: perm_inverse(v) for i, v in vmap.items()})


def identity_iso(tri):
    return ({i: i for i in range(tri.n_tets)}, {i: (0, 1, 2, 3) for i in range(tri.n_tets)})


def _step_to(bld, cands, target, tdeco, seeds):
    """Apply the first candidate move (with a suitable enhancement) that
    turns ``bld``'s state into a copy of ``(target, tdeco)``.  ``seeds``
    lists ``(target tet, current tet, vertex map)`` correspondences of
    tetrahedra the move should leave alone.  Returns the isomorphism
    ``target -> new state``."""
    for m in cands:
        try:
            rw = mv.rewrite(bld.tri, m)
        except InvalidSite:
            continue
        if rw.tri.n_tets != target.n_tets:
            continue
        usable = [(a, rw.old_to_new[c], p) for a, c, p in seeds if c in rw.old_to_new]
        if usable:
            a, c, p = usable[0]
            naked = seeded_isomorphism(target, rw.tri, a, c, p)
            if naked is None:
                continue
            check = lambda t, d: mv.decoration_matches(target, tdeco, t, d, naked)
        else:
            naked = None
            check = None
        if m.positive:
            for k, d in enumerate(mv.transport(rw, bld.deco)):
                iso = naked if check is None or check(rw.tri, d) else None
                if iso is None and check is None:
                    iso = decorated_isomorphism(target, tdeco, rw.tri, d)
                if iso is not None:
                    bld.push(mv.DecoratedTransit(m, bld.tri, bld.deco, rw.tri, d, False, k, rw), m, k)
                    return iso
        else:
            res = mv.enhance_negative(bld.tri, m, bld.deco)
            if not res:
                continue
            if check is not None:
                iso = naked if check(res.tri_after, res.after) else None
            else:
                iso = decorated_isomorphism(target, tdeco, res.tri_after, res.after)
            if iso is not None:
                bld.push(res, m)
                return iso
    raise ReplayError("no move reaches the expected decorated state")


def _undo_transit(bld, tr, iso):
    """Undo the recorded transit ``tr`` on a state that ``iso`` identifies
    with ``tr.tri_after``; returns the isomorphism from ``tr.tri_before``."""
    rw = tr.rewrite
    prev, cur = tr.tri_before, tr.tri_after
    tmap, vmap = iso
    if rw.inverse is not None:
        cands = [translate_move(rw.inverse, cur, bld.tri, iso)]
    else:
        # a 2-0 move: the pillow comes back on an edge it collapsed onto
        seams = {map_face(cur, bld.tri, iso, F) for F in mv.pillow_seams(rw)}
        edges = sorted({map_edge(cur, bld.tri, iso, e) for e in
                        {s.site[0] for s in mv.pillow_sites(rw)}})
        cands = mv.quad_sites(bld.tri, seams, edges)
    seeds = [(a, tmap[c], vmap[c]) for a, c in rw.old_to_new.items()]
    return _step_to(bld, cands, prev, tr.before, seeds)


def _mirror(bld, tr, iso):
    """Repeat the transit ``tr`` of a reference state on ``bld``'s state
    (identified with ``tr.tri_before`` by ``iso``)."""
    tmap, vmap = iso
    t1 = tr.tri_before
    if tr.move.kind == "M02Q":
        # link positions depend on where the walk starts: match the faces
        e, p, q = tr.move.site
        link = t1.skeleta.edges[e].link
        faces = {map_face(t1, bld.tri, iso, t1.skeleta.face_of[(s[0], s[4])])
                 for s in (link[p], link[q])}
        cands = mv.quad_sites(bld.tri, faces, [map_edge(t1, bld.tri, iso, e)])
    else:
        cands = [translate_move(tr.move, t1, bld.tri, iso)]
    seeds = [(c, tmap[a], vmap[a]) for a, c in tr.rewrite.old_to_new.items()]
    return _step_to(bld, cands, tr.tri_after, tr.after, seeds)


def _walk_back(bld, transits, iso):
    """Undo ``transits`` (in reverse) from a state that ``iso`` identifies
    with the end of the last one; returns the final isomorphism."""
    for tr in reversed(transits):
        iso = _undo_transit(bld, tr, iso)
    return iso


def connect_completed(tri, b: Branching, b2: Branching) -> MoveSequence:
    """Moves (1-4 and 2-3 included) from ``(tri, b)`` to ``(tri, b2)``."""
    bld = _Builder(tri, b)
    if b == b2:
        return bld.finish()
    r1 = _refined(tri, b)
    r2 = _refined(tri, b2)
    if r1.tri.gluings != r2.tri.gluings:
        raise ReplayError("refinements of the two branchings differ as naked triangulations")
    for e in range(r1.tri.n_edges):
        if e not in r1.original_edges.values() and r1.deco.bits[e] != r2.deco.bits[e]:
            raise ReplayError("refinements disagree off the original edges")
    bld.extend(r1.sequence)
    ref, cur = r1.tri, r1.deco          # reference copy of the refined state
    iso = ({i: i for i in range(ref.n_tets)}, {i: (0, 1, 2, 3) for i in range(ref.n_tets)})
    todo = [e for e in r1.original_edges.values() if r1.deco.bits[e] != r2.deco.bits[e]]
    while todo:
        for e in todo:
            here = map_edge(ref, bld.tri, iso, e)
            if is_good_ambiguous(bld.tri, bld.deco, here):
                break
        else:
            raise ReplayError("no remaining edge is good ambiguous")
        bld.extend(expand_good_inversion(bld.tri, bld.deco, here))
        cur = cur.inverted(e)
        todo.remove(e)
        iso = decorated_isomorphism(ref, cur, bld.tri, bld.deco)
        if iso is None:
            raise ReplayError("inversion left the refined triangulation")
    _walk_back(bld, [s[2] for s in r2.states[1:]], iso)
    seq = bld.finish()
    if seq.end_signature != signature(tri, b2):
        raise ReplayError("completed connection ends at the wrong branching")
    return seq


# --------------------------------------------------------------------------
# arches

@dataclass(frozen=True)
class ArchMarking:
    """A triangle ``t`` (face class) through the new vertex ``v`` of a 1-4
    move, and an edge ``e`` (edge class) of ``t`` at ``v``."""
    vertex: int
    face: int
    edge: int

    def to_json(self):
        return {"vertex": self.vertex, "face": self.face, "edge": self.edge}


def arch_markings(tri, v):
    """The 12 naked markings at the new vertex ``v`` of a 1-4 move."""
    sk = tri.skeleta
    out = []
    seen = set()
    for (i, x) in sk.vertices[v].embeddings:
        for f in range(4):
            if f == x:
                continue
            F = sk.face_of[(i, f)]
            if F in seen:
                continue
            seen.add(F)
            for y in range(4):
                if y not in (x, f):
                    out.append(ArchMarking(v, F, edge_class(tri, i, x, y)[0]))
    return out


def _arch_frame(tri, b, m: ArchMarking):
    """Local labels in side A of the marked triangle, listed as
    ``(v0, v1, v2)`` by the branching, plus the side data."""
    (A, fa), (B, fb) = tri.skeleta.faces[m.face].sides
    verts = [x for x in range(4) if x != fa]
    rk = b.ranks(A)
    v0, v1, v2 = sorted(verts, key=lambda x: rk[x])
    if tri.skeleta.vertex_of[(A, v2)] != m.vertex:
        raise InvalidConfiguration("marked vertex is not the top of the triangle")
    return (A, fa), (B, fb), (v0, v1, v2)


def arch_admissible(tri, b, m: ArchMarking) -> bool:
    (A, _), _, (v0, v1, v2) = _arch_frame(tri, b, m)
    if m.edge == edge_class(tri, A, v1, v2)[0]:
        return True
    if m.edge == edge_class(tri, A, v0, v2)[0]:
        return False
    raise InvalidConfiguration("marked edge is not an edge of the triangle at the vertex")


def insert_arch(tri, b: Branching, m: ArchMarking, *, w_first=True):
    """Cut the marked triangle ``t = (v0, v1, v2)`` open and insert one
    tetrahedron ``(w, v0, v1, v2)``: its face ``v0 v1 v2`` on one side of
    the cut, its face ``w v1 v2`` on the other (so ``w`` meets ``v0``), and
    its two faces through ``w v0`` glued to each other swapping ``v1`` and
    ``v2``.  Returns the new ``(tri, branching)``."""
    if not arch_admissible(tri, b, m):
        raise NotAdmissible("the marked edge does not carry the prevailing orientation")
    (A, fa), (B, fb), (v0, v1, v2) = _arch_frame(tri, b, m)
    p = tri.gluings[A][fa][1]
    n = tri.n_tets
    table = [list(row) for row in tri.gluings]
    sig_a = (fa, v0, v1, v2)                 # Delta labels 0..3 -> A labels
    sig_b = (p[v0], fb, p[v1], p[v2])        # Delta labels -> B labels
    row = [None] * 4
    row[0] = (A, sig_a)
    row[1] = (B, sig_b)
    row[2] = (n, (0, 1, 3, 2))
    row[3] = (n, (0, 1, 3, 2))
    table[A][fa] = (n, perm_inverse(sig_a))
    table[B][fb] = (n, perm_inverse(sig_b))
    table.append(row)
    new = validate(table)
    ranks = [b.ranks(i) for i in range(n)]
    ranks.append((0, 1, 2, 3) if w_first else (1, 0, 2, 3))
    return new, Branching.from_ranks(new, ranks)


@dataclass
class ArchConfiguration:
    """A branched 1-4 move at ``tet`` of ``(base, base_deco)`` (new vertex
    a pit) followed by an arch at ``marking``."""
    base: object
    base_deco: Branching
    tet: int
    marking: ArchMarking
    tri: object
    deco: Branching
    region: frozenset        # tetrahedra of ``tri`` made by the 1-4 move and the arch
    anchors: dict            # tet of ``base`` -> same tet (same labels) in ``tri``
    w_first: bool = True
    transit: object = field(default=None, repr=False)


def star_marking(rw, b, x, y):
    """The admissible marking of a 1-4 rewrite ``rw`` whose triangle joins
    the new vertex to the old edge ``x y`` of the subdivided tetrahedron."""
    t1 = rw.tri
    f, g = [z for z in range(4) if z not in (x, y)]
    A = rw.new_tets[f]
    F = t1.skeleta.face_of[(A, g)]
    head = y if b.ranks(A)[y] > b.ranks(A)[x] else x
    v = t1.skeleta.vertex_of[(A, f)]
    return ArchMarking(v, F, edge_class(t1, A, head, f)[0])


def bubble_arch(tri, b: Branching, tet, *, edge=None, marking=None, w_first=True):
    """Branched 1-4 at ``tet`` followed by an admissible arch.  The marked
    triangle is given by an old edge ``(x, y)`` of ``tet`` (default: the
    first admissible marking) or directly by ``marking``."""
    outs = [t for t in mv.enhance_positive(tri, Move("M14", (tet,)), b) if _new_vertex_pit(t)]
    if not outs:
        raise InvalidConfiguration("no branched 1-4 move with a pit at this tetrahedron")
    t = outs[0]
    t1, b1 = t.tri_after, t.after
    if marking is None:
        if edge is not None:
            marking = star_marking(t.rewrite, b1, *edge)
        else:
            v = t1.skeleta.vertex_of[(t.rewrite.new_tets[0], 0)]
            marking = next(m for m in arch_markings(t1, v) if arch_admissible(t1, b1, m))
    t2, b2 = insert_arch(t1, b1, marking, w_first=w_first)
    region = frozenset(t.rewrite.new_tets) | {t2.n_tets - 1}
    anchors = {i: k for i, k in t.rewrite.old_to_new.items()}
    return ArchConfiguration(tri, b, tet, marking, t2, b2, region, anchors, w_first, t)


# --------------------------------------------------------------------------
# bounded search for local ideal paths

def local_moves(tri, region, interior=False):
    """Ideal move sites touching the tetrahedra in ``region`` (with
    ``interior``, only sites made of region tetrahedra)."""
    sk = tri.skeleta
    near = all if interior else any
    out = []
    for F, fc in enumerate(sk.faces):
        if near(s[0] in region for s in fc.sides):
            out.append(Move("M23", (F,)))
    for e, ec in enumerate(sk.edges):
        if ec.valence == 3 and near(s[0] in region for s in ec.link):
            out.append(Move("M32", (e,)))
    for u in sorted(region):
        for f1 in range(4):
            for f2 in range(f1 + 1, 4):
                out.append(Move("M20Q", (u, f1, f2)))
    for e, ec in enumerate(sk.edges):
        link, val = ec.link, ec.valence
        for p in range(val):
            for q in range(p + 1, val):
                ts = (link[p][0], link[q][0], link[(p + 1) % val][0], link[(q + 1) % val][0])
                if near(x in region for x in ts):
                    out.append(Move("M02Q", (e, p, q)))
    return out


_DELTA = {"M23": 1, "M32": -1, "M02Q": 2, "M20Q": -2}


def _reaches(goal, tri, anchors):
    if tri.n_tets != goal.n_tets:
        return None
    for g, c in anchors.items():
        return seeded_isomorphism(goal, tri, g, c)
    for b0 in range(tri.n_tets):
        for perm in PERMS4:
            iso = seeded_isomorphism(goal, tri, 0, b0, perm)
            if iso is not None:
                return iso
    return None


def ideal_paths(start, region, goal, anchors, *, max_depth=5, budget=50000, pattern=None,
                interior=False):
    """Naked ideal paths from ``start`` to a copy of ``goal`` using moves
    near ``region``, shortest first.  ``anchors`` maps tetrahedra of
    ``goal`` to untouched copies in ``start``.  Yields lists of moves;
    raises :class:`BudgetExceeded` once ``budget`` rewrites are spent."""
    spent = 0

    def dfs(tri, reg, anc, path, left):
        nonlocal spent
        if left == 0:
            if _reaches(goal, tri, anc) is not None:
                yield list(path)
            return
        kinds = [pattern[len(path)]] if pattern else None
        for m in local_moves(tri, reg, interior):
            if kinds and m.kind not in kinds:
                continue
            n = tri.n_tets + _DELTA[m.kind]
            if abs(n - goal.n_tets) > 2 * (left - 1):
                continue
            spent += 1
            if spent > budget:
                raise BudgetExceeded(f"local ideal search exceeded {budget} rewrites")
            try:
                rw = mv.rewrite(tri, m)
            except InvalidSite:
                continue
            anc2 = {g: rw.old_to_new[c] for g, c in anc.items() if c in rw.old_to_new}
            if anchors and not anc2:
                continue
            reg2 = {rw.old_to_new[r] for r in reg if r in rw.old_to_new} | set(rw.new_tets)
            path.append(m)
            yield from dfs(rw.tri, reg2, anc2, path, left - 1)
            path.pop()

    depths = [len(pattern)] if pattern else range(1, max_depth + 1)
    for depth in depths:
        if abs(start.n_tets - goal.n_tets) > 2 * depth:
            continue
        yield from dfs(start, set(region), dict(anchors), [], depth)


def decorate_path(tri, deco, path, goal, goal_deco, anchors, memo=None):
    """Enhancement choices making the naked ``path`` a decorated path from
    ``(tri, deco)`` to a copy of ``(goal, goal_deco)``: a list of
    ``(Step, transit)``, or None.  ``memo`` caches the decorated
    transits of shared prefixes between calls."""
    memo = {} if memo is None else memo

    def transits(t, d, key):
        if key in memo:
            return memo[key]
        m = key[-1][0]
        if m.positive:
            try:
                outs = list(enumerate(mv.enhance_positive(t, m, d)))
            except InvalidSite:
                outs = []
        else:
            res = mv.enhance_negative(t, m, d)
            outs = [(0, res)] if res else []
        memo[key] = outs
        return outs

    def rec(t, d, anc, k, key=()):
        if k == len(path):
            if t.n_tets != goal.n_tets:
                return None
            seeds = list(anc.items())[:1]
            return [] if decorated_isomorphism(goal, goal_deco, t, d, seeds) is not None else None
        m = path[k]
        for choice, tr in transits(t, d, key + ((m, None),)):
            rw = tr.rewrite
            anc2 = {g: rw.old_to_new[c] for g, c in anc.items() if c in rw.old_to_new}
            rest = rec(tr.tri_after, tr.after, anc2, k + 1, key + ((m, choice),))
            if rest is not None:
                return [(Step(m, choice), tr)] + rest
        return None

    return rec(tri, deco, dict(anchors), 0)


# the published move list for undoing an arch
TRANSCRIBED_UNDO = ("M32", "M32", "M23", "M23", "M20Q")


def undo_bubble_arch(cfg: ArchConfiguration, *, max_depth=5, budget=50000) -> MoveSequence:
    """Ideal decorated moves from the arch configuration back to a copy of
    the branched tetrahedron before the 1-4 move.

    The published move list is tried first; when it does not
    replay (its net change of -2 tetrahedra cannot cancel the +4 of the
    1-4 move and the arch) a bounded ideal search local to the
    configuration supplies the path.  The notes say which one was used."""
    if not isinstance(cfg, ArchConfiguration):
        raise InvalidConfiguration("expected an ArchConfiguration")
    if cfg.tri.n_tets != cfg.base.n_tets + 4:
        raise InvalidConfiguration("not a 1-4 move followed by one arch")
    goal, gdeco = cfg.base, cfg.base_deco
    anchors = {g: c for g, c in cfg.anchors.items()}
    notes = []

    memo = {}

    def attempt(pattern, interior):
        for path in ideal_paths(cfg.tri, cfg.region, goal, anchors, max_depth=max_depth,
                                budget=budget, pattern=pattern, interior=interior):
            dec = decorate_path(cfg.tri, cfg.deco, path, goal, gdeco, anchors, memo)
            if dec is not None:
                return dec
        return None

    dec = None
    if sum(_DELTA[k] for k in TRANSCRIBED_UNDO) == goal.n_tets - cfg.tri.n_tets:
        dec = attempt(TRANSCRIBED_UNDO, False)
    if dec is None:
        notes.append("transcribed sequence " + " ".join(TRANSCRIBED_UNDO) + " does not replay")
        dec = attempt(None, True) or attempt(None, False)
        if dec is None:
            raise ReplayError("no local ideal path undoes the arch within the search bounds")
        notes.append("fallback: bounded ideal search, path " + " ".join(s.move.kind for s, _ in dec))
    else:
        notes.append("transcribed sequence")
    seq = MoveSequence(cfg.tri, cfg.deco, [s for s, _ in dec], signature(cfg.tri, cfg.deco),
                       signature(dec[-1][1].tri_after, dec[-1][1].after), notes)
    seq.transits = [t for _, t in dec]
    return seq


# --------------------------------------------------------------------------
# the ideal pipeline

@dataclass
class IdealRefinement:
    ref: object              # reference refined triangulation (1-4 moves and arches applied directly)
    ref_deco: Branching
    tri: object              # state reached by ideal moves
    deco: Branching
    iso: tuple               # ref -> tri
    sequence: MoveSequence
    original_edges: dict     # edge class of the input -> edge class of ``ref``
    transits: list = field(default_factory=list, repr=False)


def _arch_macro(bld, cfg, iso):
    """Ideal moves taking ``bld``'s state (identified with ``cfg.base`` by
    ``iso``) to a copy of the arch configuration; returns the isomorphism
    ``cfg.tri -> new state``."""
    undo = undo_bubble_arch(cfg)
    end = undo.transits[-1]
    anc = {g: c for g, c in cfg.anchors.items()}
    for tr in undo.transits:
        rw = tr.rewrite
        anc = {g: rw.old_to_new[c] for g, c in anc.items() if c in rw.old_to_new}
    to_base = decorated_isomorphism(end.tri_after, end.after, cfg.base, cfg.base_deco,
                                    [(c, g) for g, c in anc.items()][:1])
    if to_base is None:
        raise ReplayError("arch undo did not return to the base configuration")
    return _walk_back(bld, undo.transits, iso_compose(to_base, iso)), undo


def refine_two_step_ideal(tri, b: Branching, agree) -> IdealRefinement:
    """The two-step refinement with every 1-4 move replaced by the ideal
    moves building the same star with an arch attached.

    Markings follow a rule both twins can share: a first-stage triangle
    joins the new vertex to the first edge of the tetrahedron whose edge
    class lies in ``agree`` (edges oriented alike by the two branchings
    being connected); a second-stage triangle joins the new vertex to a
    first-stage edge, never to an edge of the input."""
    bld = _Builder(tri, b)
    ref, rdeco = tri, b
    iso = identity_iso(tri)
    n = tri.n_tets
    tets = list(range(n))
    sides = [fc.sides[0] for fc in tri.skeleta.faces]
    edges = {e: [e] for e in range(tri.n_edges)}
    notes = []

    def follow(rw):
        nonlocal tets, sides, edges
        tets = [rw.old_to_new[i] for i in tets if i in rw.old_to_new]
        sides = [side_forward(rw, s) for s in sides]
        edges = {e: [x for y in ys for x in edge_forward(rw, y)] for e, ys in edges.items()}

    def arch_at(i, xy):
        nonlocal ref, rdeco, iso
        cfg = bubble_arch(ref, rdeco, i, edge=xy)
        iso, undo = _arch_macro(bld, cfg, iso)
        if undo.notes and undo.notes[-1] not in notes:
            notes.append(undo.notes[-1])
        follow(cfg.transit.rewrite)
        ref, rdeco = cfg.tri, cfg.deco

    # stage 1: original tetrahedra keep their labels until subdivided
    for orig in range(n):
        i = tets.pop(0)
        xy = next(((x, y) for x in range(4) for y in range(x + 1, 4)
                   if edge_class(tri, orig, x, y)[0] in agree), None)
        if xy is None:
            raise MarkingFailure(f"no edge of tetrahedron {orig} is oriented alike by both branchings")
        arch_at(i, xy)
    # stage 2: the side of each original face, whose apex is a first-stage vertex
    qsides = []
    for k in range(len(sides)):
        i, f = sides[k]
        x = min(z for z in range(4) if z != f)
        arch_at(i, (min(f, x), max(f, x)))
        qsides.append(sides[k])
    # stage 3: kill the original faces, orienting the new edge towards the
    # second-stage apex
    for k in range(len(sides)):
        F = ref.skeleta.face_of[sides[k]]
        (i, f), _ = ref.skeleta.faces[F].sides
        qi = (i, f) == qsides[k]
        move = Move("M23", (F,))
        tr = next((t for t in mv.enhance_positive(ref, move, rdeco)
                   if (t.after.orientation(t.rewrite.new_tets[0], 0, 1) > 0) != qi), None)
        if tr is None:
            raise ReplayError("no enhancement of the killing 2-3 move")
        iso = _mirror(bld, tr, iso)
        follow(tr.rewrite)
        ref, rdeco = tr.tri_after, tr.after
    seq = bld.finish()
    seq.notes = notes
    out_edges = {}
    for e, ys in edges.items():
        if len(ys) != 1:
            raise ReplayError("original edge did not persist")
        out_edges[e] = ys[0]
    return IdealRefinement(ref, rdeco, bld.tri, bld.deco, iso, seq, out_edges, bld.transits)


@lru_cache(maxsize=64)
def _refined_ideal(tri, b, agree):
    # refinements are shared by every pair with the same twin markings
    return refine_two_step_ideal(tri, b, agree)


@lru_cache(maxsize=64)
def _refined(tri, b):
    return refine_two_step(tri, b)


def _agreement(tri, b, b2):
    return {e for e in range(tri.n_edges) if b.bits[e] == b2.bits[e]}


def _marking_route(tri, b, b2):
    """Branchings ``b = c0, c1, ..., b2`` where consecutive ones orient
    some edge of every tetrahedron alike (so twin markings exist)."""
    def ok(x, y):
        agree = _agreement(tri, x, y)
        return all(any(edge_class(tri, i, u, v)[0] in agree for u in range(4) for v in range(u + 1, 4))
                   for i in range(tri.n_tets))
    if ok(b, b2):
        return [b, b2]
    allb = enumerate_branchings(tri)
    prev = {b.bits: None}
    queue = deque([b])
    while queue:
        x = queue.popleft()
        for y in allb:
            if y.bits not in prev and ok(x, y):
                prev[y.bits] = x
                if y.bits == b2.bits:
                    route = [y]
                    while prev[route[-1].bits] is not None:
                        route.append(prev[route[-1].bits])
                    return route[::-1]
                queue.append(y)
    return None


def _connect_ideal_direct(bld, tri, b, b2):
    agree = frozenset(_agreement(tri, b, b2))
    r1 = _refined_ideal(tri, b, agree)
    r2 = _refined_ideal(tri, b2, agree)
    if r1.ref.gluings != r2.ref.gluings:
        raise ReplayError("twin refinements differ as naked triangulations")
    orig = set(r1.original_edges.values())
    if any(e not in orig and r1.ref_deco.bits[e] != r2.ref_deco.bits[e] for e in range(r1.ref.n_edges)):
        raise ReplayError("twin refinements disagree off the original edges")
    if bld.tri.gluings == tri.gluings and bld.deco == b:
        bld.extend_transits(r1.sequence, r1.transits)
        iso = r1.iso
    else:
        # a relabelled copy of (tri, b): repeat the refinement move by move
        start = decorated_isomorphism(tri, b, bld.tri, bld.deco)
        iso = start
        for tr in r1.transits:
            iso = _mirror(bld, tr, iso)
        iso = iso_compose(r1.iso, iso)
    ref, cur = r1.ref, r1.ref_deco
    todo = [e for e in sorted(orig) if cur.bits[e] != r2.ref_deco.bits[e]]
    while todo:
        for e in todo:
            here = map_edge(ref, bld.tri, iso, e)
            if is_good_ambiguous(bld.tri, bld.deco, here):
                break
        else:
            raise ReplayError("no remaining edge is good ambiguous")
        inv = expand_good_inversion(bld.tri, bld.deco, here)
        bld.extend(inv)
        cur = cur.inverted(e)
        todo.remove(e)
        iso = decorated_isomorphism(ref, cur, bld.tri, bld.deco)
        if iso is None:
            raise ReplayError("inversion left the refined triangulation")
    iso = iso_compose(iso_inverse(r2.iso), iso)
    _walk_back(bld, r2.transits, iso)
    return r1.sequence.notes + r2.sequence.notes


def connect_ideal(tri, b: Branching, b2: Branching) -> MoveSequence:
    """Ideal moves only from ``(tri, b)`` to ``(tri, b2)``.

    Every 1-4 move of the completed plan is replaced by ideal moves
    producing its star with an arch attached, the twins on both sides
    carrying the same marking.  When ``b`` and ``b2`` orient every edge of
    some tetrahedron oppositely no common first-stage marking exists; the
    connection is then routed through intermediate branchings (recorded
    in the notes)."""
    bld = _Builder(tri, b)
    if b == b2:
        return bld.finish()
    route = _marking_route(tri, b, b2)
    if route is None:
        raise MarkingFailure("no chain of branchings admits twin markings")
    notes = []
    if len(route) > 2:
        notes.append("routed through " + ", ".join(str(c) for c in route[1:-1]))
    for x, y in zip(route, route[1:]):
        for note in _connect_ideal_direct(bld, tri, x, y):
            if note not in notes:
                notes.append(note)
        if signature(bld.tri, bld.deco) != signature(tri, y):
            raise ReplayError("ideal connection ends at the wrong branching")
    seq = bld.finish()
    seq.notes = notes
    if not seq.ideal:
        raise ReplayError("non-ideal move in the ideal connection")
    return seq


# --------------------------------------------------------------------------
# exploring restricted transit graphs

RELATIONS = ("full-b", "sliding", "na", "pb", "naked")


def _jsonable(x):
    if isinstance(x, dict):
        items = [[_jsonable(k), _jsonable(v)] for k, v in x.items()]
        return sorted(items, key=repr)
    if isinstance(x, (frozenset, set)):
        return sorted((_jsonable(v) for v in x), key=repr)
    if isinstance(x, (tuple, list)):
        return [_jsonable(v) for v in x]
    return x


def _freeze(x):
    """Hashable, order-independent form of a fingerprint."""
    return repr(_jsonable(x))


def transit_class(tr):
    """Class of a branched ideal transit: Bump, NonAmbiguous,
    ForcedAmbiguous or AmbiguousSliding.  Negative moves are classified
    by the positive move that undoes them."""
    kind = tr.move.kind
    if kind == "M23":
        return mv.classify_23(tr.tri_before, tr.before, tr.move).cls
    if kind == "M02Q":
        return mv.classify_02q(tr.tri_before, tr.before, tr.move).cls
    rw = tr.rewrite
    if kind == "M32":
        return mv.classify_23(tr.tri_after, tr.after, rw.inverse).cls
    if kind == "M20Q":
        for m in mv.pillow_sites(rw):
            try:
                outs = mv.enhance_positive(tr.tri_after, m, tr.after)
            except InvalidSite:
                continue
            for t in outs:
                if t.tri_after.n_tets == tr.tri_before.n_tets and mv.same_decorated(
                        t.tri_after, t.after, tr.tri_before, tr.before):
                    return mv.classify_02q(tr.tri_after, tr.after, m).cls
        raise InvalidSite("no 0-2 move restores the pillow")
    raise InvalidSite(f"{kind} transits are not classified")


def _h1_fingerprint(tri):
    from .invariants.spine import spine_complex

    h1 = spine_complex(tri).homology_z.H1
    return ("H1", tuple(h1.torsion), h1.rank)


def state_fingerprint(tri, deco, relation):
    """The invariant the relation must preserve."""
    if relation == "pb":
        from .invariants.omega import class_invariant, omega_class
        return class_invariant(omega_class(tri, deco))
    if relation in ("sliding", "na"):
        from .invariants.boundary import fingerprint
        fp = fingerprint(tri, deco)
        if relation == "sliding":
            return fp
        from .kernel import boundary_surface
        chis = tuple(sorted(c.euler for c in boundary_surface(tri).components))
        return (fp, chis)
    return _h1_fingerprint(tri)


def _allowed(tr, relation):
    if relation == "sliding":
        return transit_class(tr) != "Bump"
    if relation == "na":
        return transit_class(tr) == "NonAmbiguous"
    return True


def _expand(tri, deco, relation, max_tets):
    """Every allowed transit out of a state: (Step, tri, deco)."""
    out = []
    for kind in mv.IDEAL_KINDS:
        positive = kind in ("M23", "M02Q")
        if positive and max_tets is not None and tri.n_tets >= max_tets:
            continue
        for m in mv.enumerate_sites(tri, kind):
            if deco is None:
                try:
                    out.append((Step(m), mv.apply(tri, m), None))
                except InvalidSite:
                    pass
                continue
            try:
                if positive:
                    trs = [(k, t) for k, t in enumerate(mv.enhance_positive(tri, m, deco))]
                else:
                    t = mv.enhance_negative(tri, m, deco)
                    trs = [(0, t)] if t else []
            except InvalidSite:
                continue
            for k, t in trs:
                if _allowed(t, relation):
                    out.append((Step(m, k), t.tri_after, t.after))
    return out


@dataclass
class ExploreResult:
    relation: str
    states: dict          # signature -> {"fingerprint", "depth", "root"}
    parent: dict          # signature -> (parent signature, Step) on the spanning forest
    starts: list          # (tri, deco, signature) per start
    roots: dict           # start signature -> component root
    n_edges: int = 0
    exhausted: bool = False
    budget_exceeded: bool = False
    fingerprints: dict = field(default_factory=dict)   # signature -> raw fingerprint

    def component_of(self, sig):
        return self.roots[self.states[sig]["root"]]

    @property
    def components(self):
        comps = {}
        for sig, st in self.states.items():
            comps.setdefault(self.roots[st["root"]], []).append(sig)
        out = []
        for root, sigs in sorted(comps.items()):
            fps = {self.states[s]["fingerprint"] for s in sigs}
            out.append({"fingerprint": _jsonable(self.fingerprints[root]), "size": len(sigs),
                        "representative_signature": root, "constant": len(fps) == 1})
        return out

    def path(self, sig) -> MoveSequence:
        """Connecting sequence from the start of the tree containing ``sig``."""
        steps = []
        cur = sig
        while self.parent.get(cur) is not None:
            cur, step = self.parent[cur]
            steps.append(step)
        steps.reverse()
        tri, deco = next((t, d) for t, d, s in self.starts if s == cur)
        return MoveSequence(tri, deco, steps, cur, sig)

    def to_json(self):
        return {"relation": self.relation,
                "components": [{k: c[k] for k in ("fingerprint", "size", "representative_signature")}
                               for c in self.components],
                "edges": self.n_edges, "exhausted": self.exhausted,
                "budget_exceeded": self.budget_exceeded}


def explore(tri, decoration, relation="full-b", depth=8, budget=100000, *, max_tets=None,
            workers=None) -> ExploreResult:
    """Breadth-first search of the graph of ideal transits allowed by
    ``relation``, deduplicated by decorated signature.

    ``decoration`` may be a list of decorations on ``tri``; each starts a
    tree of the spanning forest and trees that meet are merged into one
    component.  Merging two states with different fingerprints raises
    AssertionError.  Running out of ``budget`` states raises
    BudgetExceeded carrying the partial result."""
    from concurrent.futures import ThreadPoolExecutor

    if relation == "full":
        relation = "full-b"
    if relation not in RELATIONS:
        raise ValueError(f"unknown relation {relation!r}")
    decos = decoration if isinstance(decoration, (list, tuple)) else [decoration]
    if relation == "naked":
        decos = [None]
    if relation == "pb":
        if not all(isinstance(d, PreBranching) for d in decos):
            raise TypeError("relation pb needs pre-branchings")
    elif relation != "naked" and not all(isinstance(d, Branching) for d in decos):
        raise TypeError(f"relation {relation} needs branchings")

    res = ExploreResult(relation, {}, {}, [], {})
    root_of = {}  # union-find over tree roots

    def find(r):
        while root_of[r] != r:
            root_of[r] = root_of[root_of[r]]
            r = root_of[r]
        return r

    def visit(t, d, sig, dep, root, par):
        fp = state_fingerprint(t, d, relation)
        res.states[sig] = {"fingerprint": _freeze(fp), "depth": dep, "root": root}
        res.fingerprints[sig] = fp
        res.parent[sig] = par

    frontier = []
    for d in decos:
        sig = signature(tri, d)
        res.starts.append((tri, d, sig))
        if sig in res.states:
            continue
        root_of[sig] = sig
        visit(tri, d, sig, 0, sig, None)
        frontier.append((tri, d, sig))

    seen_edges = set()
    closed = True
    pool = ThreadPoolExecutor(workers) if workers != 1 else None
    try:
        for level in range(depth):
            if not frontier:
                break
            jobs = [(t, d, relation, max_tets) for t, d, _ in frontier]
            if pool is None:
                expanded = [_expand(*j) for j in jobs]
            else:
                expanded = list(pool.map(lambda j: _expand(*j), jobs))
            nxt = []
            # merged one state at a time, in frontier order
            for (t, d, sig), outs in zip(frontier, expanded):
                here = res.states[sig]
                for step, t2, d2 in outs:
                    sig2 = signature(t2, d2)
                    key = (sig, sig2) if sig <= sig2 else (sig2, sig)
                    if key not in seen_edges:
                        seen_edges.add(key)
                        res.n_edges += 1
                    if sig2 in res.states:
                        there = res.states[sig2]
                        if there["fingerprint"] != here["fingerprint"]:
                            raise AssertionError(
                                f"{relation} transit joins states with different fingerprints")
                        a, b = find(here["root"]), find(there["root"])
                        if a != b:
                            root_of[max(a, b)] = min(a, b)
                        continue
                    if len(res.states) >= budget:
                        res.budget_exceeded = True
                        closed = False
                        break
                    visit(t2, d2, sig2, level + 1, here["root"], (sig, step))
                    nxt.append((t2, d2, sig2))
                if res.budget_exceeded:
                    break
            if res.budget_exceeded:
                break
            frontier = nxt
        else:
            if frontier:
                closed = False
    finally:
        if pool is not None:
            pool.shutdown()
    for r in root_of:
        res.roots[r] = find(r)
    res.exhausted = closed and not frontier
    if res.budget_exceeded:
        raise BudgetExceeded(f"explore stopped after {budget} states", res)
    return res


def make_branchable(tri, *, budget=2000):
    """Positive 2-3 moves until the triangulation carries a branching.
    Returns ``(T', MoveSequence)``."""
    start = signature(tri)
    queue = deque([(tri, [])])
    seen = {start}
    while queue:
        t, steps = queue.popleft()
        if enumerate_branchings(t):
            return t, MoveSequence(tri, None, steps, start, signature(t))
        for m in mv.enumerate_sites(t, "M23"):
            try:
                t2 = mv.apply(t, m)
            except InvalidSite:
                continue
            sig = signature(t2)
            if sig in seen:
                continue
            if len(seen) >= budget:
                raise BudgetExceeded(f"no branchable triangulation within {budget} states")
            seen.add(sig)
            queue.append((t2, steps + [Step(m)]))
    raise BudgetExceeded("2-3 moves exhausted without a branching")
