"""
Homology class of a pre-branching, its evenness, and the reconstruction of
a branching from a pre-branching with vanishing class.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import gcd

from .. import snf
from ..decor import Branching, DecorationError, PreBranching, induced_prebranching
from ..kernel import orient, perm_sign
from .spine import spine_complex


class NotFound(LookupError):
    pass


@dataclass(frozen=True)
class OmegaClass:
    coordinates: tuple     # SNF coordinates in H1(M; Z)
    torsion: tuple         # orders of the torsion coordinates, then 0 for free ones
    mod2_zero: bool
    alpha: tuple | None    # coordinates with 2 alpha = [omega]
    alpha_chain: tuple | None
    witness: tuple | None  # 2-chain x with omega - 2 alpha_chain = d2 x

    @property
    def is_zero(self):
        return not any(self.coordinates)

    @property
    def even(self):
        return self.witness is not None

    def as_json(self):
        return {"coordinates": list(self.coordinates), "orders": list(self.torsion),
                "zero": self.is_zero, "mod2_zero": self.mod2_zero,
                "alpha": None if self.alpha is None else list(self.alpha), "even": self.even}


def omega_chain(w: PreBranching):
    return list(w.chain())


def _half(c, d):
    """Some ``a`` with ``2a = c`` in Z/d (``d == 0`` meaning Z), or None."""
    if d == 0:
        return c // 2 if c % 2 == 0 else None
    if d % 2:
        return (c * (d + 1) // 2) % d
    return c // 2 if c % 2 == 0 else None


def omega_class(tri, w: PreBranching) -> OmegaClass:
    cx = spine_complex(tri)
    h = cx.homology_z
    chain = omega_chain(w)
    coords = h.h1_coordinates(chain)
    orders = tuple(h.H1.torsion) + (0,) * h.H1.rank
    d2 = [list(r) for r in cx.d2]
    x2, _ = snf.solve_mod2(d2, chain, tri.n_edges)
    mod2_zero = x2 is not None
    alpha = tuple(_half(c, d) for c, d in zip(coords, orders))
    alpha_chain = witness = None
    if all(a is not None for a in alpha):
        gens = h.H1.generators
        alpha_chain = tuple(sum(a * g[f] for a, g in zip(alpha, gens)) for f in range(tri.n_faces))
        rest = [c - 2 * a for c, a in zip(chain, alpha_chain)]
        x, _ = snf.solve_integer(d2, rest, tri.n_edges)
        if x is not None:
            witness = tuple(x)
    else:
        alpha = None
    return OmegaClass(coords, orders, mod2_zero, alpha, alpha_chain, witness)


def _region_hand(tri, eps):
    out = []
    for e in tri.skeleta.edges:
        i, a, b, c, d = e.link[0]
        out.append(eps[i] * perm_sign((a, b, d, c)))
    return out


def branching_from_region_signs(tri, signs, eps=None) -> Branching:
    """Inverse of :func:`decor.region_signs`."""
    if eps is None:
        eps = orient(tri)
    hand = _region_hand(tri, eps)
    bits = tuple(0 if s * h > 0 else 1 for s, h in zip(signs, hand))
    return Branching(tri, bits)


def branching_from_prebranching(tri, w: PreBranching, max_search=6) -> Branching:
    """A branching ``b`` with ``omega_b == w``, found by solving
    ``w = d2 beta`` over Z and taking signs of an all-odd solution."""
    from ..decor import validate_branching

    cx = spine_complex(tri)
    d2 = [list(r) for r in cx.d2]
    chain = omega_chain(w)
    ne = tri.n_edges
    x0, kernel = snf.solve_integer(d2, chain, ne)
    if x0 is None:
        raise NotFound("pre-branching is not a boundary: [omega] != 0")
    # all-odd solutions: x0 + sum k_i z_i with the parity fixed over GF(2)
    kt = [[z[e] for z in kernel] for e in range(ne)]
    target = [(1 - x) & 1 for x in x0]
    k2, _ = snf.solve_mod2(kt, target, len(kernel)) if kernel else (([] if all(t == 0 for t in target) else None), None)
    if k2 is None:
        raise NotFound("parity obstruction: every solution has an even coefficient")
    eps = orient(tri)
    tries = [k2]
    if kernel and len(kernel) <= max_search:
        tries += [[k + 2 * s for k, s in zip(k2, shift)]
                  for shift in product((-1, 0, 1), repeat=len(kernel))]
    for k in tries:
        beta = [x0[e] + sum(c * z[e] for c, z in zip(k, kernel)) for e in range(ne)]
        if any(v % 2 == 0 for v in beta):
            continue
        b = branching_from_region_signs(tri, [1 if v > 0 else -1 for v in beta], eps)
        try:
            validate_branching(tri, b.bits)
        except DecorationError:
            continue
        if induced_prebranching(tri, b, eps) == w:
            return b
    raise NotFound("no odd solution gives a branching")


# --------------------------------------------------------------------------
# comparing classes across moves

def _traverse(tri, side):
    """Signed spine edge crossed leaving ``side = (tet, face)`` through
    its face, and the tetrahedron reached."""
    a, h = side
    b, p = tri.gluings[a][h]
    fc = tri.skeleta.faces[tri.skeleta.face_of[side]]
    return fc.index, (1 if fc.sides[0] == (b, p[h]) else -1), b


def _path(tri, region, start, end, inner=None):
    """Signed spine edges of a path from ``start`` to ``end`` through
    faces between tetrahedra of ``region`` (only the sides in ``inner``,
    when given)."""
    if start == end:
        return []
    prev = {start: None}
    queue = [start]
    while queue:
        x = queue.pop(0)
        for f in range(4):
            if inner is not None and (x, f) not in inner:
                continue
            F, s, y = _traverse(tri, (x, f))
            if y in region and y not in prev:
                prev[y] = (x, F, s)
                if y == end:
                    out = []
                    while prev[y] is not None:
                        x0, F0, s0 = prev[y]
                        out.append((F0, s0))
                        y = x0
                    return out[::-1]
                queue.append(y)
    raise ValueError("region is not connected")


def pushforward(rw, chain):
    """Image of a spine 1-chain under the map induced by the rewrite
    ``rw``: destroyed tetrahedra collapse onto one new tetrahedron, outer
    sides of the region follow the new faces that replace them.
    Only for moves that create tetrahedra."""
    old, new = rw.before, rw.tri
    if not rw.new_tets:
        raise ValueError("the move creates no tetrahedra")
    region = set(rw.new_tets)
    n0 = rw.new_tets[0]
    side_img, inner = {}, set()
    for (k, x), (kind, src) in rw.face_src.items():
        if kind == "old":
            side_img[src] = (rw.new_tets[k], x)
        elif kind == "new":
            inner.add((rw.new_tets[k], x))

    def centre(t):
        return rw.old_to_new.get(t, n0)

    def image(t, f):
        if t in rw.old_to_new:
            return (rw.old_to_new[t], f)
        return side_img.get((t, f))

    def walk(a, b):
        # only through faces created by the move, so the choice of
        # path does not matter up to boundaries
        return _path(new, region, a, b, inner)

    out = [0] * new.n_faces
    for fc in old.skeleta.faces:
        c = chain[fc.index]
        if not c:
            continue
        (i, f), (j, g) = fc.sides      # the edge runs from j into i
        A, B = image(j, g), image(i, f)
        if A is None or B is None:
            # a face inside the region: both centres are n0
            legs = walk(centre(j), centre(i))
        else:
            legs = walk(centre(j), A[0])
            F, s, x = _traverse(new, A)
            legs.append((F, s))
            k, p = new.gluings[B[0]][B[1]]
            if (k, p[B[1]]) != A:
                legs += walk(x, k)
                F2, s2, _ = _traverse(new, B)
                legs.append((F2, -s2))
            legs += walk(B[0], centre(i))
        for F, s in legs:
            out[F] += c * s
    return out


def iso_pushforward(t1, t2, iso, chain):
    """A spine 1-chain of ``t1`` carried to ``t2`` by an isomorphism."""
    tmap, vmap = iso
    out = [0] * t2.n_faces
    for fc in t1.skeleta.faces:
        i, f = fc.sides[0]
        side = (tmap[i], vmap[i][f])
        F2 = t2.skeleta.face_of[side]
        out[F2] += chain[fc.index] * (1 if t2.skeleta.faces[F2].sides[0] == side else -1)
    return out


def class_invariant(om: OmegaClass):
    """Invariants of ``[omega]`` under automorphisms of H1: whether it is
    zero, its order, and for which k it lies in k H1."""
    orders = om.torsion
    coords = om.coordinates
    if any(c and d == 0 for c, d in zip(coords, orders)):
        order = 0
    else:
        order = 1
        for c, d in zip(coords, orders):
            if d:
                k = d // gcd(c, d)
                order = order * k // gcd(order, k)
    bound = 2 * max([abs(c) for c in coords] + [d for d in orders] + [2])
    div = tuple(k for k in range(2, bound + 1)
                if all((c % (gcd(k, d) if d else k)) == 0 for c, d in zip(coords, orders)))
    return (om.is_zero, order, div)


def transit_classes(tr):
    """``(pushed, actual)`` SNF coordinates for a pre-branched transit:
    the class carried across the move and the class computed afresh.
    A 2-0 move is compared backwards through a 0-2 move restoring the
    removed pillow."""
    from .. import moves as mv
    from ..kernel import seeded_isomorphism

    rw = tr.rewrite
    if rw.new_tets:
        h = spine_complex(tr.tri_after).homology_z
        pushed = h.h1_coordinates(pushforward(rw, list(tr.before.chain())))
        return pushed, h.h1_coordinates(list(tr.after.chain()))
    before, after = tr.tri_before, tr.tri_after
    back = {new: old for old, new in rw.old_to_new.items()}
    for m in mv.pillow_sites(rw):
        try:
            rw2 = mv.rewrite(after, m)
        except mv.InvalidSite:
            continue
        seeds = [(back[k], k2) for k, k2 in rw2.old_to_new.items() if k in back][:1]
        if not seeds:
            continue
        iso = seeded_isomorphism(rw2.tri, before, seeds[0][1], seeds[0][0])
        if iso is None:
            continue
        for d in mv.transport(rw2, tr.after):
            if not mv.decoration_matches(rw2.tri, d, before, tr.before, iso):
                continue
            h = spine_complex(before).homology_z
            chain = iso_pushforward(rw2.tri, before, iso, pushforward(rw2, list(tr.after.chain())))
            return h.h1_coordinates(chain), h.h1_coordinates(list(tr.before.chain()))
    raise ValueError("no 0-2 move restores the removed pillow")
