"""
Branchings and pre-branchings on a triangulation.

A branching orients every edge class so that each tetrahedron sees a total
order of its vertices.  A pre-branching co-orients every face class so that
each tetrahedron has two ingoing and two outgoing faces.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .kernel import (EDGES, Triangulation, edge_class, face_vertices, orient,
                     perm_inverse, perm_sign)


class DecorationError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NotAmbiguous(ValueError):
    pass


class UnknownCircuit(KeyError):
    pass


# faces of a tetrahedron as (face, (x, y, z)) with x<y<z
_FACE_EDGES = tuple(
    (f, tuple((a, b) for (a, b) in EDGES if f not in (a, b))) for f in range(4))


def _ranks_from_orientation(orient_of):
    """Given ``orient_of(a, b)`` = +1 if a->b, return ranks or ``None`` if the
    tournament has a cycle."""
    indeg = [0] * 4
    for (a, b) in EDGES:
        if orient_of(a, b) > 0:
            indeg[b] += 1
        else:
            indeg[a] += 1
    if sorted(indeg) != [0, 1, 2, 3]:
        return None
    return tuple(indeg)


def _cyclic_triangle(orient_of):
    for f, _ in _FACE_EDGES:
        x, y, z = face_vertices(f)
        s = (orient_of(x, y), orient_of(y, z), orient_of(z, x))
        if s[0] == s[1] == s[2]:
            return (x, y, z) if s[0] > 0 else (x, z, y)
    return None


@dataclass(frozen=True, eq=False)
class Branching:
    """Orientation of every edge class.

    ``bits[e] == 0`` keeps the orientation of the class representative
    ``tri.skeleta.edges[e].rep = (tet, tail, head)``; ``1`` reverses it.
    """

    tri: Triangulation
    bits: tuple
    signature_tag = "B"

    def __eq__(self, other):
        return (isinstance(other, Branching) and self.tri == other.tri
                and self.bits == other.bits)

    def __hash__(self):
        return hash((self.tri, self.bits))

    def __repr__(self):
        return f"Branching({''.join(map(str, self.bits))})"

    def orientation(self, tet, a, b):
        """+1 if the local edge ``a -> b`` of ``tet`` agrees with the branching."""
        idx, s = edge_class(self.tri, tet, a, b)
        return s * (-1 if self.bits[idx] else 1)

    def ranks(self, tet):
        """Rank (0..3) of each local vertex of ``tet``."""
        r = _ranks_from_orientation(lambda a, b: self.orientation(tet, a, b))
        if r is None:
            raise DecorationError([("CyclicTriangle", tet, None)])
        return r

    def order(self, tet):
        """Local vertices of ``tet`` listed from rank 0 to rank 3."""
        return tuple(perm_inverse(self.ranks(tet)))

    def tail_head(self, e):
        """Representative embedding ``(tet, tail, head)`` of edge class ``e``."""
        i, a, b = self.tri.skeleta.edges[e].rep
        return (i, b, a) if self.bits[e] else (i, a, b)

    def is_pit(self, tet, v):
        return self.ranks(tet)[v] == 3

    def is_source(self, tet, v):
        return self.ranks(tet)[v] == 0

    def local_code(self, tet, vmap):
        r = self.ranks(tet)
        inv = perm_inverse(vmap)
        return tuple(r[inv[y]] for y in range(4))

    def restrict(self, sub, old_to_new):
        orders = {}
        for old, new in old_to_new.items():
            orders[new] = self.ranks(old)
        return Branching.from_ranks(sub, [orders[k] for k in range(sub.n_tets)])

    def inverted(self, e):
        bits = list(self.bits)
        bits[e] ^= 1
        return Branching(self.tri, tuple(bits))

    @classmethod
    def from_ranks(cls, tri: Triangulation, ranks):
        """Build from per-tetrahedron vertex ranks, checking that they agree
        on every edge class."""
        sk = tri.skeleta
        bits = [None] * tri.n_edges
        violations = []
        for i, r in enumerate(ranks):
            for (a, b) in EDGES:
                idx, s = edge_class(tri, i, a, b)
                along = 1 if r[a] < r[b] else -1
                bit = 0 if along * s > 0 else 1
                if not sk.edges[idx].consistent:
                    violations.append(("InconsistentEdgeClass", idx))
                elif bits[idx] is None:
                    bits[idx] = bit
                elif bits[idx] != bit:
                    violations.append(("InconsistentEdgeClass", idx))
        if violations:
            raise DecorationError(sorted(set(violations)))
        return cls(tri, tuple(bits))

    def to_json(self):
        edges = []
        for e in range(self.tri.n_edges):
            i, a, b = self.tail_head(e)
            edges.append({"tet": i, "tail": a, "head": b})
        return {"format": "btw-branching/1", "edges": edges}


def validate_branching(tri: Triangulation, candidate) -> Branching:
    """Check edge orientations and return a :class:`Branching`.

    ``candidate`` is either a sequence of bits (one per edge class) or a
    sequence of ``(tet, tail, head)`` records, one per edge class.
    """
    sk = tri.skeleta
    violations = []
    bits = []
    candidate = list(candidate)
    if len(candidate) != tri.n_edges:
        raise DecorationError([("WrongLength", len(candidate), tri.n_edges)])
    for e, item in enumerate(candidate):
        if not sk.edges[e].consistent:
            violations.append(("InconsistentEdgeClass", e))
        if isinstance(item, (tuple, list, dict)):
            if isinstance(item, dict):
                item = (item["tet"], item["tail"], item["head"])
            i, a, b = item
            idx, s = edge_class(tri, i, a, b)
            if idx != e:
                violations.append(("WrongEdgeClass", e, tuple(item)))
                bits.append(0)
                continue
            bits.append(0 if s > 0 else 1)
        else:
            bits.append(int(item) & 1)
    if violations:
        raise DecorationError(violations)
    b = Branching(tri, tuple(bits))
    for i in range(tri.n_tets):
        cyc = _cyclic_triangle(lambda x, y: b.orientation(i, x, y))
        if cyc is not None:
            violations.append(("CyclicTriangle", i, cyc))
    if violations:
        raise DecorationError(violations)
    return b


def is_branching(tri, bits) -> bool:
    try:
        validate_branching(tri, bits)
    except DecorationError:
        return False
    return True


def enumerate_branchings(tri: Triangulation):
    """All branchings, in lexicographic order of their bit vectors."""
    sk = tri.skeleta
    if any(not e.consistent for e in sk.edges):
        return []
    ne = tri.n_edges
    # each face of each tetrahedron: three oriented edges, checked once all assigned
    checks = [[] for _ in range(ne)]
    for i in range(tri.n_tets):
        for f in range(4):
            x, y, z = face_vertices(f)
            cyc = [edge_class(tri, i, x, y), edge_class(tri, i, y, z), edge_class(tri, i, z, x)]
            last = max(c for c, _ in cyc)
            checks[last].append(cyc)
    out = []
    bits = [0] * ne

    def ok(k):
        for cyc in checks[k]:
            s = [sg * (-1 if bits[c] else 1) for c, sg in cyc]
            if s[0] == s[1] == s[2]:
                return False
        return True

    def rec(k):
        if k == ne:
            out.append(Branching(tri, tuple(bits)))
            return
        for v in (0, 1):
            bits[k] = v
            if ok(k):
                rec(k + 1)
        bits[k] = 0

    rec(0)
    return out


def enumerate_branchings_bruteforce(tri: Triangulation):
    """Exhaustive filter over all ``2**n_edges`` assignments (oracle)."""
    out = []
    for bits in product((0, 1), repeat=tri.n_edges):
        if is_branching(tri, bits):
            out.append(Branching(tri, tuple(bits)))
    return out


# --------------------------------------------------------------------------
# pre-branchings

@dataclass(frozen=True, eq=False)
class PreBranching:
    """Co-orientation of every face class: ``sides[F] = (tet, face)`` is the
    side the co-orientation points into."""

    tri: Triangulation
    sides: tuple
    signature_tag = "P"

    def __eq__(self, other):
        return (isinstance(other, PreBranching) and self.tri == other.tri
                and self.sides == other.sides)

    def __hash__(self):
        return hash((self.tri, self.sides))

    def __repr__(self):
        return f"PreBranching({''.join(map(str, self.bits))})"

    @property
    def bits(self):
        faces = self.tri.skeleta.faces
        return tuple(0 if s == faces[k].sides[0] else 1 for k, s in enumerate(self.sides))

    def is_in(self, tet, face):
        return self.sides[self.tri.skeleta.face_of[(tet, face)]] == (tet, face)

    def in_faces(self, tet):
        return tuple(f for f in range(4) if self.is_in(tet, f))

    def local_code(self, tet, vmap):
        inv = perm_inverse(vmap)
        return tuple(1 if self.is_in(tet, inv[y]) else 0 for y in range(4))

    def chain(self):
        """As a 1-chain on the spine: +1 where it agrees with the reference
        orientation (pointing into the first side)."""
        return tuple(1 - 2 * b for b in self.bits)

    def restrict(self, sub, old_to_new):
        flags = {}
        for old, new in old_to_new.items():
            flags[new] = tuple(self.is_in(old, f) for f in range(4))
        return PreBranching.from_flags(sub, [flags[k] for k in range(sub.n_tets)])

    def flipped(self, face_classes):
        faces = self.tri.skeleta.faces
        sides = list(self.sides)
        for k in face_classes:
            a, b = faces[k].sides
            sides[k] = b if sides[k] == a else a
        return PreBranching(self.tri, tuple(sides))

    @classmethod
    def from_bits(cls, tri, bits):
        faces = tri.skeleta.faces
        return cls(tri, tuple(faces[k].sides[b] for k, b in enumerate(bits)))

    @classmethod
    def from_flags(cls, tri, flags):
        """From per-tetrahedron in/out flags; checks each face class has one
        ingoing and one outgoing side."""
        sides = []
        violations = []
        for fc in tri.skeleta.faces:
            (i, f), (j, g) = fc.sides
            a, b = flags[i][f], flags[j][g]
            if a == b:
                violations.append(("BadFaceClass", fc.index))
                sides.append(fc.sides[0])
            else:
                sides.append((i, f) if a else (j, g))
        if violations:
            raise DecorationError(violations)
        return cls(tri, tuple(sides))

    def to_json(self):
        return {"format": "btw-pb/1",
                "faces": [{"tet": i, "face": f} for (i, f) in self.sides]}


def validate_prebranching(tri: Triangulation, candidate) -> PreBranching:
    """``candidate``: one entry per face class, either a bit (0 = first side)
    or a ``(tet, face)`` side."""
    faces = tri.skeleta.faces
    candidate = list(candidate)
    if len(candidate) != tri.n_faces:
        raise DecorationError([("WrongLength", len(candidate), tri.n_faces)])
    sides = []
    violations = []
    for k, item in enumerate(candidate):
        if isinstance(item, dict):
            item = (item["tet"], item["face"])
        if isinstance(item, (tuple, list)):
            item = tuple(item)
            if item not in faces[k].sides:
                violations.append(("WrongFaceClass", k, item))
                item = faces[k].sides[0]
            sides.append(item)
        else:
            sides.append(faces[k].sides[int(item) & 1])
    if violations:
        raise DecorationError(violations)
    pb = PreBranching(tri, tuple(sides))
    for i in range(tri.n_tets):
        n_in = len(pb.in_faces(i))
        if n_in != 2:
            violations.append(("BadDegree", i, n_in))
    if violations:
        raise DecorationError(violations)
    return pb


def is_prebranching(tri, candidate) -> bool:
    try:
        validate_prebranching(tri, candidate)
    except DecorationError:
        return False
    return True


def enumerate_prebranchings(tri: Triangulation):
    """All pre-branchings, lexicographic in their bit vectors."""
    faces = tri.skeleta.faces
    nf = tri.n_faces
    n_in = [0] * tri.n_tets
    n_out = [0] * tri.n_tets
    bits = [0] * nf
    out = []

    def rec(k):
        if k == nf:
            out.append(PreBranching.from_bits(tri, tuple(bits)))
            return
        for v in (0, 1):
            (ti, _), (to, _) = faces[k].sides[v], faces[k].sides[1 - v]
            n_in[ti] += 1
            n_out[to] += 1
            if n_in[ti] <= 2 and n_out[to] <= 2:
                bits[k] = v
                rec(k + 1)
            n_in[ti] -= 1
            n_out[to] -= 1
        bits[k] = 0

    rec(0)
    return out


def enumerate_prebranchings_bruteforce(tri: Triangulation):
    return [PreBranching.from_bits(tri, bits)
            for bits in product((0, 1), repeat=tri.n_faces)
            if is_prebranching(tri, bits)]


# --------------------------------------------------------------------------
# oriented data: region orientations, omega_b, tetrahedron signs

def region_signs(tri: Triangulation, b: Branching, eps=None):
    """For each edge class, +1 if the region oriented by ``b`` (the edge
    meets its dual region with intersection number +1) agrees with the
    reference orientation of the region (its edge walk)."""
    if eps is None:
        eps = orient(tri)
    out = []
    for e in tri.skeleta.edges:
        i, a, bb, c, d = e.link[0]
        hand = eps[i] * perm_sign((a, bb, d, c))
        out.append(hand * b.orientation(i, a, bb))
    return tuple(out)


def induced_prebranching(tri: Triangulation, b: Branching, eps=None) -> PreBranching:
    """The pre-branching omega_b: each spine edge takes the prevailing
    orientation of its three incident oriented regions."""
    from .invariants.spine import spine_complex

    cx = spine_complex(tri)
    beta = region_signs(tri, b, eps)
    omega = [sum(cx.d2[f][e] * beta[e] for e in range(tri.n_edges)) for f in range(tri.n_faces)]
    if any(abs(x) != 1 for x in omega):
        raise DecorationError([("NoPrevailingOrientation", f) for f, x in enumerate(omega) if abs(x) != 1])
    return PreBranching.from_bits(tri, tuple(0 if x > 0 else 1 for x in omega))


def tet_signs(tri: Triangulation, b: Branching, eps=None):
    """``*_(Delta,b)`` for every tetrahedron: +1 when the vertex order of
    ``b`` is a positive frame for the ambient orientation."""
    if eps is None:
        eps = orient(tri)
    return tuple(eps[i] * perm_sign(b.order(i)) for i in range(tri.n_tets))


# --------------------------------------------------------------------------
# ambiguous edges

def is_ambiguous(tri, b: Branching, e) -> bool:
    return is_branching(tri, b.inverted(e).bits)


def link_orientations(tri, b: Branching, e):
    """b-orientations (+1/-1) of the link edges of ``e``, each traversed
    in the direction of the edge walk."""
    return tuple(b.orientation(i, d, c) for (i, a, bb, c, d) in tri.skeleta.edges[e].link)


def is_good_ambiguous(tri, b: Branching, e) -> bool:
    if not is_ambiguous(tri, b, e):
        return False
    tets = [i for (i, _, _) in tri.skeleta.edges[e].embeddings]
    if len(set(tets)) != len(tets):
        return False
    signs = set(link_orientations(tri, b, e))
    return len(signs) == 2


def good_ambiguous_edges(tri, b: Branching):
    return [e for e in range(tri.n_edges) if is_good_ambiguous(tri, b, e)]


def invert(tri, b: Branching, e) -> Branching:
    if not is_good_ambiguous(tri, b, e):
        raise NotAmbiguous(e)
    return b.inverted(e)


# --------------------------------------------------------------------------
# circuits

@dataclass(frozen=True)
class CircuitDecomposition:
    circuits: tuple  # each a tuple of face classes in traversal order
    pairing: dict    # tet -> ((in face, out face), (in face, out face))


def circuit_pairing(pb: PreBranching, tet):
    """Pair the two ingoing faces with the two outgoing faces of ``tet``:
    the lower-numbered ingoing face goes with the lower-numbered outgoing
    face."""
    ins = [f for f in range(4) if pb.is_in(tet, f)]
    outs = [f for f in range(4) if not pb.is_in(tet, f)]
    return tuple(zip(ins, outs))


def circuits(tri: Triangulation, pb: PreBranching, pairing=None) -> CircuitDecomposition:
    """Oriented circuits of the pre-branched spine.  ``pairing`` maps some
    tetrahedra to their own ((in, out), (in, out)) pairs; the rest use
    :func:`circuit_pairing`."""
    sk = tri.skeleta
    pairing = {i: tuple((pairing or {}).get(i) or circuit_pairing(pb, i))
               for i in range(tri.n_tets)}
    nxt = {}
    for i, pairs in pairing.items():
        for fin, fout in pairs:
            nxt[(i, fin)] = (i, fout)
    used = set()
    result = []
    for k in range(tri.n_faces):
        if k in used:
            continue
        circ = []
        side = pb.sides[k]  # enter this tet through this face
        while True:
            fc = sk.face_of[side]
            if fc in used:
                break
            used.add(fc)
            circ.append(fc)
            out_side = nxt[side]
            j, p = tri.gluings[out_side[0]][out_side[1]]
            side = (j, p[out_side[1]])
        result.append(tuple(circ))
    return CircuitDecomposition(tuple(result), pairing)


def circuit_move(tri, pb: PreBranching, circuit_id, pairing=None) -> PreBranching:
    dec = circuits(tri, pb, pairing)
    if not 0 <= circuit_id < len(dec.circuits):
        raise UnknownCircuit(circuit_id)
    return pb.flipped(dec.circuits[circuit_id])


def all_circuits(tri, pb: PreBranching):
    """Every oriented circuit arising from some choice of pairing.

    A single fixed pairing rule does not always connect all pre-branchings
    by circuit moves (on m004 it reaches 5 of 6); letting the pairing vary
    per tetrahedron does.
    """
    found = set()
    for choice in product((0, 1), repeat=tri.n_tets):
        pairing = {}
        for i, c in enumerate(choice):
            ins, outs = zip(*circuit_pairing(pb, i))
            pairing[i] = tuple(zip(ins, outs if c == 0 else outs[::-1]))
        for circ in circuits(tri, pb, pairing).circuits:
            found.add(frozenset(circ))
    return sorted(tuple(sorted(c)) for c in found)
