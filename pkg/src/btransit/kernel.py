"""
Ideal triangulations stored as gluing tables.

A triangulation with ``n`` tetrahedra is a list ``gluings`` where
``gluings[i][f] = (j, perm)`` says that face ``f`` of tetrahedron ``i`` (the
face opposite vertex ``f``) is glued to face ``perm[f]`` of tetrahedron ``j``,
vertex ``x`` of ``i`` being identified with vertex ``perm[x]`` of ``j``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from itertools import permutations
from typing import Iterator, Sequence

PERMS4 = tuple(permutations(range(4)))
PERM_INDEX = {p: k for k, p in enumerate(PERMS4)}
IDENTITY = (0, 1, 2, 3)

# local edges of a tetrahedron, as (a, b) with a < b
EDGES = ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3))
EDGE_INDEX = {e: k for k, e in enumerate(EDGES)}


class TriangulationError(ValueError):
    """Raised when a gluing table does not describe a valid triangulation."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class NonOrientable(ValueError):
    def __init__(self, cycle):
        self.cycle = cycle
        super().__init__(f"orientation-reversing cycle through tetrahedra {cycle}")


# --------------------------------------------------------------------------
# permutations of {0,1,2,3}

def _perm_inverse(p):
    q = [0] * 4
    for x, y in enumerate(p):
        q[y] = x
    return tuple(q)


# lookup tables for the 24 permutations; other inputs take the slow path
_ALL4 = tuple(permutations(range(4)))
_INV = {p: _perm_inverse(p) for p in _ALL4}
_COMP = {(p, q): (p[q[0]], p[q[1]], p[q[2]], p[q[3]]) for p in _ALL4 for q in _ALL4}


def perm_inverse(p):
    try:
        return _INV[p]
    except (KeyError, TypeError):
        return _perm_inverse(p)


def perm_compose(p, q):
    """Return ``p o q`` (apply ``q`` first)."""
    try:
        return _COMP[(p, q)]
    except (KeyError, TypeError):
        return tuple(p[q[x]] for x in range(len(q)))


def perm_sign(p):
    sign = 1
    seen = [False] * len(p)
    for start in range(len(p)):
        if seen[start]:
            continue
        length = 0
        x = start
        while not seen[x]:
            seen[x] = True
            x = p[x]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def is_perm4(p) -> bool:
    return len(p) == 4 and sorted(p) == [0, 1, 2, 3]


def other_two(a, b):
    """The two vertices of a tetrahedron not in the edge ``ab``, increasing."""
    return tuple(x for x in range(4) if x != a and x != b)


def face_vertices(f):
    return tuple(x for x in range(4) if x != f)


# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EdgeClass:
    index: int
    embeddings: tuple  # (tet, a, b) oriented like the class representative
    consistent: bool
    link: tuple        # cyclic walk states (tet, a, b, c, d)

    @property
    def valence(self):
        return len(self.embeddings)

    @property
    def rep(self):
        return self.embeddings[0]


@dataclass(frozen=True)
class FaceClass:
    index: int
    sides: tuple  # ((tet, face), (tet, face)), first side lexicographically smaller


@dataclass(frozen=True)
class VertexClass:
    index: int
    embeddings: tuple  # (tet, vertex)


@dataclass(frozen=True)
class Skeleta:
    edges: tuple
    faces: tuple
    vertices: tuple
    edge_of: dict    # (tet, a, b) with a<b -> (edge class, sign), sign +1 if a->b matches rep
    face_of: dict    # (tet, face) -> face class index
    vertex_of: dict  # (tet, vertex) -> vertex class index

    @property
    def valences(self):
        return [e.valence for e in self.edges]


@dataclass(frozen=True)
class BoundaryComponent:
    vertex_class: int
    triangles: tuple  # (tet, vertex)
    n_vertices: int
    n_edges: int
    euler: int
    orientable: bool

    @property
    def genus(self):
        if self.orientable:
            return (2 - self.euler) // 2
        return 2 - self.euler


@dataclass(frozen=True)
class BoundarySurface:
    components: tuple

    @property
    def euler(self):
        return sum(c.euler for c in self.components)

    @property
    def n_triangles(self):
        return sum(len(c.triangles) for c in self.components)


@dataclass(frozen=True, eq=False)
class Triangulation:
    """An immutable, validated gluing table.

    Use :func:`validate` (or :meth:`from_table`) to build one from raw data.
    """

    gluings: tuple
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_table(cls, table, name=""):
        return validate(table, name=name)

    @property
    def n_tets(self):
        return len(self.gluings)

    def glued(self, tet, face):
        return self.gluings[tet][face]

    def table(self):
        return [[(j, list(p)) for (j, p) in row] for row in self.gluings]

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Triangulation{label} with {self.n_tets} tetrahedra>"

    def __eq__(self, other):
        return isinstance(other, Triangulation) and self.gluings == other.gluings

    def __hash__(self):
        return hash(self.gluings)

    # derived data, computed once
    @cached_property
    def skeleta(self) -> Skeleta:
        return skeleta(self)

    @property
    def n_edges(self):
        return len(self.skeleta.edges)

    @property
    def n_faces(self):
        return len(self.skeleta.faces)

    @property
    def n_vertices(self):
        return len(self.skeleta.vertices)

    def euler_characteristic(self):
        """chi(M) of the compact core, computed as #edges - #tetrahedra."""
        return self.n_edges - self.n_tets

    def is_connected(self):
        return len(components(self)) <= 1


def validate(table, name="") -> Triangulation:
    """Check a raw gluing table and return a :class:`Triangulation`.

    ``table[i][f]`` is a pair ``(j, perm)``; ``perm`` may be any sequence of
    four integers.  Raises :class:`TriangulationError` listing every
    violation found.
    """
    violations = []
    n = len(table)
    rows = []
    for i, row in enumerate(table):
        if len(row) != 4:
            violations.append(("BadPermutation", i, None, "expected 4 faces"))
            rows.append(None)
            continue
        new_row = []
        for f, entry in enumerate(row):
            try:
                j, perm = entry
                j = int(j)
                perm = tuple(int(x) for x in perm)
            except (TypeError, ValueError):
                violations.append(("BadPermutation", i, f, "malformed entry"))
                new_row.append(None)
                continue
            if not is_perm4(perm):
                violations.append(("BadPermutation", i, f, perm))
                new_row.append(None)
                continue
            if not 0 <= j < n:
                violations.append(("NonInvolutive", i, f, f"tetrahedron {j} out of range"))
                new_row.append(None)
                continue
            new_row.append((j, perm))
        rows.append(new_row)

    for i, row in enumerate(rows):
        if row is None:
            continue
        for f, entry in enumerate(row):
            if entry is None:
                continue
            j, perm = entry
            g = perm[f]
            if j == i and g == f:
                violations.append(("SelfGluedFace", i, f))
                continue
            back = rows[j][g] if rows[j] is not None else None
            if back is None or back[0] != i or back[1] != perm_inverse(perm):
                violations.append(("NonInvolutive", i, f))
    if violations:
        raise TriangulationError(violations)
    return Triangulation(tuple(tuple(r) for r in rows), name=name)


def components(tri: Triangulation):
    """Connected components as sorted lists of tetrahedra."""
    seen = [False] * tri.n_tets
    comps = []
    for start in range(tri.n_tets):
        if seen[start]:
            continue
        comp = []
        queue = deque([start])
        seen[start] = True
        while queue:
            i = queue.popleft()
            comp.append(i)
            for j, _ in tri.gluings[i]:
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        comps.append(sorted(comp))
    return comps


# --------------------------------------------------------------------------
# skeleta

def edge_walk(tri: Triangulation, tet, a, b, c, d):
    """Walk around the edge ``ab`` of ``tet``, starting by leaving through the
    face opposite ``d``.  Yields states ``(tet, a, b, c, d)`` until the walk
    closes up; each state is one tetrahedron of the edge star, entered through
    the face opposite ``c`` and left through the face opposite ``d``.
    """
    start = (tet, frozenset((a, b)), d)
    state = (tet, a, b, c, d)
    while True:
        yield state
        i, a, b, c, d = state
        j, p = tri.gluings[i][d]
        state = (j, p[a], p[b], p[d], p[c])
        if (state[0], frozenset(state[1:3]), state[4]) == start:
            return


def skeleta(tri: Triangulation) -> Skeleta:
    n = tri.n_tets
    gl = tri.gluings
    # edges: node id 6*i + k for local edge k of tet i; BFS with orientation parity
    par = [-1] * (6 * n)
    edges = []
    edge_of = {}
    for start in range(6 * n):
        if par[start] >= 0:
            continue
        par[start] = 0
        members = [start]
        stack = [start]
        consistent = True
        while stack:
            node = stack.pop()
            i, k = divmod(node, 6)
            a, b = EDGES[k]
            pn = par[node]
            for f in range(4):
                if f == a or f == b:
                    continue
                j, p = gl[i][f]
                x, y = p[a], p[b]
                if x < y:
                    other, q = 6 * j + EDGE_INDEX[(x, y)], pn
                else:
                    other, q = 6 * j + EDGE_INDEX[(y, x)], pn ^ 1
                if par[other] < 0:
                    par[other] = q
                    members.append(other)
                    stack.append(other)
                elif par[other] != q:
                    consistent = False
        members.sort()
        idx = len(edges)
        embs = []
        for node in members:
            i, k = divmod(node, 6)
            a, b = EDGES[k]
            if par[node] and consistent:
                embs.append((i, b, a))
                edge_of[(i, a, b)] = (idx, -1)
            else:
                embs.append((i, a, b))
                edge_of[(i, a, b)] = (idx, 1)
        ti, ta, tb = embs[0]
        c, d = other_two(ta, tb)
        link = tuple(edge_walk(tri, ti, ta, tb, c, d))
        edges.append(EdgeClass(idx, tuple(embs), consistent, link))

    face_of = {}
    faces = []
    for i in range(n):
        for f in range(4):
            if (i, f) in face_of:
                continue
            j, p = tri.gluings[i][f]
            idx = len(faces)
            face_of[(i, f)] = idx
            face_of[(j, p[f])] = idx
            faces.append(FaceClass(idx, ((i, f), (j, p[f]))))

    vparent = list(range(4 * n))

    def vfind(x):
        while vparent[x] != x:
            vparent[x] = vparent[vparent[x]]
            x = vparent[x]
        return x

    for i in range(n):
        for f in range(4):
            j, p = tri.gluings[i][f]
            for x in range(4):
                if x != f:
                    ra, rb = vfind(4 * i + x), vfind(4 * j + p[x])
                    if ra != rb:
                        vparent[max(ra, rb)] = min(ra, rb)
    vroots = {}
    vmembers = []
    for node in range(4 * n):
        r = vfind(node)
        if r not in vroots:
            vroots[r] = len(vmembers)
            vmembers.append([])
        vmembers[vroots[r]].append(divmod(node, 4))
    vertex_of = {}
    vertices = []
    for idx, embs in enumerate(vmembers):
        for e in embs:
            vertex_of[e] = idx
        vertices.append(VertexClass(idx, tuple(embs)))

    return Skeleta(tuple(edges), tuple(faces), tuple(vertices), edge_of, face_of, vertex_of)


def edge_class(tri: Triangulation, tet, a, b):
    """Return ``(class index, sign)`` for the oriented local edge ``a -> b``."""
    if a < b:
        return tri.skeleta.edge_of[(tet, a, b)]
    idx, s = tri.skeleta.edge_of[(tet, b, a)]
    return idx, -s


# --------------------------------------------------------------------------
# orientation

def orient(tri: Triangulation):
    """Signs ``eps[i]`` such that every gluing reverses the induced face
    orientation, i.e. ``eps[i] * eps[j] * sign(perm) == -1``.

    Each connected component starts from ``+1`` on its lowest tetrahedron.
    Raises :class:`NonOrientable` with a cycle witnessing the failure.
    """
    cached = tri._cache.get("orient")
    if cached is not None:
        if isinstance(cached, NonOrientable):
            raise cached
        return cached
    n = tri.n_tets
    eps = [0] * n
    parent = [None] * n
    for start in range(n):
        if eps[start]:
            continue
        eps[start] = 1
        queue = deque([start])
        while queue:
            i = queue.popleft()
            for f in range(4):
                j, p = tri.gluings[i][f]
                want = -eps[i] * perm_sign(p)
                if eps[j] == 0:
                    eps[j] = want
                    parent[j] = i
                    queue.append(j)
                elif eps[j] != want:
                    err = NonOrientable(_tree_cycle(parent, i, j))
                    tri._cache["orient"] = err
                    raise err
    result = tuple(eps)
    tri._cache["orient"] = result
    return result


def _tree_cycle(parent, i, j):
    def path(x):
        out = [x]
        while parent[x] is not None:
            x = parent[x]
            out.append(x)
        return out

    pi, pj = path(i), path(j)
    common = set(pi) & set(pj)
    head = [x for x in pi if x not in common]
    tail = [x for x in pj if x not in common]
    meet = next(x for x in pi if x in common)
    return head + [meet] + list(reversed(tail))


def is_orientable(tri: Triangulation) -> bool:
    try:
        orient(tri)
    except NonOrientable:
        return False
    return True


# --------------------------------------------------------------------------
# boundary surface

def boundary_surface(tri: Triangulation) -> BoundarySurface:
    """The triangulated boundary: one link triangle per (tet, vertex)."""
    sk = tri.skeleta
    comps = []
    for vc in sk.vertices:
        tris = vc.embeddings
        # link vertices are edge ends (tet, v, w) up to identification
        ends = set()
        for (i, v) in tris:
            for w in range(4):
                if w == v:
                    continue
                idx, s = edge_class(tri, i, v, w)
                e = sk.edges[idx]
                # the end at v of the class representative's tail or head
                ends.add((idx, s if e.consistent else 0))
        n_tri = len(tris)
        n_sides = 3 * n_tri // 2
        euler = len(ends) - n_sides + n_tri
        comps.append(BoundaryComponent(
            vc.index, tuple(tris), len(ends), n_sides, euler, _link_orientable(tri, tris)))
    return BoundarySurface(tuple(comps))


def _link_orientable(tri, tris):
    members = set(tris)
    sign = {}
    for start in tris:
        if start in sign:
            continue
        sign[start] = 1
        queue = deque([start])
        while queue:
            i, v = queue.popleft()
            for f in range(4):
                if f == v:
                    continue
                j, p = tri.gluings[i][f]
                nxt = (j, p[v])
                if nxt not in members:
                    continue
                want = -sign[(i, v)] * perm_sign(p)
                if nxt not in sign:
                    sign[nxt] = want
                    queue.append(nxt)
                elif sign[nxt] != want:
                    return False
    return True


# --------------------------------------------------------------------------
# isomorphism signatures

def _relabel(tri, start, perm, bound=None):
    """Breadth-first relabelling from ``start`` with vertex map ``perm``
    (old vertex -> new vertex).  Returns (tet order, vertex maps, code).

    With ``bound`` given, gives up (returns ``None``) as soon as the code
    is known to be larger than ``bound``."""
    n = tri.n_tets
    label = {start: 0}
    order = [start]
    vmap = {start: perm}
    code = []
    tight = bound is not None
    k = 0
    while k < len(order):
        i = order[k]
        inv = perm_inverse(vmap[i])
        for nf in range(4):
            f = inv[nf]
            j, p = tri.gluings[i][f]
            if j not in label:
                label[j] = len(order)
                order.append(j)
                vmap[j] = perm_compose(vmap[i], perm_inverse(p))
            newp = perm_compose(vmap[j], perm_compose(p, inv))
            for x in (label[j], PERM_INDEX[newp]):
                if tight:
                    y = bound[len(code)]
                    if x > y:
                        return None
                    if x < y:
                        tight = False
                code.append(x)
        k += 1
    if len(order) != n:
        raise ValueError("signature requires a connected triangulation")
    return order, vmap, tuple(code)


def relabelings(tri: Triangulation) -> Iterator[tuple]:
    """Yield ``(code, order, vmap)`` for every breadth-first relabelling."""
    for start in range(tri.n_tets):
        for perm in PERMS4:
            order, vmap, code = _relabel(tri, start, perm)
            yield code, order, vmap


def signature(tri: Triangulation, decoration=None) -> str:
    """Canonical string, equal for isomorphic (decorated) triangulations.

    ``decoration`` may be a branching or a pre-branching (anything with a
    ``local_code(tet, vmap)`` method giving a relabelling-covariant code).
    Disconnected triangulations get the sorted signatures of their
    components joined by ``|``.
    """
    comps = components(tri)
    if len(comps) > 1:
        parts = []
        for comp in comps:
            sub, old_to_new = restrict(tri, comp)
            dec = decoration.restrict(sub, old_to_new) if decoration is not None else None
            parts.append(signature(sub, dec))
        return "|".join(sorted(parts))
    if tri.n_tets == 0:
        return ""
    best = None
    best_tri = None
    for start in range(tri.n_tets):
        for perm in PERMS4:
            res = _relabel(tri, start, perm, best_tri)
            if res is None:
                continue
            order, vmap, code = res
            if decoration is not None:
                code = code + tuple(x for i in order for x in decoration.local_code(i, vmap[i]))
            if best is None or code < best:
                best = code
                best_tri = code[:8 * tri.n_tets]
    return _encode(tri.n_tets, best, decoration)


def _encode(n, code, decoration):
    tag = "" if decoration is None else decoration.signature_tag
    return f"{tag}{n}:" + ".".join(str(x) for x in code)


def restrict(tri: Triangulation, tets: Sequence[int]):
    """Sub-triangulation on a union of components."""
    old_to_new = {t: k for k, t in enumerate(tets)}
    rows = []
    for t in tets:
        rows.append([(old_to_new[j], p) for (j, p) in tri.gluings[t]])
    return validate(rows), old_to_new


def relabel(tri: Triangulation, tet_perm: Sequence[int], vertex_perms=None) -> Triangulation:
    """Isomorphic copy: old tet ``i`` becomes ``tet_perm[i]`` with vertices
    renamed by ``vertex_perms[i]`` (old vertex -> new vertex)."""
    n = tri.n_tets
    if vertex_perms is None:
        vertex_perms = [IDENTITY] * n
    rows = [None] * n
    for i in range(n):
        ni = tet_perm[i]
        vi = vertex_perms[i]
        row = [None] * 4
        for f in range(4):
            j, p = tri.gluings[i][f]
            nj = tet_perm[j]
            vj = vertex_perms[j]
            newp = perm_compose(vj, perm_compose(p, perm_inverse(vi)))
            row[vi[f]] = (nj, newp)
        rows[ni] = row
    return validate(rows, name=tri.name)


def is_isomorphic(t1: Triangulation, t2: Triangulation) -> bool:
    return t1.n_tets == t2.n_tets and signature(t1) == signature(t2)


def seeded_isomorphism(t1: Triangulation, t2: Triangulation, a0, b0, perm0=IDENTITY):
    """Try to extend ``a0 -> b0`` (vertex map ``perm0``) to an isomorphism of
    connected triangulations.  Returns ``(tet_map, vertex_maps)`` or ``None``."""
    if t1.n_tets != t2.n_tets:
        return None
    tmap = {a0: b0}
    vmap = {a0: tuple(perm0)}
    used = {b0}
    queue = [a0]
    while queue:
        i = queue.pop()
        vi = vmap[i]
        for f in range(4):
            j, p = t1.gluings[i][f]
            k, q = t2.gluings[tmap[i]][vi[f]]
            # vertex x of j corresponds to q(vi(p^-1(x))) of k
            vj = perm_compose(q, perm_compose(vi, perm_inverse(p)))
            if j in tmap:
                if tmap[j] != k or vmap[j] != vj:
                    return None
            else:
                if k in used:
                    return None
                tmap[j] = k
                vmap[j] = vj
                used.add(k)
                queue.append(j)
    if len(tmap) != t1.n_tets:
        return None
    return tmap, vmap
