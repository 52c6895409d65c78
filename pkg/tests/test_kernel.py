import random
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from btransit import census
from btransit.kernel import (NonOrientable, TriangulationError, boundary_surface, edge_class,
                             is_orientable, orient, perm_compose, perm_inverse, perm_sign,
                             relabel, signature, validate)
from strategies import connected_tables, gluing_tables

ONE_TET = [[(0, (3, 1, 2, 0)), (0, (0, 2, 1, 3)), (0, (0, 2, 1, 3)), (0, (3, 1, 2, 0))]]


def test_one_tet_table_is_valid():
    t = validate(ONE_TET)
    assert t.n_tets == 1
    assert t.n_faces == 2


def test_non_involutive_reported():
    table = [list(r) for r in census.M004]
    table[0][0] = (1, (0, 1, 2, 3))
    with pytest.raises(TriangulationError) as exc:
        validate(table)
    assert any(v[0] == "NonInvolutive" for v in exc.value.violations)


def test_self_glued_face_rejected():
    table = [[(0, (0, 1, 2, 3))] + [(0, (0, 1, 2, 3))] * 3]
    with pytest.raises(TriangulationError) as exc:
        validate(table)
    assert ("SelfGluedFace", 0, 0) in exc.value.violations


def test_bad_permutation_rejected():
    table = [list(r) for r in census.M004]
    table[0][1] = (1, (0, 0, 1, 2))
    with pytest.raises(TriangulationError) as exc:
        validate(table)
    assert any(v[0] == "BadPermutation" for v in exc.value.violations)


def _orbit_counts(table):
    """Oracle: vertex/edge/face classes by naive repeated merging."""
    n = len(table)
    parent = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            x = parent[x]
        return x

    for i in range(n):
        for f in range(4):
            j, p = table[i][f]
            for a in range(4):
                if a == f:
                    continue
                parent[find(("v", i, a))] = find(("v", j, p[a]))
                for b in range(4):
                    if b not in (a, f):
                        parent[find(("e", i, frozenset((a, b))))] = find(("e", j, frozenset((p[a], p[b]))))
    verts = {find(("v", i, a)) for i in range(n) for a in range(4)}
    edges = {find(("e", i, frozenset(e))) for i in range(n)
             for e in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]}
    return len(verts), len(edges), 2 * n


@pytest.mark.parametrize("name", ["m004", "m003", "l41", "l51"])
def test_skeleta_against_orbit_oracle(name):
    t = census.get(name)
    v, e, f = _orbit_counts(census.TABLES[name])
    assert (t.n_vertices, t.n_edges, t.n_faces) == (v, e, f)


def test_m004_skeleta():
    t = census.get("m004")
    assert [e.valence for e in t.skeleta.edges] == [6, 6]
    assert t.n_faces == 4 and t.n_vertices == 1
    assert all(e.consistent for e in t.skeleta.edges)


def _two_colouring(table):
    """Oracle: BFS sign assignment by gluing parity, or None."""
    eps = {0: 1}
    queue = [0]
    while queue:
        i = queue.pop()
        for j, p in table[i]:
            want = -eps[i] * perm_sign(p)
            if j not in eps:
                eps[j] = want
                queue.append(j)
            elif eps[j] != want:
                return None
    return tuple(eps[i] for i in range(len(table)))


@pytest.mark.parametrize("name", ["m004", "m003", "l41", "l51"])
def test_orient_matches_oracle(name):
    t = census.get(name)
    assert orient(t) == _two_colouring(census.TABLES[name])
    assert orient(t)[0] == 1


def test_nonorientable_detected():
    # one tetrahedron, faces paired by an even permutation
    table = [[(0, (1, 0, 3, 2)), (0, (1, 0, 3, 2)), (0, (0, 1, 3, 2)), (0, (0, 1, 3, 2))]]
    t = validate(table)
    assert _two_colouring(table) is None
    with pytest.raises(NonOrientable):
        orient(t)
    assert not is_orientable(t)


def test_boundary_m004_torus():
    s = boundary_surface(census.get("m004"))
    assert len(s.components) == 1
    c = s.components[0]
    assert c.euler == 0 and c.genus == 1 and c.orientable
    assert s.n_triangles == 8


def test_boundary_l41_sphere():
    s = boundary_surface(census.get("l41"))
    assert [c.euler for c in s.components] == [2]


def _isomorphic_bruteforce(a, b):
    """Oracle: try every start tet / vertex map and extend."""
    n = len(a)
    if n != len(b):
        return False
    for t0 in range(n):
        for p0 in permutations(range(4)):
            tmap, vmap = {0: t0}, {0: p0}
            ok = True
            stack = [0]
            while stack and ok:
                i = stack.pop()
                for f in range(4):
                    j, p = a[i][f]
                    k, q = b[tmap[i]][vmap[i][f]]
                    vj = perm_compose(q, perm_compose(vmap[i], perm_inverse(p)))
                    if j in tmap:
                        ok &= tmap[j] == k and vmap[j] == vj
                    else:
                        tmap[j], vmap[j] = k, vj
                        stack.append(j)
            if ok and len(set(tmap.values())) == n:
                return True
    return False


def test_m003_m004_signatures_differ():
    assert not _isomorphic_bruteforce(census.M003, census.M004)
    assert signature(census.get("m003")) != signature(census.get("m004"))


def test_relabel_signature():
    t = census.get("m004")
    rng = random.Random(1)
    for _ in range(10):
        perms = [tuple(rng.sample(range(4), 4)) for _ in range(2)]
        t2 = relabel(t, [1, 0], perms)
        assert _isomorphic_bruteforce(census.M004, t2.table())
        assert signature(t2) == signature(t)


def test_edge_class_orientation():
    t = census.get("m004")
    i, a, b = t.skeleta.edges[0].rep
    assert edge_class(t, i, a, b) == (0, 1)
    assert edge_class(t, i, b, a) == (0, -1)


@given(gluing_tables())
def test_counting_laws(t):
    sk = t.skeleta
    assert sum(e.valence for e in sk.edges) == 6 * t.n_tets
    assert t.n_faces == 2 * t.n_tets
    assert sum(len(v.embeddings) for v in sk.vertices) == 4 * t.n_tets


@given(gluing_tables(), st.randoms(use_true_random=False))
def test_signature_relabel_invariant(t, rng):
    n = t.n_tets
    order = list(range(n))
    rng.shuffle(order)
    perms = [tuple(rng.sample(range(4), 4)) for _ in range(n)]
    assert signature(relabel(t, order, perms)) == signature(t)


@given(gluing_tables())
def test_involution_preserved(t):
    for i in range(t.n_tets):
        for f in range(4):
            j, p = t.gluings[i][f]
            assert t.gluings[j][p[f]] == (i, perm_inverse(p))


@given(connected_tables(orientable=True))
def test_boundary_euler_is_twice_chi(t):
    s = boundary_surface(t)
    if all(e.consistent for e in t.skeleta.edges):
        assert s.euler == 2 * t.euler_characteristic()
