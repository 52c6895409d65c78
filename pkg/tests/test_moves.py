import random
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from btransit import census
from btransit import moves as mv
from btransit.decor import enumerate_branchings, enumerate_prebranchings, validate_branching
from btransit.invariants.spine import spine_complex
from btransit.kernel import is_orientable, signature
from strategies import connected_tables

POSITIVE_KINDS = ("M23", "M02Q", "M02T", "M14")


def _link_faces(t, e):
    """Oracle: walk around edge class ``e`` through the gluings and list the
    face classes met, one per link position."""
    i, a, b = t.skeleta.edges[e].rep
    c, d = [x for x in range(4) if x not in (a, b)]
    start = (i, a, b, c, d)
    out = []
    cur = start
    while True:
        i, a, b, c, d = cur
        out.append(t.skeleta.face_of[(i, d)])
        j, p = t.gluings[i][d]
        cur = (j, p[a], p[b], p[d], p[c])
        if cur == start or len(out) > 6 * t.n_tets:
            break
    return out


def _site_oracle(t):
    faces = t.skeleta.faces
    m23 = sum(1 for fc in faces if fc.sides[0][0] != fc.sides[1][0])
    m02q = 0
    for e in range(t.n_edges):
        fs = _link_faces(t, e)
        m02q += sum(1 for p, q in combinations(range(len(fs)), 2) if fs[p] != fs[q])
    return {"M23": m23, "M02Q": m02q, "M02T": t.n_faces, "M14": t.n_tets}


@pytest.mark.parametrize("name", ["m004", "m003", "l41", "l51"])
def test_positive_site_counts(name):
    t = census.get(name)
    want = _site_oracle(t)
    assert {k: len(mv.enumerate_sites(t, k)) for k in POSITIVE_KINDS} == want


def test_site_count_values():
    t = census.get("m004")
    assert {k: len(mv.enumerate_sites(t, k)) for k in POSITIVE_KINDS} == \
        {"M23": 4, "M02Q": 26, "M02T": 4, "M14": 2}
    # valence-6 edges: no 3-2 move; no pillows to collapse
    assert mv.enumerate_sites(t, "M32") == []
    assert mv.enumerate_sites(t, "M20Q") == []


def test_unknown_kind_and_bad_site():
    with pytest.raises(mv.InvalidSite):
        mv.Move("M99", (0,))
    t = census.get("m004")
    with pytest.raises(mv.InvalidSite):
        mv.apply(t, mv.Move("M32", (0,)))


def _euler_like(t):
    return t.n_vertices - t.n_edges + t.n_tets


@pytest.mark.parametrize("name", ["m004", "l41"])
def test_apply_counts_and_topology(name):
    t = census.get(name)
    h1 = spine_complex(t).homology_z.H1
    for kind in POSITIVE_KINDS:
        for m in mv.enumerate_sites(t, kind):
            t2 = mv.apply(t, m)
            assert t2.n_tets == t.n_tets + mv.TET_DELTA[kind]
            assert _euler_like(t2) == _euler_like(t)
            assert is_orientable(t2)
            h = spine_complex(t2).homology_z.H1
            assert (h.rank, h.torsion) == (h1.rank, h1.torsion)


@pytest.mark.parametrize("kind", POSITIVE_KINDS)
def test_naked_round_trip(kind):
    t = census.get("m004")
    for m in mv.enumerate_sites(t, kind):
        rw = mv.rewrite(t, m)
        assert rw.inverse is not None and rw.inverse.kind == mv.INVERSE_KIND[kind]
        back = mv.apply(rw.tri, rw.inverse)
        assert signature(back) == signature(t)


def test_decorated_round_trip_m004():
    t = census.get("m004")
    for deco in enumerate_branchings(t) + enumerate_prebranchings(t):
        for kind in ("M23", "M02Q"):
            for m in mv.enumerate_sites(t, kind):
                for tr in mv.enhance_positive(t, m, deco):
                    res = mv.enhance_negative(tr.tri_after, tr.rewrite.inverse, tr.after)
                    assert res, getattr(res, "reason", "")
                    assert mv.same_decorated(t, deco, res.tri_after, res.after)


def test_negative_moves_return_valid_or_blocked():
    rng = random.Random(7)
    t = census.get("m004")
    b = enumerate_branchings(t)[0]
    for _ in range(15):
        m = rng.choice(mv.enumerate_sites(t, "M23"))
        tr = rng.choice(mv.enhance_positive(t, m, b))
        t, b = tr.tri_after, tr.after
        if t.n_tets > 7:
            break
    for m in mv.enumerate_sites(t, "M32"):
        res = mv.enhance_negative(t, m, b)
        if res:
            validate_branching(res.tri_after, res.after.bits)
        else:
            assert isinstance(res, mv.Blocked) and res.reason


def test_census_shape():
    c = mv.census_types()
    assert len(c.rows) == 120
    assert len(c.types) == 40
    assert all(len(r) == 3 for _, r in c.types)
    counts = c.class_counts()
    assert counts["NonAmbiguous"] == 20
    assert counts["AmbiguousSliding"] + counts["ForcedAmbiguous"] == 12
    assert counts["ForcedAmbiguous"] == 4
    assert counts["Bump"] == 8
    assert sum(1 for t, _ in c.types if t.schaeffer) == 4


def test_census_rule_agrees_with_table():
    for row in mv.census_types().rows:
        assert row.ttype.consistent, row


@pytest.mark.parametrize("couple,cls", [
    (((+1, 2), (+1, 1)), "NonAmbiguous"),
    (((-1, 3), (-1, 0)), "ForcedAmbiguous"),
    (((+1, 0), (-1, 0)), "Bump"),
    (((+1, 1), (-1, 1)), "AmbiguousSliding"),
])
def test_table_examples(couple, cls):
    assert mv.table_class(couple) == cls
    assert mv.table_class((couple[1], couple[0])) == cls


def test_schaeffer_types_are_non_ambiguous():
    for t, _ in mv.census_types().types:
        if t.schaeffer:
            assert t.cls == "NonAmbiguous"


def test_bump_iff_pit_source_rule():
    for t, _ in mv.census_types().types:
        assert (t.cls == "Bump") == t.rule_bump


def test_quad_census():
    rows = mv.quad_census()
    assert len(rows) == 24
    for ranks, q in rows:
        if not q.bump:
            assert q.cls in ("NonAmbiguous", "AmbiguousSliding", "ForcedAmbiguous")
        if q.pb_forced:
            assert not q.bump


def test_classification_matches_enhancement_counts():
    # the number of branched enhancements is 1 exactly for forced types
    t = census.get("m004")
    for b in enumerate_branchings(t):
        for m in mv.enumerate_sites(t, "M23"):
            tt = mv.classify_23(t, b, m)
            assert tt.cls is not None
            assert (len(mv.enhance_positive(t, m, b)) == 1) == tt.b_forced
        for m in mv.enumerate_sites(t, "M02Q"):
            q = mv.classify_02q(t, b, m)
            assert (len(mv.enhance_positive(t, m, b)) == 1) == q.b_forced


def test_classify_rejects_wrong_kind():
    t = census.get("m004")
    b = enumerate_branchings(t)[0]
    with pytest.raises(mv.InvalidSite):
        mv.classify_23(t, b, mv.Move("M02T", (0,)))
    with pytest.raises(mv.InvalidSite):
        mv.classify_02q(t, b, mv.Move("M23", (0,)))


def test_transported_orientation_is_an_orientation():
    from btransit.kernel import orient, perm_sign

    t = census.get("m004")
    eps = orient(t)
    for m in mv.all_sites(t, POSITIVE_KINDS):
        rw = mv.rewrite(t, m)
        new = mv.transported_orientation(rw, eps)
        for i in range(rw.tri.n_tets):
            for f in range(4):
                j, p = rw.tri.gluings[i][f]
                assert new[j] == -new[i] * perm_sign(p)
        for old, k in rw.old_to_new.items():
            assert new[k] == eps[old]


@given(connected_tables(max_tets=3, orientable=True), st.data())
def test_positive_moves_on_random_tables(t, data):
    kind = data.draw(st.sampled_from(POSITIVE_KINDS))
    sites = mv.enumerate_sites(t, kind)
    if not sites:
        return
    m = data.draw(st.sampled_from(sites))
    rw = mv.rewrite(t, m)
    assert rw.tri.n_tets == t.n_tets + mv.TET_DELTA[kind]
    assert _euler_like(rw.tri) == _euler_like(t)
    assert signature(mv.apply(rw.tri, rw.inverse)) == signature(t)
