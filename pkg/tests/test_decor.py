from collections import deque
from itertools import permutations, product

import pytest
from hypothesis import given, strategies as st

from btransit import census, decor
from btransit import moves as mv
from btransit.decor import (DecorationError, NotAmbiguous, UnknownCircuit, circuit_move, circuits,
                            enumerate_branchings, enumerate_prebranchings, induced_prebranching,
                            invert, is_ambiguous, tet_signs, validate_branching,
                            validate_prebranching)
from btransit.kernel import edge_class, orient, perm_sign
from strategies import connected_tables

NAMES = ["m004", "m003", "l41", "l51"]


def _branchings_oracle(t):
    """Every edge-orientation bit vector that is transitive in each tet."""
    out = []
    for bits in product((0, 1), repeat=t.n_edges):
        ok = all(e.consistent for e in t.skeleta.edges)
        for i in range(t.n_tets):
            if not ok:
                break
            succ = {x: set() for x in range(4)}
            for a, b in permutations(range(4), 2):
                idx, s = edge_class(t, i, a, b)
                if (s > 0) != bool(bits[idx]):
                    succ[a].add(b)
            # transitive tournament <=> out-degrees are 0,1,2,3
            ok = sorted(len(v) for v in succ.values()) == [0, 1, 2, 3]
        if ok:
            out.append(bits)
    return out


def _prebranchings_oracle(t):
    faces = t.skeleta.faces
    n = 0
    for bits in product((0, 1), repeat=t.n_faces):
        ins = [0] * t.n_tets
        for k, b in enumerate(bits):
            ins[faces[k].sides[b][0]] += 1
        n += all(x == 2 for x in ins)
    return n


@pytest.mark.parametrize("name", NAMES)
def test_branching_enumeration_matches_oracle(name):
    t = census.get(name)
    assert sorted(b.bits for b in enumerate_branchings(t)) == sorted(_branchings_oracle(t))


def test_branching_counts():
    assert len(enumerate_branchings(census.get("m004"))) == 4
    assert enumerate_branchings(census.get("m003")) == []


@pytest.mark.parametrize("name", NAMES)
def test_prebranching_counts(name):
    t = census.get(name)
    found = enumerate_prebranchings(t)
    assert len(found) == _prebranchings_oracle(t) > 0
    assert len(found) == len(decor.enumerate_prebranchings_bruteforce(t))


def test_prebranching_values():
    # exhaustive counts over 2^4 and 2^2 side choices
    assert len(enumerate_prebranchings(census.get("m004"))) == 6
    assert len(enumerate_prebranchings(census.get("m003"))) == 6
    assert len(enumerate_prebranchings(census.get("l41"))) == 4


def test_one_tetrahedron_has_six_local_patterns():
    pats = [p for p in product((True, False), repeat=4) if sum(p) == 2]
    assert len(pats) == 6


def test_local_ambiguous_edges_of_a_tetrahedron():
    # in a tetrahedron ordered v0 < v1 < v2 < v3, reversing an edge keeps a
    # total order exactly for v0v1, v1v2, v2v3
    amb = []
    for a, b in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]:
        succ = {x: {y for y in range(4) if y > x} for x in range(4)}
        succ[a].discard(b)
        succ[b].add(a)
        if sorted(len(v) for v in succ.values()) == [0, 1, 2, 3]:
            amb.append((a, b))
    assert amb == [(0, 1), (1, 2), (2, 3)]


def test_cyclic_triangle_rejected():
    t = census.get("m004")
    bad = [b for b in product((0, 1), repeat=2) if list(b) not in [list(x.bits) for x in
                                                                    enumerate_branchings(t)]]
    for bits in bad:
        with pytest.raises(DecorationError):
            validate_branching(t, bits)


def test_m003_rejects_all_assignments():
    t = census.get("m003")
    for bits in product((0, 1), repeat=t.n_edges):
        with pytest.raises(DecorationError):
            validate_branching(t, bits)


def test_branching_json_round_trip():
    t = census.get("m004")
    for b in enumerate_branchings(t):
        doc = b.to_json()
        assert validate_branching(t, doc["edges"]) == b


def test_all_in_prebranching_rejected():
    t = census.get("m004")
    sides = []
    for fc in t.skeleta.faces:
        sides.append(fc.sides[0] if fc.sides[0][0] == 0 else fc.sides[1])
    with pytest.raises(DecorationError) as exc:
        validate_prebranching(t, sides)
    assert any(v[0] == "BadDegree" for v in exc.value.violations)


def test_tet_signs_frame_parity():
    t = census.get("m004")
    eps = orient(t)
    for b in enumerate_branchings(t):
        want = tuple(eps[i] * perm_sign(b.ranks(i)) for i in range(t.n_tets))
        assert tet_signs(t, b) == want
        assert tet_signs(t, b, eps=tuple(-e for e in eps)) == tuple(-s for s in want)


def test_induced_prebranching_valid_and_mirror():
    t = census.get("m004")
    eps = orient(t)
    for b in enumerate_branchings(t):
        w = induced_prebranching(t, b)
        validate_prebranching(t, w.sides)
        w_bar = induced_prebranching(t, b, eps=tuple(-e for e in eps))
        assert w_bar == w.flipped(range(t.n_faces))


def test_m004_induced_prebranching_value():
    # regression value; validity and mirror symmetry are checked above
    t = census.get("m004")
    b = enumerate_branchings(t)[0]
    assert induced_prebranching(t, b).sides == ((1, 0), (1, 1), (0, 2), (0, 3))


def test_m004_edges_ambiguous_but_not_good():
    t = census.get("m004")
    for b in enumerate_branchings(t):
        assert all(is_ambiguous(t, b, e) for e in range(t.n_edges))
        assert decor.good_ambiguous_edges(t, b) == []
        with pytest.raises(NotAmbiguous):
            invert(t, b, 0)


def test_good_edges_after_refinement():
    # three 2-3 moves on m004 produce a valence-3 edge in three distinct
    # tetrahedra whose link orientations disagree
    t = census.get("m004")
    b = enumerate_branchings(t)[0]
    for face, choice in [(2, 0), (2, 0), (7, 1)]:
        tr = mv.enhance_positive(t, mv.Move("M23", (face,)), b)[choice]
        t, b = tr.tri_after, tr.after
    good = decor.good_ambiguous_edges(t, b)
    assert good == [4]
    b2 = invert(t, b, 4)
    validate_branching(t, b2.bits)
    assert b2 != b
    assert invert(t, b2, 4) == b


def test_circuit_move_involution_and_reachability():
    t = census.get("m004")
    pbs = enumerate_prebranchings(t)
    for w in pbs:
        dec = circuits(t, w)
        assert sorted(k for c in dec.circuits for k in c) == list(range(t.n_faces))
        for c in range(len(dec.circuits)):
            w2 = circuit_move(t, w, c)
            validate_prebranching(t, w2.sides)
            assert w2.flipped(dec.circuits[c]) == w
        with pytest.raises(UnknownCircuit):
            circuit_move(t, w, len(dec.circuits))
        allflip = w.flipped(range(t.n_faces))
        validate_prebranching(t, allflip.sides)


def _circuit_reach(t, start, moves_of):
    seen = {start.sides}
    queue = deque([start])
    while queue:
        w = queue.popleft()
        for circ in moves_of(w):
            w2 = w.flipped(circ)
            if w2.sides not in seen:
                seen.add(w2.sides)
                queue.append(w2)
    return seen


def test_circuit_moves_reach_every_prebranching():
    # oracle: BFS over circuit moves compared with the enumeration
    t = census.get("m004")
    pbs = enumerate_prebranchings(t)
    for start in pbs:
        seen = _circuit_reach(t, start, lambda w: decor.all_circuits(t, w))
        assert seen == {w.sides for w in pbs}


def test_fixed_pairing_does_not_connect_m004():
    t = census.get("m004")
    pbs = enumerate_prebranchings(t)
    sizes = [len(_circuit_reach(t, w, lambda w: circuits(t, w).circuits)) for w in pbs]
    assert max(sizes) < len(pbs)


def test_circuit_move_flips_exactly_the_circuit():
    t = census.get("m003")
    for w in enumerate_prebranchings(t):
        dec = circuits(t, w)
        for c, circ in enumerate(dec.circuits):
            w2 = circuit_move(t, w, c)
            changed = {k for k in range(t.n_faces) if w2.sides[k] != w.sides[k]}
            assert changed == set(circ)


@given(connected_tables(max_tets=2))
def test_enumerations_agree_with_bruteforce(t):
    assert sorted(b.bits for b in enumerate_branchings(t)) == sorted(_branchings_oracle(t))
    assert len(enumerate_prebranchings(t)) == _prebranchings_oracle(t)


@given(connected_tables(max_tets=3))
def test_circuits_partition_dual_edges(t):
    for w in enumerate_prebranchings(t)[:4]:
        for circ in decor.all_circuits(t, w):
            validate_prebranching(t, w.flipped(circ).sides)
        parts = [k for c in circuits(t, w).circuits for k in c]
        assert sorted(parts) == list(range(t.n_faces))


@given(connected_tables(max_tets=2, orientable=True), st.data())
def test_induced_prebranching_always_valid(t, data):
    bs = enumerate_branchings(t)
    if not bs:
        return
    b = data.draw(st.sampled_from(bs))
    w = induced_prebranching(t, b)
    validate_prebranching(t, w.sides)
