from fractions import Fraction

import pytest
from hypothesis import given
from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_form

from btransit import census, decor
from btransit import connect as cn
from btransit import moves as mv
from btransit.invariants.boundary import bicoloring
from btransit.invariants.cochains import euler_cochain, fundamental_cycle
from btransit.invariants.cone import measure_cone, nonnegative_samples
from btransit.invariants.omega import (branching_from_prebranching, branching_from_region_signs,
                                       class_invariant, omega_class, pushforward)
from btransit.invariants.spine import spine_complex
from btransit.kernel import boundary_surface, is_orientable
from strategies import connected_tables


def _invariant_factors(rows, ncols):
    if not rows or not ncols:
        return []
    S = smith_normal_form(Matrix(rows), domain=ZZ)
    return [abs(S[i, i]) for i in range(min(S.shape)) if S[i, i] != 0]


def _h1_oracle(t):
    """H1 = ker d1 / im d2 from sympy's Smith normal form."""
    cx = spine_complex(t)
    # d1 has one row per tetrahedron, d2 one row per face class
    r1 = len(_invariant_factors([list(r) for r in cx.d1], t.n_faces))
    fac2 = _invariant_factors([list(r) for r in cx.d2], t.n_edges)
    return t.n_faces - r1 - len(fac2), sorted(x for x in fac2 if x > 1)


def _rank_q(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        p = next((i for i in range(rank, len(m)) if m[i][c]), None)
        if p is None:
            continue
        m[rank], m[p] = m[p], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][c]:
                k = m[i][c] / m[rank][c]
                m[i] = [a - k * b for a, b in zip(m[i], m[rank])]
        rank += 1
    return rank


@pytest.mark.parametrize("name,rank,torsion,h2,h2_mod2", [
    ("m004", 1, (), 0, 0),
    ("m003", 1, (5,), 0, 0),
    ("l41", 0, (4,), 0, 1),
    ("l51", 0, (5,), 0, 0),
])
def test_homology_values(name, rank, torsion, h2, h2_mod2):
    t = census.get(name)
    cx = spine_complex(t)
    h = cx.homology_z
    assert (h.H1.rank, tuple(h.H1.torsion)) == (rank, torsion)
    assert h.H2.rank == h2
    assert cx.homology_z2.H2.rank == h2_mod2
    assert _h1_oracle(t) == (rank, list(torsion))


def test_d1_d2_is_zero_on_census():
    for name in census.TABLES:
        cx = spine_complex(census.get(name))
        prod = Matrix([list(r) for r in cx.d1]) * Matrix([list(r) for r in cx.d2])
        assert prod.is_zero_matrix


@given(connected_tables(max_tets=3))
def test_spine_complex_properties(t):
    cx = spine_complex(t)
    prod = Matrix([list(r) for r in cx.d1]) * Matrix([list(r) for r in cx.d2])
    assert prod.is_zero_matrix
    h = cx.homology_z.H1
    assert (h.rank, sorted(h.torsion)) == _h1_oracle(t)


@pytest.mark.parametrize("name", ["m004", "m003", "l41", "l51"])
def test_omega_classes_are_even_with_witness(name):
    t = census.get(name)
    d2 = [list(r) for r in spine_complex(t).d2]
    for w in decor.enumerate_prebranchings(t):
        om = omega_class(t, w)
        assert om.even
        chain = list(w.chain())
        rest = [c - 2 * a for c, a in zip(chain, om.alpha_chain)]
        image = [sum(d2[f][e] * om.witness[e] for e in range(t.n_edges)) for f in range(t.n_faces)]
        assert image == rest


def test_induced_classes_vanish():
    t = census.get("m004")
    for b in decor.enumerate_branchings(t):
        om = omega_class(t, decor.induced_prebranching(t, b))
        assert om.is_zero and om.mod2_zero
        assert class_invariant(om)[0]


def test_branching_from_prebranching_recovers_induced():
    t = census.get("m004")
    for b in decor.enumerate_branchings(t):
        w = decor.induced_prebranching(t, b)
        b2 = branching_from_prebranching(t, w)
        assert decor.induced_prebranching(t, b2) == w


def test_region_signs_round_trip():
    t = census.get("m004")
    for b in decor.enumerate_branchings(t):
        signs = decor.region_signs(t, b)
        assert branching_from_region_signs(t, signs) == b


def test_fundamental_cycle():
    t = census.get("m004")
    for b in decor.enumerate_branchings(t):
        z = fundamental_cycle(t, b)
        assert z.is_cycle
        assert z.coefficients == decor.tet_signs(t, b)


@pytest.fixture(scope="module")
def corpus():
    out = []
    t = census.get("m004")
    bs = decor.enumerate_branchings(t)
    out += [(t, b) for b in bs]
    t3, _ = cn.make_branchable(census.get("m003"))
    out += [(t3, b) for b in decor.enumerate_branchings(t3)]
    tr = mv.enhance_positive(t, mv.Move("M14", (0,)), bs[0])[0]
    out.append((tr.tri_after, tr.after))
    return out


def test_bicoloring_chi_identities(corpus):
    for t, b in corpus:
        bc = bicoloring(t, b)
        chi = t.euler_characteristic()
        assert bc.chi_white == bc.chi_black == chi
        assert boundary_surface(t).euler == 2 * chi


def test_euler_cochain_sum(corpus):
    sums = []
    for t, b in corpus:
        ec = euler_cochain(t, b)
        assert ec.total == t.euler_characteristic()
        assert all(d == 1 - tt for d, tt in zip(ec.values, ec.tangencies))
        sums.append(ec.total)
    # torus boundaries give 0; the sphere boundary after the 1-4 move gives 1
    assert sums[:-1] == [0] * (len(sums) - 1) and sums[-1] == 1


def test_cone_dimension_is_rank_h2(corpus):
    dims = []
    for t, b in corpus:
        model = measure_cone(t, b)
        eqs = [list(r) for r in model.equations]
        assert model.dim == t.n_edges - _rank_q(eqs)
        assert model.dim == spine_complex(t).homology_z.H2.rank
        for v in model.basis:
            assert model.satisfies(v)
        if model.positive:
            assert all(x > 0 for x in model.witness) and model.satisfies(model.witness)
        for z in nonnegative_samples(model, k=2):
            assert all(x >= 0 for x in z) and model.satisfies(z)
        dims.append(model.dim)
    assert dims[-1] == 1 and set(dims[:-1]) == {0}


def _cycle_basis(t):
    return spine_complex(t).homology_z.H1.generators


def test_pushforward_is_a_chain_map():
    t = census.get("m004")
    cx = spine_complex(t)
    for m in mv.all_sites(t, ("M23", "M02Q", "M02T", "M14")):
        rw = mv.rewrite(t, m)
        h2 = spine_complex(rw.tri).homology_z
        # boundaries go to boundaries
        for e in range(t.n_edges):
            col = [cx.d2[f][e] for f in range(t.n_faces)]
            assert not any(h2.h1_coordinates(pushforward(rw, col)))
        # cycles go to cycles (h1_coordinates raises otherwise)
        for g in _cycle_basis(t):
            h2.h1_coordinates(pushforward(rw, list(g)))


def test_pushforward_carries_omega_classes():
    t = census.get("m004")
    for w in decor.enumerate_prebranchings(t):
        for m in mv.enumerate_sites(t, "M23"):
            for tr in mv.enhance_positive(t, m, w):
                h2 = spine_complex(tr.tri_after).homology_z
                pushed = h2.h1_coordinates(pushforward(tr.rewrite, list(w.chain())))
                assert pushed == h2.h1_coordinates(list(tr.after.chain()))


@given(connected_tables(max_tets=3, orientable=True))
def test_omega_classes_even_on_random_tables(t):
    if not is_orientable(t):
        return
    for w in decor.enumerate_prebranchings(t)[:6]:
        assert omega_class(t, w).even
