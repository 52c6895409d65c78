"""
Fundamental 3-cycle of a branched oriented triangulation and the Euler
cochain ``d(R) = 1 - t(R)`` on the spine regions.
"""
from __future__ import annotations

from dataclasses import dataclass

from ..decor import Branching, region_signs, tet_signs
from ..kernel import orient
from .spine import region_boundary_word, spine_complex


@dataclass(frozen=True)
class FundamentalCycle:
    coefficients: tuple   # *_(Delta, b) per tetrahedron
    boundary: tuple       # coefficient per face class, b-ordered

    @property
    def is_cycle(self):
        return not any(self.boundary)


def fundamental_cycle(tri, b: Branching, eps=None) -> FundamentalCycle:
    """``Z = sum *_Delta [Delta]`` with each simplex ordered by ``b``.

    A face class is oriented by the order ``b`` puts on its vertices, so
    the face opposite the vertex of rank ``k`` enters ``d[Delta]`` with sign
    ``(-1)^k``.
    """
    if eps is None:
        eps = orient(tri)      # raises NonOrientable
    stars = tet_signs(tri, b, eps)
    sk = tri.skeleta
    bd = [0] * tri.n_faces
    for i in range(tri.n_tets):
        rk = b.ranks(i)
        for f in range(4):
            bd[sk.face_of[(i, f)]] += stars[i] * (-1) ** rk[f]
    z = FundamentalCycle(stars, tuple(bd))
    assert z.is_cycle, "fundamental cycle has nonzero boundary"
    return z


@dataclass(frozen=True)
class EulerCochain:
    values: tuple      # d(R) per region (edge class)
    tangencies: tuple  # t(R)
    maw: tuple         # per region: maw flags along its boundary word

    @property
    def total(self):
        return sum(self.values)

    def as_json(self):
        return {"d": list(self.values), "t": list(self.tangencies), "sum": self.total}


def maw_flags(tri, b: Branching, eps=None):
    """For every region, one flag per letter of its boundary word: True
    when the region is the maw at that spine edge, i.e. its orientation
    induces the non-prevailing orientation there."""
    beta = region_signs(tri, b, eps)
    d2 = spine_complex(tri).d2
    prevail = [1 if sum(d2[f][e] * beta[e] for e in range(tri.n_edges)) > 0 else -1
               for f in range(tri.n_faces)]
    return tuple(tuple(s * beta[e] != prevail[f] for f, s in region_boundary_word(tri, e))
                 for e in range(tri.n_edges))


def euler_cochain(tri, b: Branching, eps=None) -> EulerCochain:
    """``t(R)`` is half the number of switches between maw and non-maw
    letters going once around the boundary of ``R``: each tangency of
    the foliation with the boundary separates a maw stretch from a
    non-maw one."""
    if eps is None:
        eps = orient(tri)
    flags = maw_flags(tri, b, eps)
    ts = []
    for fl in flags:
        sw = sum(fl[k] != fl[k - 1] for k in range(len(fl)))
        ts.append(sw // 2)
    values = tuple(1 - t for t in ts)
    ec = EulerCochain(values, tuple(ts), flags)
    assert ec.total == tri.euler_characteristic(), "sum of d(R) differs from chi(M)"
    return ec
