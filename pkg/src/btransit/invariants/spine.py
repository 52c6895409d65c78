"""
Cellular chain complex of the dual standard spine and its homology.

Cells: one vertex per tetrahedron, one edge per face class, one region per
edge class.  Reference orientations depend only on the gluing table:

* the spine edge dual to a face class points *into* the first side of the
  class (``FaceClass.sides[0]``);
* the region dual to an edge class is oriented by the edge walk starting at
  the class representative.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

from .. import snf
from ..kernel import Triangulation


@dataclass(frozen=True)
class SpineComplex:
    tri: Triangulation
    d1: tuple  # n_tets x n_faces
    d2: tuple  # n_faces x n_edges

    @property
    def n_cells(self):
        t = self.tri
        return (t.n_tets, t.n_faces, t.n_edges)

    def boundary_word(self, region):
        """Cyclic list of (face class, +-1) along the boundary of a region."""
        return region_boundary_word(self.tri, region)

    @cached_property
    def homology_z(self):
        return homology(self, "Z")

    @cached_property
    def homology_z2(self):
        return homology(self, "Z/2")


def region_boundary_word(tri: Triangulation, region: int):
    sk = tri.skeleta
    word = []
    for (i, a, b, c, d) in sk.edges[region].link:
        j, p = tri.gluings[i][d]
        fc = sk.faces[sk.face_of[(i, d)]]
        word.append((fc.index, 1 if fc.sides[0] == (j, p[d]) else -1))
    return word


def spine_complex(tri: Triangulation) -> SpineComplex:
    cached = tri._cache.get("spine")
    if cached is not None:
        return cached
    sk = tri.skeleta
    n, nf, ne = tri.n_tets, tri.n_faces, tri.n_edges
    d1 = snf.zeros(n, nf)
    for fc in sk.faces:
        (i, _), (j, _) = fc.sides
        d1[i][fc.index] += 1
        d1[j][fc.index] -= 1
    d2 = snf.zeros(nf, ne)
    for e in range(ne):
        for f, s in region_boundary_word(tri, e):
            d2[f][e] += s
    cx = SpineComplex(tri, tuple(map(tuple, d1)), tuple(map(tuple, d2)))
    tri._cache["spine"] = cx
    return cx


@dataclass(frozen=True)
class HomologyGroup:
    """An abelian group Z^rank + sum Z/t for t in torsion (Z coefficients)
    or (Z/2)^rank (Z/2 coefficients), with representative cycles."""

    degree: int
    coefficients: str
    rank: int
    torsion: tuple
    generators: tuple  # cycles, one per invariant factor (torsion first)

    def __str__(self):
        if self.coefficients == "Z/2":
            parts = ["Z/2"] * self.rank
        else:
            parts = [f"Z/{t}" for t in self.torsion] + ["Z"] * self.rank
        return " + ".join(parts) if parts else "0"

    def as_json(self):
        return {"rank": self.rank, "torsion": list(self.torsion), "group": str(self)}


@dataclass(frozen=True)
class Homology:
    H0: HomologyGroup
    H1: HomologyGroup
    H2: HomologyGroup
    _h1_data: tuple = ()

    def __getitem__(self, k):
        return (self.H0, self.H1, self.H2)[k]

    def h1_coordinates(self, cycle):
        """SNF-normalised coordinates of a 1-cycle: torsion entries reduced
        modulo their orders, followed by the free coordinates."""
        Vinv, r1, U, diag, k = self._h1_data
        x = snf.matvec(Vinv, list(cycle))
        if any(x[:r1]):
            raise ValueError("not a cycle")
        y = snf.matvec(U, x[r1:])
        coords = []
        for i, d in enumerate(diag):
            if d > 1:
                coords.append(y[i] % d)
        coords.extend(y[len(diag):])
        return tuple(coords)


def _cycle_space(d, n_cols):
    """Kernel basis of ``d`` plus data to express cycles in that basis."""
    sf = snf.smith_normal_form([list(r) for r in d], n_cols)
    r = sf.rank
    basis = [[sf.V[row][c] for row in range(n_cols)] for c in range(r, n_cols)]
    return sf, r, basis


def homology(cx: SpineComplex, coefficients="Z") -> Homology:
    n, nf, ne = cx.n_cells
    d1 = [list(r) for r in cx.d1]
    d2 = [list(r) for r in cx.d2]
    if coefficients in ("Z/2", "Z2", 2):
        r1 = snf.rank_mod2(d1) if n and nf else 0
        r2 = snf.rank_mod2(d2) if nf and ne else 0
        z2 = snf.kernel_mod2(d2, ne)
        z1 = snf.kernel_mod2(d1, nf)
        return Homology(
            HomologyGroup(0, "Z/2", n - r1, (), ()),
            HomologyGroup(1, "Z/2", nf - r1 - r2, (), tuple(map(tuple, z1))),
            HomologyGroup(2, "Z/2", ne - r2, (), tuple(map(tuple, z2))),
        )
    if coefficients != "Z":
        raise ValueError(f"unsupported coefficients {coefficients!r}")

    # H0 = Z^n / im d1
    sf1 = snf.smith_normal_form(d1, nf)
    h0_tors = tuple(d for d in sf1.diag if d > 1)
    H0 = HomologyGroup(0, "Z", n - sf1.rank, h0_tors, ())

    # H1 = ker d1 / im d2
    r1 = sf1.rank
    k = nf - r1
    K = [[sf1.V[row][c] for row in range(nf)] for c in range(r1, nf)]  # cycles
    C = snf.matmul(sf1.Vinv, d2)[r1:] if ne else []
    if k and ne:
        sfc = snf.smith_normal_form(C, ne)
        U, Uinv, diag = sfc.U, sfc.Uinv, sfc.diag
    else:
        U, Uinv, diag = snf.identity(k), snf.identity(k), []
    gens = []
    for col in range(k):
        coeff = [Uinv[row][col] for row in range(k)]
        gens.append(tuple(sum(c * K[m][f] for m, c in enumerate(coeff)) for f in range(nf)))
    torsion = tuple(d for d in diag if d > 1)
    n_unit = sum(1 for d in diag if d == 1)
    h1_gens = tuple(g for g, d in zip(gens, diag) if d > 1) + tuple(gens[len(diag):])
    H1 = HomologyGroup(1, "Z", k - len(diag), torsion, h1_gens)
    del n_unit

    # H2 = ker d2 (no 3-cells)
    if ne:
        _, r2, z2 = _cycle_space(d2, ne) if nf else (None, 0, snf.identity(ne))
    else:
        z2 = []
    H2 = HomologyGroup(2, "Z", len(z2), (), tuple(map(tuple, z2)))
    return Homology(H0, H1, H2, (sf1.Vinv, r1, U, tuple(diag), k))
