"""
Transverse-measure cone: weights ``z`` on the spine regions satisfying the
switching condition ``z(e0) = z(e1) + z(e2)`` along every spine edge,
``e0`` being the maw region there.  Exact rational arithmetic throughout.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import sympy

from .. import lp
from ..decor import Branching, region_signs
from ..kernel import orient
from ..moves import region_correspondence, transported_orientation
from .spine import spine_complex


class InvalidTransit(ValueError):
    pass


def _frac(x):
    x = sympy.Rational(x)
    return Fraction(int(x.p), int(x.q))


@dataclass(frozen=True)
class MeasureConeModel:
    tri: object
    branching: Branching
    equations: tuple   # one row per spine edge: +-1 on e1, e2, -+1 on e0
    basis: tuple       # solution space basis, tuples of Fractions
    positive: bool     # M+ nonempty
    witness: tuple | None   # a strictly positive solution when positive

    @property
    def dim(self):
        return len(self.basis)

    def satisfies(self, z):
        return all(sum(c * x for c, x in zip(row, z)) == 0 for row in self.equations)

    def combine(self, coeffs):
        n = self.tri.n_edges
        return tuple(sum((Fraction(c) * v[e] for c, v in zip(coeffs, self.basis)), Fraction(0))
                     for e in range(n))

    def as_json(self):
        return {"dim": self.dim, "positive": self.positive,
                "basis": [[str(x) for x in v] for v in self.basis]}


def switching_equations(tri, b: Branching, eps=None):
    """Rows of ``d2 * diag(beta)``: at each spine edge the two prevailing
    regions enter with the sign of the edge orientation, the maw with
    the opposite sign."""
    beta = region_signs(tri, b, eps)
    d2 = spine_complex(tri).d2
    return tuple(tuple(d2[f][e] * beta[e] for e in range(tri.n_edges)) for f in range(tri.n_faces))


def _nullspace(rows, n):
    if not n:
        return []
    M = sympy.Matrix(rows) if rows else sympy.zeros(0, n)
    out = []
    for v in M.nullspace():
        v = [_frac(x) for x in v]
        out.append(tuple(v))
    return out


def _lp_over_basis(basis, n, objective=None):
    """LP over ``z = sum y_k basis_k`` (``y = y+ - y-``).

    Default: maximise ``t`` subject to ``z_e >= t`` and ``t <= 1``.
    With ``objective``: maximise ``objective . z`` over ``z >= 0``,
    ``sum z = 1``.  Returns (value, z) or None when infeasible.
    """
    m = len(basis)

    def zrow(e):
        return [basis[k][e] for k in range(m)] + [-basis[k][e] for k in range(m)]

    if objective is None:
        A = [[-x for x in zrow(e)] + [1] for e in range(n)] + [[0] * (2 * m) + [1]]
        res = lp.minimize([0] * (2 * m) + [-1], A, [0] * n + [1])
    else:
        A = [[-x for x in zrow(e)] for e in range(n)]
        tot = [sum(basis[k][e] for e in range(n)) for k in range(m)]
        c = [-sum(objective[e] * zrow(e)[j] for e in range(n)) for j in range(2 * m)]
        res = lp.minimize(c, A, [0] * n, [tot + [-x for x in tot]], [1])
    if res.status != "optimal":
        return None
    y = [res.x[k] - res.x[m + k] for k in range(m)]
    z = tuple(sum((y[k] * basis[k][e] for k in range(m)), Fraction(0)) for e in range(n))
    return -res.value, z


def measure_cone(tri, b: Branching, eps=None) -> MeasureConeModel:
    if eps is None:
        eps = orient(tri)
    eqs = switching_equations(tri, b, eps)
    n = tri.n_edges
    basis = _nullspace([list(r) for r in eqs], n)
    positive, witness = False, None
    if basis:
        val, z = _lp_over_basis(basis, n)
        if val > 0:
            positive, witness = True, z
    return MeasureConeModel(tri, b, eqs, tuple(basis), positive, witness)


def nonnegative_samples(model: MeasureConeModel, k=4, seed=0):
    """Nonzero nonnegative solutions: vertices of ``{z >= 0, sum z = 1}``
    picked by random objectives (empty when the cone is ``{0}``)."""
    if not model.basis:
        return []
    rng = random.Random(seed)
    n = model.tri.n_edges
    out = []
    for _ in range(k):
        obj = [rng.randint(-5, 5) for _ in range(n)]
        res = _lp_over_basis(model.basis, n, objective=obj)
        if res is None:         # no nonzero nonnegative solution
            return []
        z = res[1]
        if z not in out:
            out.append(z)
    return out


# --------------------------------------------------------------------------
# transport along a transit

@dataclass(frozen=True)
class ConeTransport:
    source: MeasureConeModel
    target: MeasureConeModel
    correspondence: tuple
    forward: tuple     # target coordinates of each source basis vector's image
    backward: tuple

    def apply(self, z):
        return _solve_through(self.correspondence, z, self.target)

    def apply_inverse(self, z2):
        return _solve_back(self.correspondence, z2, self.source)


def _solve_through(corr, z, target):
    """The unique target solution agreeing with ``z`` on persistent regions."""
    rows, rhs = [], []
    for e2, e in enumerate(corr):
        if e is not None:
            rows.append([v[e2] for v in target.basis])
            rhs.append(z[e])
    return _lift(rows, rhs, target)


def _solve_back(corr, z2, source):
    rows, rhs = [], []
    for e2, e in enumerate(corr):
        if e is not None:
            rows.append([v[e] for v in source.basis])
            rhs.append(z2[e2])
    return _lift(rows, rhs, source)


def _lift(rows, rhs, model):
    m = model.dim
    if m == 0:
        if any(rhs):
            raise InvalidTransit("persistent weights admit no solution")
        return tuple(Fraction(0) for _ in range(model.tri.n_edges))
    A = sympy.Matrix(rows) if rows else sympy.zeros(0, m)
    if A.rank() < m:
        raise InvalidTransit("persistent regions do not determine the solution")
    sol, params = A.gauss_jordan_solve(sympy.Matrix(rhs))
    if params.shape[0]:
        raise InvalidTransit("persistent regions do not determine the solution")
    y = [_frac(x) for x in sol]
    z = model.combine(y)
    return z


def transport(model: MeasureConeModel, transit) -> MeasureConeModel:
    """Cone model of the transit's target, with the transport map checked
    to be a linear bijection between solution spaces."""
    return transport_map(model, transit).target


def transport_map(model: MeasureConeModel, transit) -> ConeTransport:
    rw = transit.rewrite
    if rw is None or rw.before is not model.tri and rw.before.gluings != model.tri.gluings:
        raise InvalidTransit("transit does not start at this triangulation")
    if transit.before != model.branching:
        raise InvalidTransit("transit starts from another branching")
    eps2 = None
    if rw.tri.n_tets:
        eps2 = transported_orientation(rw, orient(model.tri))
    target = measure_cone(rw.tri, transit.after, eps2)
    if target.dim != model.dim:
        raise InvalidTransit("solution spaces of different dimension")
    corr = tuple(region_correspondence(rw))
    fwd = tuple(_solve_through(corr, v, target) for v in model.basis)
    bwd = tuple(_solve_back(corr, v, model) for v in target.basis)
    return ConeTransport(model, target, corr, fwd, bwd)
