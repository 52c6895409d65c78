"""
Small named triangulations used by tests, demos and the CLI.

The two 2-tetrahedron tables are the orientable one-cusp triangulations
with H1 = Z (figure-eight knot complement, m004) and H1 = Z/5 + Z (its
sister, m003).  ``l41`` is a one-tetrahedron triangulation of a punctured
L(4,1): one spherical boundary component, H2(Z) = 0, H2(Z/2) = Z/2.
"""
from .kernel import Triangulation, validate

M004 = [
    [(1, (0, 2, 3, 1)), (1, (2, 1, 3, 0)), (1, (1, 3, 2, 0)), (1, (1, 2, 0, 3))],
    [(0, (0, 3, 1, 2)), (0, (3, 1, 0, 2)), (0, (3, 0, 2, 1)), (0, (2, 0, 1, 3))],
]

M003 = [
    [(1, (0, 1, 3, 2)), (1, (2, 1, 0, 3)), (1, (0, 3, 2, 1)), (1, (1, 0, 2, 3))],
    [(0, (0, 1, 3, 2)), (0, (2, 1, 0, 3)), (0, (0, 3, 2, 1)), (0, (1, 0, 2, 3))],
]

L41 = [
    [(0, (1, 2, 3, 0)), (0, (3, 0, 1, 2)), (0, (1, 2, 3, 0)), (0, (3, 0, 1, 2))],
]

# L(5,1) minus a ball: H2(Z/2) = 0, handy as a contrast to L41
L51 = [
    [(0, (1, 2, 3, 0)), (0, (3, 0, 1, 2)), (0, (2, 0, 3, 1)), (0, (1, 3, 0, 2))],
]

TABLES = {"m004": M004, "m003": M003, "l41": L41, "l51": L51}


def get(name) -> Triangulation:
    try:
        return validate(TABLES[name], name)
    except KeyError:
        raise KeyError(f"unknown census name {name!r}; have {sorted(TABLES)}") from None


def names():
    return sorted(TABLES)
