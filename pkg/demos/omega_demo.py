"""The class [omega] of a pre-branching in H1, and how it behaves under
ideal pre-branched transits.

Run with ``python3 demos/omega_demo.py``.
"""
import random

from btransit import census, decor
from btransit import moves as mv
from btransit.invariants.omega import omega_class, transit_classes


def main():
    for name in ("m004", "m003", "l41"):
        t = census.get(name)
        print(f"{name}:")
        for w in decor.enumerate_prebranchings(t):
            om = omega_class(t, w)
            print(f"  coords {list(om.coordinates)} orders {list(om.torsion)} "
                  f"even={om.even} alpha={om.alpha}")

    # induced pre-branchings of branchings are boundaries
    t = census.get("m004")
    zero = all(omega_class(t, decor.induced_prebranching(t, b)).is_zero
               for b in decor.enumerate_branchings(t))
    print("\nevery omega_b on m004 has [omega_b] = 0:", zero)

    # random walk of ideal positive pb-transits; the pushed class should
    # equal the class recomputed on the new triangulation
    rng = random.Random(3)
    w = decor.enumerate_prebranchings(t)[1]
    changes = 0
    for step in range(30):
        kind = rng.choice(("M23", "M02Q"))
        sites = mv.enumerate_sites(t, kind)
        tr = rng.choice(mv.enhance_positive(t, rng.choice(sites), w))
        pushed, actual = transit_classes(tr)
        changes += pushed != actual
        t, w = tr.tri_after, tr.after
        if t.n_tets > 8:
            break
    print(f"walk ended at {t.n_tets} tetrahedra, class changes: {changes}")


if __name__ == "__main__":
    main()
