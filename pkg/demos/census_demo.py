"""Walk through the 2-3 transit census and check it on m004.

Run with ``python3 demos/census_demo.py``.
"""
from btransit import census, decor
from btransit import moves as mv

SHORT = {"NonAmbiguous": "NA", "AmbiguousSliding": "AS", "ForcedAmbiguous": "FA", "Bump": "B"}


def main():
    c = mv.census_types()
    print(f"{len(c.rows)} vertex orders of a 2-3 site, {len(c.types)} types up to rotation")
    for cls, n in sorted(c.class_counts().items()):
        print(f"  {cls:18s} {n}")
    schaeffer = [t.couple for t, _ in c.types if t.schaeffer]
    print(f"Schaeffer types: {len(schaeffer)}")

    # the local rule (pit/source and forcedness) and the typed table agree
    agree = sum(r.ttype.consistent for r in c.rows)
    print(f"rule/table agreement: {agree}/{len(c.rows)}")

    # on a real triangulation the number of enhancements matches the type
    t = census.get("m004")
    print("\nm004, class and number of enhancements at every 2-3 site:")
    for k, b in enumerate(decor.enumerate_branchings(t)):
        row = []
        for m in mv.enumerate_sites(t, "M23"):
            tt = mv.classify_23(t, b, m)
            n = len(mv.enhance_positive(t, m, b))
            row.append(f"{SHORT[tt.cls]}:{n}")
        print(f"  b{k}: " + "  ".join(row))


if __name__ == "__main__":
    main()
