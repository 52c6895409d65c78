"""Connect two branchings of m004, first with 1-4 moves allowed and then
with ideal moves only, and replay both certificates.

Run with ``python3 demos/connect_demo.py``.
"""
import time
from collections import Counter

from btransit import census, decor
from btransit import connect as cn


def describe(seq):
    kinds = Counter(seq.kinds)
    return ", ".join(f"{k} x{n}" for k, n in sorted(kinds.items()))


def main():
    t = census.get("m004")
    bs = decor.enumerate_branchings(t)
    print("branchings of m004:", [b.bits for b in bs])

    t0 = time.perf_counter()
    seq = cn.connect_completed(t, bs[0], bs[3])
    print(f"\ncompleted moves b0 -> b3: {len(seq)} steps ({describe(seq)})")
    print("  replays:", seq.verify(), f"[{time.perf_counter() - t0:.1f} s]")

    t0 = time.perf_counter()
    seq = cn.connect_ideal(t, bs[0], bs[1])
    print(f"\nideal moves b0 -> b1: {len(seq)} steps ({describe(seq)})")
    print("  only ideal kinds:", seq.ideal)
    print("  replays:", seq.verify(), f"[{time.perf_counter() - t0:.1f} s]")
    for note in seq.notes[:3]:
        print("  note:", note)

    # the m003 census table carries no branching until 2-3 moves are made
    t3, pre = cn.make_branchable(census.get("m003"))
    print(f"\nm003 becomes branchable after {len(pre)} 2-3 moves "
          f"({t3.n_tets} tetrahedra, {len(decor.enumerate_branchings(t3))} branchings)")


if __name__ == "__main__":
    main()
