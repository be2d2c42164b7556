"""Tabulate how the truncated moduli shrink with depth.

Writes CSV with columns series, depth, eps, delta, delta_approx for

* CJM_K on the l1 family at eps = 2 over cutoffs N,
* B1 and B2 on the harmonic orbit of a_0 at eps = 1 and 1/3 over prefixes N.

    python scripts/modulus_decay.py --out decay.csv
"""

import argparse
import contextlib
import csv
import sys
from fractions import Fraction

from fixlab import conditions as cnd
from fixlab.conditions import ConditionId as C
from fixlab.formats import decimal_str
from fixlab.gallery import build
from fixlab.metric import Point, fmt


def rows(l1_cutoffs, prefixes):
    for n in l1_cutoffs:
        inst = build("KANNAN_L1", max(n, 3))
        d = cnd.modulus_at(C.CJM_K, inst.space, inst.map, cnd.point_domain(inst.space, n), Fraction(2))
        yield "CJM_K l1", n, Fraction(2), d
    harmonic = build("HARMONIC", max(prefixes) + 1)
    a0 = Point("A", 0)
    for n in prefixes:
        dom = cnd.orbit_domain(harmonic.space, harmonic.map, a0, n)
        cons = list(cnd.constraint_stream(C.B1, harmonic.space, harmonic.map, dom))
        yield "B1 harmonic", n, Fraction(1), cnd.modulus_detail(C.B1, harmonic.space, harmonic.map, dom,
                                                                 Fraction(1), cons).delta
        yield "B2 harmonic", n, Fraction(1, 3), cnd.modulus_at(C.B2, harmonic.space, harmonic.map, dom,
                                                                Fraction(1, 3))


def main() -> int:
    ap = argparse.ArgumentParser(description="modulus decay tables")
    ap.add_argument("--l1-cutoffs", default="3,5,10,20,50,100,200")
    ap.add_argument("--prefixes", default="10,50,100,200,400")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    l1 = [int(v) for v in args.l1_cutoffs.split(",")]
    pre = [int(v) for v in args.prefixes.split(",")]
    target = contextlib.nullcontext(sys.stdout) if args.out == "-" else open(args.out, "w", encoding="utf-8")
    with target as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["series", "depth", "eps", "delta", "delta_approx"])
        for series, depth, eps, delta in rows(l1, pre):
            w.writerow([series, depth, fmt(eps), fmt(delta), decimal_str(delta, 6)])
    return 0


if __name__ == "__main__":
    sys.exit(main())
