"""Separation queries over small finite instances.

Runs the standard hold/fail queries exhaustively and, with ``--invariant``,
the census behind "CM_B on a finite space forces every orbit to a fixed
point": every strictly contracting table on every metric up to
``--invariant-points`` points is checked for cycles of length >= 2.

    python scripts/separation_census.py --max-points 4
    python scripts/separation_census.py --invariant --invariant-points 5   # about two minutes
"""

import argparse
import math
import sys
import time

from fixlab.conditions import ConditionId as C
from fixlab.metric import parse_rational_list
from fixlab.search import SearchConfig, _matrices, find_separation

QUERIES = [
    ([C.CM_B], [C.CM_K]),
    ([C.CM_K], [C.CM_B]),
    ([C.CM_B], [C.B1]),
    ([C.CM_K], [C.K_IV]),
    ([C.CM_B, C.B2], [C.B1]),
    ([C.CM_K, C.K_II], [C.K_IV]),
    ([C.B2], [C.B1]),
    ([C.K_IV], [C.CJM_K]),
]


def contracting_tables(m, n):
    t = [0] * n

    def rec(a):
        if a == n:
            yield tuple(t)
            return
        for v in range(n):
            t[a] = v
            if all(m[t[b]][v] < m[b][a] for b in range(a)):
                yield from rec(a + 1)

    yield from rec(0)


def has_long_cycle(t):
    n = len(t)
    for x in range(n):
        y = x
        for _ in range(n):
            y = t[y]
        if t[y] != y:
            return True
    return False


def invariant_census(points, grid):
    maps = bad = 0
    den = 1
    for g in grid:
        den = den * g.denominator // math.gcd(den, g.denominator)
    for n in range(2, points + 1):
        for m in _matrices(n, grid):
            mi = [[int(v * den) for v in row] for row in m]
            for t in contracting_tables(mi, n):
                maps += 1
                bad += has_long_cycle(t)
    return maps, bad


def main() -> int:
    ap = argparse.ArgumentParser(description="finite separation census")
    ap.add_argument("--max-points", type=int, default=3)
    ap.add_argument("--grid", default="1/2,1,3/2,2")
    ap.add_argument("--invariant", action="store_true")
    ap.add_argument("--invariant-points", type=int, default=4)
    args = ap.parse_args()
    grid = tuple(parse_rational_list(args.grid))
    cfg = SearchConfig(args.max_points, grid)
    for hold, fail in QUERIES:
        t0 = time.perf_counter()
        res = find_separation(hold, fail, cfg)
        print(f"hold {'+'.join(c.value for c in hold):10s} fail {'+'.join(c.value for c in fail):6s} "
              f"[{time.perf_counter() - t0:6.1f}s] {res.certificate()}")
    if args.invariant:
        t0 = time.perf_counter()
        maps, bad = invariant_census(args.invariant_points, grid)
        print(f"CM_B tables up to {args.invariant_points} points: {maps} checked, {bad} with a cycle "
              f"[{time.perf_counter() - t0:.1f}s]")
        return 1 if bad else 0
    return 0


if __name__ == "__main__":
    sys.exit(main())
