"""Certify every gallery example and print one line per fact.

    python scripts/reproduce_gallery.py --cutoffs 10,50,200
"""

import argparse
import sys
import time

from fixlab.gallery import GalleryId, run_certification


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--cutoffs", default="10,50,200")
    args = ap.parse_args()
    failed = 0
    for cutoff in (int(c) for c in args.cutoffs.split(",")):
        for gid in GalleryId:
            t0 = time.perf_counter()
            rep = run_certification(gid, cutoff)
            dt = time.perf_counter() - t0
            print(f"{gid.value} cutoff={cutoff}: {'pass' if rep.passed else 'FAIL'} ({dt:.2f}s)")
            for r in rep.results:
                mark = "ok  " if r.outcome.passed else "FAIL"
                print(f"  {mark} {r.fact.description}: {r.outcome.detail}")
            failed += not rep.passed
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
