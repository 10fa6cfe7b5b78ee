#!/usr/bin/env python3
"""Sweep the gap parameter of the 27-item grid instance.

The structured nonexistence argument needs a strict gap around 1/2: values
1/2 - eps vs 1/2 + eps with 0 < eps <= 1/6 (the upper limit keeps the inner
functions subadditive).  This script re-runs the exhaustive check across the
admissible range and at eps = 0, where the strict comparisons collapse and
allocations reappear.
"""

import argparse
import sys
import time
from fractions import Fraction

from mmslab.counterexamples import structured_check_27


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--eps", nargs="*", default=["0", "1/100", "1/12", "1/8", "1/6"],
        help="gap values to sweep (exact rationals)",
    )
    args = parser.parse_args()
    for text in args.eps:
        eps = Fraction(text)
        t0 = time.perf_counter()
        res = structured_check_27(eps)
        verdict = "no allocation" if not any(p.exists for p in res.placements) else (
            "allocations exist for placements "
            + ",".join(str(p.full_agent) for p in res.placements if p.exists)
        )
        print(f"eps = {str(eps):>5}: {verdict}  "
              f"({sum(p.branches for p in res.placements)} branches, "
              f"{time.perf_counter() - t0:.2f}s)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
