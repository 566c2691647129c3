"""Compare the propositional oracle with the Kripke valuation.

    python3 scripts/oracle_sweep.py [--atoms 2] [--depth 3]
"""

import argparse
import json
import time

from ffde.oracle import compare_with_kripke


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--atoms", type=int, default=2)
    ap.add_argument("--depth", type=int, default=3)
    args = ap.parse_args()
    t = time.perf_counter()
    rep = compare_with_kripke(args.atoms, args.depth)
    print(json.dumps({**rep.to_json(), "seconds": round(time.perf_counter() - t, 1)}))


if __name__ == "__main__":
    main()
