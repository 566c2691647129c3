"""Persistence, exhaustively at (2, 2) over {c, P/1} and randomly at (3, 3).

    python3 scripts/persistence_sweep.py [--depth 3] [--random-models 100]
"""

import argparse
import json
import time

from ffde.search import Bounds, count_models, enumerate_models
from ffde.sweep import persistence_sweep, random_persistence
from ffde.syntax import FN4, Signature


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--depth", type=int, default=3)
    ap.add_argument("--random-models", type=int, default=100)
    ap.add_argument("--sentences", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sig = Signature(("c",), {"P": 1}, FN4)
    b = Bounds(2, 2)
    t = time.perf_counter()
    rep = persistence_sweep(enumerate_models(sig, b), sig, args.depth)
    print(json.dumps({"sweep": rep.to_json(), "expected_models": count_models(sig, b),
                      "seconds": round(time.perf_counter() - t, 1)}))
    for i, v in rep.violations[:10]:
        print(json.dumps({"model": i, **v.to_json()}))

    wide = Signature(("c1", "c2"), {"P": 1, "R": 2}, FN4)
    t = time.perf_counter()
    rnd = random_persistence(wide, Bounds(3, 3), args.random_models, args.sentences, args.seed)
    print(json.dumps({"random": rnd.to_json(), "seconds": round(time.perf_counter() - t, 1)}))


if __name__ == "__main__":
    main()
