"""Soundness fuzzing on the capped signature, strict then permissive.

    python3 scripts/run_fuzz.py [--n 500] [--seed 42] [--out results/fuzz]

The permissive run reuses the strict corpus and adds the NeqI-on-D
derivation, which has a countermodel.
"""

import argparse
import json
import time
from pathlib import Path

from ffde.generate import seeded_neqi_on_d
from ffde.proof import PERMISSIVE, STRICT
from ffde.search import Bounds, fuzz_corpus, fuzz_soundness
from ffde.syntax import Signature


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=500)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--stages", type=int, default=2)
    ap.add_argument("--elems", type=int, default=2)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()
    sig = Signature(("c1", "c2"), {"P": 1})
    b = Bounds(args.stages, args.elems)
    corpus = fuzz_corpus(sig, args.n, args.seed)
    runs = [(STRICT, []), (PERMISSIVE, [seeded_neqi_on_d(sig)])]
    for mode, extra in runs:
        t = time.perf_counter()
        rep = fuzz_soundness(sig, b, args.n, args.seed, mode=mode, extra=extra, corpus=corpus)
        print(json.dumps({**rep.summary(), "seconds": round(time.perf_counter() - t, 1)}))
        if args.out:
            args.out.mkdir(parents=True, exist_ok=True)
            (args.out / f"{mode}.jsonl").write_text(rep.to_jsonl())


if __name__ == "__main__":
    main()
