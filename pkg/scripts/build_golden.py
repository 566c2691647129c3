"""Decide every query of golden/queries.json at (2, 2) and write the countermodels.

Run from the repository root:  python3 scripts/build_golden.py [--check]
With --check nothing is written; the script exits 1 if a file would change.
"""

import argparse
import json
import sys
from pathlib import Path

from ffde.search import Bounds, Countermodel, find_countermodel
from ffde.syntax import Signature, parse_formula

GOLDEN = Path(__file__).resolve().parent.parent / "golden"


def decide(q: dict):
    sig = Signature.from_json(q["sig"])
    gamma = [parse_formula(s, sig) for s in q["gamma"]]
    goal = parse_formula(q["goal"], sig)
    return find_countermodel(sig, gamma, goal, Bounds(q.get("stages", 2), q.get("elems", 2)))


def golden_text(verdict: Countermodel) -> str:
    return verdict.model.dumps({"witness_stage": verdict.stage})


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--check", action="store_true")
    args = ap.parse_args()
    stale = 0
    for q in json.loads((GOLDEN / "queries.json").read_text()):
        v = decide(q)
        kind = type(v).__name__
        status = "ok" if kind == q["expect"] else "UNEXPECTED"
        print(f"{q['name']:30s} {kind:16s} {status}")
        if isinstance(v, Countermodel):
            path = GOLDEN / f"{q['name']}.json"
            text = golden_text(v)
            if args.check:
                stale += not path.exists() or path.read_text() != text
            else:
                path.write_text(text, newline="\n")
    sys.exit(1 if stale else 0)


if __name__ == "__main__":
    main()
