"""Command-line entry point: ``ffde <command> ...``.

Exit codes: 0 success, 1 a negative verdict (invalid model, rejected proof,
countermodel, fuzz violation), 2 malformed input with a JSON error on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

from . import oracle, proof
from .kripke import KripkeModel, validate
from .search import Bounds, Countermodel, find_countermodel, fuzz_soundness
from .syntax import FFDE, FN4, Signature, parse_formula, render
from .valuation import eval as eval_sentence, four_valued


class InputError(Exception):
    """Malformed input; reported with exit code 2."""


def _color(text: str, ok: bool) -> str:
    if os.environ.get("FFDE_COLOR", "1") == "0" or not sys.stdout.isatty():
        return text
    return f"\033[{32 if ok else 31}m{text}\033[0m"


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, ensure_ascii=False))


def _read_formulas(path: str, sig: Signature) -> list:
    """One formula per line; blank lines and ``#`` comments are skipped."""
    out = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            out.append(parse_formula(line, sig))
    return out


def _signature(args) -> Signature:
    sig = Signature.load(args.sig)
    if getattr(args, "logic", None):
        sig = sig.with_logic(args.logic)
    return sig


# -- commands -----------------------------------------------------------------

def cmd_validate_model(args) -> int:
    sig = _signature(args)
    m = KripkeModel.load(args.model, sig)
    if args.no_persistence_safe:
        m = m.evolve(persistence_safe=False)
    rep = validate(m)
    _emit({"ok": rep.ok, "violations": rep.to_json()})
    return 0 if rep.ok else 1


def cmd_eval(args) -> int:
    sig = _signature(args)
    m = KripkeModel.load(args.model, sig)
    f = parse_formula(args.formula, sig)
    if args.stage not in m.stages:
        raise InputError(f"unknown stage {args.stage!r}")
    if args.four:
        v = four_valued(m, args.stage, f).value
        print(_color(v, v in ("T", "B")))
    else:
        v = eval_sentence(m, args.stage, f)
        print(_color(str(v), bool(v)))
    return 0


def cmd_check_proof(args) -> int:
    sig = _signature(args)
    data = json.loads(Path(args.proof).read_text(encoding="utf-8"))
    full = proof.signature_for(data, sig)
    d = proof.from_json(data, sig)
    try:
        seq = proof.check(d, full, args.mode)
    except proof.ProofError as e:
        _error(e.code, str(e), path="/".join(map(str, e.path)))
        return 1
    print(_color(str(seq), True))
    if args.premises:
        premises = set(_read_formulas(args.premises, full))
        extra = sorted(render(a) for a in seq.assumptions - premises)
        if extra:
            _error("UndeclaredAssumption", "assumptions not among the premises", assumptions=extra)
            return 1
    return 0


def cmd_decide(args) -> int:
    sig = _signature(args)
    gamma = _read_formulas(args.gamma, sig) if args.gamma else []
    goal = parse_formula(args.goal, sig)
    verdict = find_countermodel(sig, gamma, goal, Bounds(args.stages, args.elems), sig.logic)
    out = verdict.to_json()
    if isinstance(verdict, Countermodel):
        out.pop("model")
        if args.out:
            Path(args.out).write_text(verdict.model.dumps({"witness_stage": verdict.stage}),
                                      encoding="utf-8", newline="\n")
            out["out"] = args.out
        else:
            out["model"] = verdict.model.to_json()
    _emit(out)
    return 1 if isinstance(verdict, Countermodel) else 0


def cmd_fuzz(args) -> int:
    sig = _signature(args)
    rep = fuzz_soundness(sig, Bounds(args.stages, args.elems), args.n, seed=args.seed,
                         mode=args.mode)
    _emit(rep.summary())
    if args.out:
        Path(args.out).write_text(rep.to_jsonl(), encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(rep.to_jsonl())
    return 0 if rep.ok else 1


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")
_KEYWORDS = {"forall", "exists", "D"}


def cmd_oracle(args) -> int:
    texts = [args.goal]
    if args.gamma:
        texts += [ln.strip() for ln in Path(args.gamma).read_text(encoding="utf-8").splitlines()
                  if ln.strip() and not ln.strip().startswith("#")]
    atoms = {t for s in texts for t in _IDENT.findall(s)} - _KEYWORDS
    sig = oracle.propositional_signature(atoms)
    forms = [parse_formula(s, sig) for s in texts]
    verdict = oracle.fde_consequence(forms[1:], forms[0])
    _emit(verdict.to_json())
    return 0 if isinstance(verdict, oracle.Valid) else 1


# -- wiring -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ffde", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def with_sig(p):
        p.add_argument("-s", "--sig", required=True, help="signature JSON file")
        return p

    p = with_sig(sub.add_parser("validate-model", help="check a model against every condition"))
    p.add_argument("-m", "--model", required=True)
    p.add_argument("--no-persistence-safe", action="store_true",
                   help="validate as a literal model without down-closed definedness")
    p.set_defaults(func=cmd_validate_model)

    p = with_sig(sub.add_parser("eval", help="evaluate a sentence at a stage"))
    p.add_argument("-m", "--model", required=True)
    p.add_argument("-w", "--stage", required=True)
    p.add_argument("-f", "--formula", required=True)
    p.add_argument("--four", action="store_true", help="print T/F/B/N instead of 0/1")
    p.set_defaults(func=cmd_eval)

    p = with_sig(sub.add_parser("check-proof", help="check a derivation file"))
    p.add_argument("-p", "--proof", required=True)
    p.add_argument("--mode", choices=proof.MODES, default=proof.STRICT)
    p.add_argument("--premises", help="file of allowed assumptions, one formula per line")
    p.set_defaults(func=cmd_check_proof)

    p = with_sig(sub.add_parser("decide", help="bounded countermodel search"))
    p.add_argument("--gamma", help="file of premises, one formula per line")
    p.add_argument("--goal", required=True)
    p.add_argument("--stages", type=int, default=2)
    p.add_argument("--elems", type=int, default=2)
    p.add_argument("--logic", choices=(FFDE, FN4))
    p.add_argument("--out", help="write the countermodel here")
    p.set_defaults(func=cmd_decide)

    p = with_sig(sub.add_parser("fuzz", help="soundness fuzzing of random derivations"))
    p.add_argument("-n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--stages", type=int, default=2)
    p.add_argument("--elems", type=int, default=2)
    p.add_argument("--mode", choices=proof.MODES, default=proof.STRICT)
    p.add_argument("--logic", choices=(FFDE, FN4))
    p.add_argument("--out", help="write violations as JSON lines here")
    p.set_defaults(func=cmd_fuzz)

    p = sub.add_parser("oracle", help="propositional FDE consequence by brute force")
    p.add_argument("--gamma")
    p.add_argument("--goal", required=True)
    p.set_defaults(func=cmd_oracle)
    return ap


def _error(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra},
                                sort_keys=True, ensure_ascii=False) + "\n")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        if e.code not in (0, None):
            _error("UsageError", "invalid arguments")
            return 2
        return 0
    try:
        return args.func(args)
    except (InputError, OSError, ValueError, KeyError, TypeError) as e:
        # ValueError covers syntax, signature, proof-format and json errors
        _error(type(e).__name__, str(e))
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
