"""Randomized checks of the two substitution lemmas.

Diagram lemma: if ``I(c, w) = a`` then ``A(c/x)`` and ``A(@a/x)`` get the same value
at ``w``, the latter read in the diagram model.

Re-pointing lemma: if ``c1`` does not occur in ``A`` and is re-pointed to the
interpretation of ``c2``, then ``A(c1/x)`` in the new model agrees with
``A(c2/x)`` in the old one at every stage where ``c2`` is defined.

Both are checked for the formula and its negation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .generate import random_formula
from .kripke import KripkeModel, diagram, diagram_name
from .search import Bounds, random_model
from .syntax import Const, Formula, Neg, Signature, render, substitute
from .valuation import Valuation


def _pair(val: Valuation, w: str, f: Formula) -> tuple[int, int]:
    return val(w, f), val.neg(w, f)


def lemma_diagram(m: KripkeModel, sig: Signature, a_formula: Formula, x: str, c: str) -> list[str]:
    """Stages where the diagram substitution lemma fails (empty if it holds)."""
    _, dm = diagram(m, sig)
    v, dv = Valuation(m), Valuation(dm)
    bad = []
    for w in m.stages:
        a = m.interp(c, w)
        if a is None:
            continue
        if _pair(v, w, substitute(a_formula, x, Const(c))) != \
                _pair(dv, w, substitute(a_formula, x, Const(diagram_name(a)))):
            bad.append(w)
    return bad


def repoint(m: KripkeModel, c1: str, c2: str) -> KripkeModel:
    """``m`` with ``c1`` interpreted exactly as ``c2``."""
    consts = dict(m.constants)
    consts[c1] = dict(m.constants.get(c2, {}))
    return m.evolve(constants=consts)


def lemma_repoint(m: KripkeModel, a_formula: Formula, x: str, c1: str, c2: str) -> list[str]:
    v, rv = Valuation(m), Valuation(repoint(m, c1, c2))
    bad = []
    for w in m.stages:
        if m.interp(c2, w) is None:
            continue
        if _pair(rv, w, substitute(a_formula, x, Const(c1))) != \
                _pair(v, w, substitute(a_formula, x, Const(c2))):
            bad.append(w)
    return bad


@dataclass
class LemmaReport:
    models: int = 0
    pairs: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"models": self.models, "pairs": self.pairs, "failures": len(self.failures)}


FRESH = "c#fresh"


def substitution_lemmas(sig: Signature, bounds: Bounds, models: int = 100, pairs: int = 100,
                        seed: int = 0, depth: int = 3) -> LemmaReport:
    if not sig.constants:
        raise ValueError("the lemmas need at least one constant")
    rng = random.Random(seed)
    rep = LemmaReport()
    for i in range(models):
        m = random_model(sig, bounds, rng.randrange(2 ** 32))
        wide = m.evolve(constants={**m.constants, FRESH: {}})
        rep.models += 1
        for _ in range(pairs):
            a = random_formula(rng, sig, rng.randint(0, depth), free=("x",))
            c = rng.choice(sig.constants)
            rep.pairs += 1
            for name, bad in (("diagram", lemma_diagram(m, sig, a, "x", c)),
                              ("repoint", lemma_repoint(wide, a, "x", FRESH, c))):
                if bad:
                    rep.failures.append({"model": i, "lemma": name, "formula": render(a),
                                         "constant": c, "stages": bad})
    return rep
