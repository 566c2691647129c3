"""Propositional first-degree entailment, computed directly on value pairs.

An assignment gives each 0-ary atom a pair ``(plus, minus)``.  The positive
and negative clauses are evaluated separately, exactly as in the Kripke
valuation but without stages or terms, so the two implementations can be
checked against each other on their common fragment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Iterator

from .kripke import KripkeModel
from .syntax import And, Atom, Formula, Neg, Or, Signature, render
from .valuation import FourValue, Valuation

Pair = tuple[int, int]
PAIRS: tuple[Pair, ...] = ((0, 0), (0, 1), (1, 0), (1, 1))


class FragmentError(ValueError):
    """Formula outside the propositional {~, &, |} fragment."""


def atoms_of(f: Formula) -> set[str]:
    if isinstance(f, Atom):
        if f.terms:
            raise FragmentError(f"{render(f)}: only 0-ary atoms are propositional")
        return {f.pred}
    if isinstance(f, Neg):
        return atoms_of(f.sub)
    if isinstance(f, (And, Or)):
        return atoms_of(f.left) | atoms_of(f.right)
    raise FragmentError(f"{render(f)}: unsupported connective {type(f).__name__}")


def eval_pair(a: dict[str, Pair], f: Formula, memo: dict | None = None) -> Pair:
    if memo is not None and f in memo:
        return memo[f]
    if isinstance(f, Atom) and not f.terms:
        if f.pred not in a:
            raise FragmentError(f"no value for atom {f.pred}")
        v = tuple(a[f.pred])
    elif isinstance(f, Neg):
        plus, minus = eval_pair(a, f.sub, memo)
        v = (minus, plus)
    elif isinstance(f, And):
        (p1, m1), (p2, m2) = eval_pair(a, f.left, memo), eval_pair(a, f.right, memo)
        v = (p1 & p2, m1 | m2)
    elif isinstance(f, Or):
        (p1, m1), (p2, m2) = eval_pair(a, f.left, memo), eval_pair(a, f.right, memo)
        v = (p1 | p2, m1 & m2)
    else:
        atoms_of(f)  # raises with a precise message
        raise FragmentError(render(f))
    if memo is not None:
        memo[f] = v
    return v


def four_value(pair: Pair) -> FourValue:
    return FourValue.from_pair(*pair)


# -- consequence -------------------------------------------------------------

@dataclass(frozen=True)
class Valid:
    assignments: int

    def to_json(self) -> dict:
        return {"verdict": "Valid", "assignments": self.assignments}


@dataclass(frozen=True)
class Countermodel:
    assignment: dict

    def to_json(self) -> dict:
        return {"verdict": "Countermodel",
                "assignment": {p: list(v) for p, v in sorted(self.assignment.items())}}


def assignments(atoms: Iterable[str]) -> Iterator[dict[str, Pair]]:
    atoms = sorted(set(atoms))
    for vals in product(PAIRS, repeat=len(atoms)):
        yield dict(zip(atoms, vals))


def fde_consequence(gamma: Iterable[Formula], goal: Formula) -> Valid | Countermodel:
    """Brute force over all pair assignments; complete for this fragment."""
    gamma = list(gamma)
    atoms = set(atoms_of(goal))
    for g in gamma:
        atoms |= atoms_of(g)
    n = 0
    for a in assignments(atoms):
        n += 1
        if all(eval_pair(a, g)[0] for g in gamma) and not eval_pair(a, goal)[0]:
            return Countermodel(a)
    return Valid(n)


# -- comparison with the Kripke valuation -------------------------------------

ATOM_NAMES = ("p", "q", "r", "s")


def propositional_signature(atoms: Iterable[str]) -> Signature:
    return Signature((), {p: 0 for p in sorted(set(atoms))})


def formulas_up_to(atoms: Iterable[str], depth: int) -> list[Formula]:
    """Every {~, &, |} formula over ``atoms`` of depth at most ``depth``."""
    level = [Atom(p) for p in atoms]
    for _ in range(depth):
        seen = dict.fromkeys(level)
        for f in level:
            seen.setdefault(Neg(f))
        for f, g in product(level, repeat=2):
            seen.setdefault(And(f, g))
            seen.setdefault(Or(f, g))
        level = list(seen)
    return level


def single_stage_model(sig: Signature, a: dict[str, Pair]) -> KripkeModel:
    """One stage whose 0-ary extensions encode ``a``."""
    return KripkeModel.from_json({
        "stages": ["w"], "order": [], "domains": {"w": ["a"]}, "constants": {},
        "predicates": {p: {"w": {"pos": [[]] if a[p][0] else [], "neg": [[]] if a[p][1] else []}}
                       for p in sig.predicates},
        "id_pos": {"w": [["a", "a"]]}, "id_neg": {"w": []}, "persistence_safe": True,
    }, sig)


@dataclass
class CompareReport:
    atoms: int
    depth: int
    formulas: int = 0
    assignments: int = 0
    cases: int = 0
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_json(self) -> dict:
        return {"atoms": self.atoms, "depth": self.depth, "formulas": self.formulas,
                "assignments": self.assignments, "cases": self.cases,
                "mismatches": self.mismatches[:20], "mismatch_count": len(self.mismatches)}


def compare_with_kripke(atom_count: int, depth: int) -> CompareReport:
    if not 0 <= atom_count <= len(ATOM_NAMES):
        raise ValueError(f"atom_count must be between 0 and {len(ATOM_NAMES)}")
    atoms = ATOM_NAMES[:atom_count]
    sig = propositional_signature(atoms)
    forms = formulas_up_to(atoms, depth)
    rep = CompareReport(atom_count, depth, formulas=len(forms))
    for a in assignments(atoms):
        rep.assignments += 1
        val = Valuation(single_stage_model(sig, a))
        memo: dict = {}
        for f in forms:
            rep.cases += 1
            want = eval_pair(a, f, memo)
            got = (val("w", f), val.neg("w", f))
            if got != want:
                rep.mismatches.append({"formula": render(f), "assignment": a,
                                       "oracle": list(want), "kripke": list(got)})
    return rep


__all__ = ["ATOM_NAMES", "CompareReport", "Countermodel", "FragmentError", "PAIRS", "Valid",
           "assignments", "atoms_of", "compare_with_kripke", "eval_pair", "fde_consequence",
           "formulas_up_to", "four_value", "propositional_signature", "single_stage_model"]
