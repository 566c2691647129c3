"""The valuation induced by a Kripke model, read substitutionally over its diagram.

Positive and negative clauses are kept apart: the value of ``~A`` is computed
from the shape of ``A``, never as the complement of the value of ``A``.
"""

from __future__ import annotations

import enum
from typing import Iterable

from .kripke import KripkeModel
from .syntax import (And, Atom, Const, Def, DiagramConst, Exists, Forall, Formula, Id, Imp,
                     Neg, Or, Var, free_vars, substitute)


class EvalError(ValueError):
    pass


class FourValue(enum.Enum):
    T = "T"
    F = "F"
    B = "B"
    N = "N"

    @classmethod
    def from_pair(cls, plus: int, minus: int) -> "FourValue":
        return {(1, 0): cls.T, (0, 1): cls.F, (1, 1): cls.B, (0, 0): cls.N}[(plus, minus)]


class Valuation:
    """Memoized evaluation of sentences in one model.

    The memo is keyed by (stage, sentence); create a new instance per model.
    """

    def __init__(self, model: KripkeModel):
        self.m = model
        self.memo: dict = {}

    def term(self, t, w: str) -> str | None:
        if isinstance(t, Const):
            return self.m.interp(t.name, w)
        if isinstance(t, DiagramConst):
            return t.element if t.element in self.m.domain(w) else None
        raise EvalError(f"free variable {t.name} in a sentence")

    def __call__(self, w: str, s: Formula) -> int:
        if isinstance(s, Neg):
            return self.neg(w, s.sub)
        key = (w, s)
        v = self.memo.get(key)
        if v is None:
            if w not in self.m._up:
                raise EvalError(f"unknown stage {w!r}")
            v = self.memo[key] = self._eval(w, s)
        return v

    def neg(self, w: str, s: Formula) -> int:
        """Value of ``~s``, memoized without building the negation."""
        key = (w, s, 1)
        v = self.memo.get(key)
        if v is None:
            if w not in self.m._up:
                raise EvalError(f"unknown stage {w!r}")
            v = self.memo[key] = self._eval_neg(w, s)
        return v

    def _eval(self, w: str, s: Formula) -> int:
        m = self.m
        if isinstance(s, Def):
            return int(self.term(s.term, w) is not None)
        if isinstance(s, Id):
            a, b = self.term(s.left, w), self.term(s.right, w)
            return int(a is not None and b is not None and (a, b) in m.ipos(w))
        if isinstance(s, Atom):
            args = tuple(self.term(t, w) for t in s.terms)
            return int(None not in args and args in m.ext(s.pred, w)[0])
        if isinstance(s, And):
            return self(w, s.left) & self(w, s.right)
        if isinstance(s, Or):
            return self(w, s.left) | self(w, s.right)
        if isinstance(s, Imp):
            return int(all(not self(v, s.left) or self(v, s.right) for v in m.up(w)))
        if isinstance(s, Forall):
            return int(all(self(v, substitute(s.body, s.var, DiagramConst(a)))
                           for v in m.up(w) for a in sorted(m.domain(v))))
        if isinstance(s, Exists):
            return int(any(self(w, substitute(s.body, s.var, DiagramConst(a)))
                           for a in sorted(m.domain(w))))
        return self._eval_neg(w, s.sub)

    def _eval_neg(self, w: str, s: Formula) -> int:
        m = self.m
        if isinstance(s, Def):
            return int(self.term(s.term, w) is None)
        if isinstance(s, Id):
            a, b = self.term(s.left, w), self.term(s.right, w)
            return int(a is not None and b is not None and (a, b) in m.ineg(w))
        if isinstance(s, Atom):
            args = tuple(self.term(t, w) for t in s.terms)
            return int(None not in args and args in m.ext(s.pred, w)[1])
        if isinstance(s, Neg):
            return self(w, s.sub)
        if isinstance(s, And):
            return self.neg(w, s.left) | self.neg(w, s.right)
        if isinstance(s, Or):
            return self.neg(w, s.left) & self.neg(w, s.right)
        if isinstance(s, Imp):
            return self(w, s.left) & self.neg(w, s.right)
        if isinstance(s, Forall):
            return int(any(self.neg(w, substitute(s.body, s.var, DiagramConst(a)))
                           for a in sorted(m.domain(w))))
        return int(all(self.neg(v, substitute(s.body, s.var, DiagramConst(a)))
                       for v in m.up(w) for a in sorted(m.domain(v))))


def _check_sentence(s: Formula):
    fv = free_vars(s)
    if fv:
        raise EvalError(f"not a sentence: free variables {sorted(fv)}")


def eval(m: KripkeModel, w: str, s: Formula, _val: Valuation | None = None) -> int:
    _check_sentence(s)
    return (_val or Valuation(m))(w, s)


def four_valued(m: KripkeModel, w: str, s: Formula, _val: Valuation | None = None) -> FourValue:
    _check_sentence(s)
    val = _val or Valuation(m)
    return FourValue.from_pair(val(w, s), val.neg(w, s))


def holds_all(m: KripkeModel, w: str, gamma: Iterable[Formula], _val: Valuation | None = None) -> bool:
    val = _val or Valuation(m)
    for s in gamma:
        _check_sentence(s)
        if not val(w, s):
            return False
    return True


def consequence_in_model(m: KripkeModel, gamma: Iterable[Formula], goal: Formula) -> str | None:
    """First stage where every member of ``gamma`` holds and ``goal`` fails."""
    gamma = list(gamma)
    _check_sentence(goal)
    val = Valuation(m)
    for w in m.stages:
        if holds_all(m, w, gamma, val) and not val(w, goal):
            return w
    return None
