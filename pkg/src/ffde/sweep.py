"""Exhaustive persistence checks by closing a model's formula profiles.

Within one model, a formula with free variables among ``x1..xk`` denotes a
*profile*: the pair of sets of contexts ``(w, e)`` (a stage and an element
tuple from ``d(w)^k``) where it and its negation hold.  The profiles of all
formulas up to a given depth can be generated from the atomic ones by
applying the connective and quantifier clauses directly to these truth sets,
so no formula needs to be enumerated twice once its profile is known.  A
quantifier always binds ``x(k+1)`` of a ``k+1``-variable profile.  Because
the atomic layer is closed under renaming, this reaches every formula.

Persistence then reduces to checking that each generated set is up-closed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable

import numpy as np

from .kripke import KripkeModel
from .syntax import (FFDE, FN4, And, Atom, Const, Def, Exists, Forall, Formula, Id, Imp, Neg,
                     Or, Signature, Var)


@dataclass
class Layer:
    """Distinct profiles of one (depth, arity) cell, with a witness formula each."""

    pos: np.ndarray  # (n, S, E) bool
    neg: np.ndarray
    formulas: list

    def __len__(self):
        return len(self.formulas)


@dataclass
class PersistenceViolation:
    formula: Formula
    sign: str
    lower: str
    upper: str
    env: tuple

    def to_json(self) -> dict:
        from .syntax import render
        return {"formula": render(self.formula), "sign": self.sign, "lower": self.lower,
                "upper": self.upper, "env": list(self.env)}


class ProfileSpace:
    def __init__(self, m: KripkeModel, sig: Signature):
        self.m, self.sig = m, sig
        self.stages = list(m.stages)
        self.U = list(m.elements)
        S = len(self.stages)
        self.leq = np.array([[(w, v) in m.leq for v in self.stages] for w in self.stages], bool)
        self.up = [np.flatnonzero(self.leq[i]) for i in range(S)]
        self.dom = np.array([[a in m.domain(w) for a in self.U] for w in self.stages], bool)
        self._envs: dict[int, list] = {}

    def envs(self, k: int) -> list[tuple]:
        if k not in self._envs:
            self._envs[k] = list(product(range(len(self.U)), repeat=k))
        return self._envs[k]

    def valid(self, k: int) -> np.ndarray:
        envs = self.envs(k)
        return np.array([[all(self.dom[w, a] for a in e) for e in envs]
                         for w in range(len(self.stages))], bool).reshape(len(self.stages), len(envs))

    def box(self, x: np.ndarray) -> np.ndarray:
        out = np.empty_like(x)
        for w, ups in enumerate(self.up):
            out[:, w] = x[:, ups].all(axis=1)
        return out

    # -- atomic layer -------------------------------------------------------

    def _term(self, t, k: int):
        """Element index of ``t`` per context, -1 where undefined."""
        S, envs = len(self.stages), self.envs(k)
        if isinstance(t, Var):
            i = int(t.name[1:]) - 1
            return np.array([[e[i] for e in envs]] * S, np.int64).reshape(S, len(envs))
        ix = {a: j for j, a in enumerate(self.U)}
        row = [ix.get(self.m.interp(t.name, w), -1) for w in self.stages]
        return np.repeat(np.array(row, np.int64)[:, None], len(envs), axis=1)

    def atoms(self, k: int) -> Layer:
        terms = [Const(c) for c in self.sig.constants] + [Var(f"x{i}") for i in range(1, k + 1)]
        valid = self.valid(k)
        S, E = valid.shape
        U = len(self.U)
        vals = {t: self._term(t, k) for t in terms}
        w_ix = np.arange(S)[:, None]
        pos, neg, forms = [], [], []

        def lookup(rel, args):
            if U == 0:
                return np.zeros((S, E), bool)
            ix = [vals[t] for t in args]
            ok = np.logical_and.reduce([v >= 0 for v in ix]) if ix else np.ones((S, E), bool)
            return ok & rel[(w_ix,) + tuple(np.maximum(v, 0) for v in ix)] & valid

        for t in terms:
            forms.append(("atom", Def(t)))
            pos.append((vals[t] >= 0) & valid)
            neg.append((vals[t] < 0) & valid)
        rels = [self._relation([self.m.ipos(w) for w in self.stages], 2),
                self._relation([self.m.ineg(w) for w in self.stages], 2)]
        for l, r in product(terms, repeat=2):
            forms.append(("atom", Id(l, r)))
            pos.append(lookup(rels[0], (l, r)))
            neg.append(lookup(rels[1], (l, r)))
        for p, n in sorted(self.sig.predicates.items()):
            ext = [self.m.ext(p, w) for w in self.stages]
            rp = self._relation([e[0] for e in ext], n)
            rn = self._relation([e[1] for e in ext], n)
            for args in product(terms, repeat=n):
                forms.append(("atom", Atom(p, args)))
                pos.append(lookup(rp, args))
                neg.append(lookup(rn, args))
        shape = (len(forms), S, E)
        return _unique(np.array(pos, bool).reshape(shape), np.array(neg, bool).reshape(shape), forms)

    def _relation(self, per_stage, arity: int) -> np.ndarray:
        names = {a: j for j, a in enumerate(self.U)}
        out = np.zeros((len(self.stages),) + (len(self.U),) * arity, bool)
        for w, rel in enumerate(per_stage):
            for t in rel:
                out[(w,) + tuple(names[a] for a in t)] = True
        return out

    # -- closure ------------------------------------------------------------

    def closure(self, depth: int, logic: str = FN4) -> dict[tuple[int, int], Layer]:
        """Layers ``(d, k)`` for every ``d + k <= depth``."""
        cells = {(0, k): self.atoms(k) for k in range(depth + 1)}
        for d in range(1, depth + 1):
            for k in range(depth - d + 1):
                cells[d, k] = self._step(cells[d - 1, k], cells[d - 1, k + 1], k, logic)
        return cells

    def _step(self, base: Layer, wider: Layer, k: int, logic: str) -> Layer:
        valid = self.valid(k)
        P, N = [base.pos, base.neg], [base.neg, base.pos]
        F = [base.formulas, [("neg", f) for f in base.formulas]]
        n = len(base)
        cell = base.pos.shape[1:]
        if n:
            a_p, a_n = base.pos[:, None], base.neg[:, None]
            b_p, b_n = base.pos[None, :], base.neg[None, :]
            ops = [("and", a_p & b_p, a_n | b_n), ("or", a_p | b_p, a_n & b_n)]
            if logic == FN4:
                imp = self.box((~a_p | b_p).reshape((n * n,) + cell)) & valid
                ops.append(("imp", imp, a_p & b_n))
            pairs = [(i, j) for i in range(n) for j in range(n)]
            for op, p, q in ops:
                P.append(p.reshape((n * n,) + cell))
                N.append(q.reshape((n * n,) + cell))
                F.append(_Pairs(op, base.formulas, pairs))
        if len(wider):
            v = f"x{k + 1}"
            S, E = valid.shape
            ip = wider.pos.reshape(len(wider), S, E, len(self.U))
            iq = wider.neg.reshape(len(wider), S, E, len(self.U))
            dm = self.dom[None, :, None, :]
            P += [self.box((ip | ~dm).all(axis=3)) & valid, (ip & dm).any(axis=3) & valid]
            N += [(iq & dm).any(axis=3) & valid, self.box((iq | ~dm).all(axis=3)) & valid]
            F += [[("all", v, f) for f in wider.formulas], [("ex", v, f) for f in wider.formulas]]
        return _unique(np.concatenate(P), np.concatenate(N), _Chain(F))

    # -- checking -----------------------------------------------------------

    def violations(self, layer: Layer, k: int) -> list[PersistenceViolation]:
        out = []
        envs = self.envs(k)
        for w, v in zip(*np.nonzero(self.leq)):
            if w == v:
                continue
            for sign, arr in (("+", layer.pos), ("-", layer.neg)):
                bad = arr[:, w] & ~arr[:, v]
                for i, j in zip(*np.nonzero(bad)):
                    out.append(PersistenceViolation(
                        formula(layer.formulas[i]), sign, self.stages[w], self.stages[v],
                        tuple(self.U[a] for a in envs[j])))
        return out


class _Pairs:
    """Recipes for a pair product, built only for the profiles kept."""

    def __init__(self, op, forms, pairs):
        self.op, self.forms, self.pairs = op, forms, pairs

    def __len__(self):
        return len(self.pairs)

    def __getitem__(self, i):
        a, b = self.pairs[i]
        return (self.op, self.forms[a], self.forms[b])


class _Chain:
    """Index into a concatenation of recipe blocks."""

    def __init__(self, parts):
        self.parts = parts

    def __getitem__(self, i):
        for p in self.parts:
            if i < len(p):
                return p[i]
            i -= len(p)
        raise IndexError(i)


_BUILD = {"and": And, "or": Or, "imp": Imp}


def formula(recipe) -> Formula:
    """Materialize a profile's witness recipe as a formula."""
    tag = recipe[0]
    if tag == "atom":
        return recipe[1]
    if tag == "neg":
        return Neg(formula(recipe[1]))
    if tag in _BUILD:
        return _BUILD[tag](formula(recipe[1]), formula(recipe[2]))
    return (Forall if tag == "all" else Exists)(recipe[1], formula(recipe[2]))


def _unique(pos: np.ndarray, neg: np.ndarray, forms) -> Layer:
    n = pos.shape[0]
    if n == 0:
        return Layer(pos, neg, [])
    flat = np.concatenate([pos.reshape(n, -1), neg.reshape(n, -1)], axis=1)
    _, first = np.unique(np.packbits(flat, axis=1), axis=0, return_index=True)
    first.sort()
    return Layer(pos[first], neg[first], [forms[i] for i in first])


@dataclass
class SweepReport:
    models: int = 0
    trivial: int = 0
    profiles: int = 0
    sentences: int = 0  # closed profiles in a sweep, sampled sentences otherwise
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json(self) -> dict:
        return {"models": self.models, "trivial": self.trivial, "profiles": self.profiles,
                "sentences": self.sentences, "violations": len(self.violations)}


def model_violations(m: KripkeModel, sig: Signature, depth: int = 3,
                     logic: str = FN4) -> tuple[int, int, list[PersistenceViolation]]:
    """Profiles generated, closed profiles, and violations for one model."""
    space = ProfileSpace(m, sig)
    cells = space.closure(depth, logic)
    bad = []
    for (d, k), layer in cells.items():
        bad += space.violations(layer, k)
    return sum(map(len, cells.values())), len(cells[depth, 0]), bad


def persistence_sweep(models: Iterable[KripkeModel], sig: Signature, depth: int = 3,
                      logic: str = FN4) -> SweepReport:
    """Check every model; those without two distinct comparable stages hold trivially."""
    rep = SweepReport()
    for i, m in enumerate(models):
        rep.models += 1
        if all(w == v for w, v in m.leq):
            rep.trivial += 1
            continue
        n, closed, bad = model_violations(m, sig, depth, logic)
        rep.profiles += n
        rep.sentences += closed
        rep.violations += [(i, v) for v in bad]
    return rep


def random_persistence(sig: Signature, bounds, models: int = 100, sentences: int = 200,
                       seed: int = 0, depth: int = 4) -> SweepReport:
    """Random sentences over random models, checked with the valuation itself."""
    from .generate import random_sentence
    from .search import random_model
    from .valuation import Valuation

    rng = random.Random(seed)
    rep = SweepReport()
    for i in range(models):
        # models without two comparable stages say nothing about persistence
        pairs = []
        while not pairs:
            m = random_model(sig, bounds, rng.randrange(2 ** 32))
            pairs = [(w, v) for w, v in sorted(m.leq) if w != v]
        val = Valuation(m)
        rep.models += 1
        for _ in range(sentences):
            s = random_sentence(rng, sig, rng.randint(0, depth))
            rep.sentences += 1
            for w, v in pairs:
                for sign, f in (("+", s), ("-", Neg(s))):
                    if val(w, f) and not val(v, f):
                        rep.violations.append((i, PersistenceViolation(s, sign, w, v, ())))
    return rep


def layer_values(space: ProfileSpace, layer: Layer, k: int = 0):
    """Yield (formula, stage, env, plus, minus) for every valid context."""
    valid = space.valid(k)
    envs = space.envs(k)
    for i, r in enumerate(layer.formulas):
        f = formula(r)
        for w, j in zip(*np.nonzero(valid)):
            yield f, space.stages[w], tuple(space.U[a] for a in envs[j]), \
                int(layer.pos[i, w, j]), int(layer.neg[i, w, j])


__all__ = ["FFDE", "FN4", "Layer", "PersistenceViolation", "ProfileSpace", "SweepReport",
           "formula", "layer_values", "model_violations", "persistence_sweep",
           "random_persistence"]
