"""Vectorized evaluation of sentences over a whole list of enumerated models.

Every model of a stream becomes one row of a set of boolean arrays indexed by
(model, stage, element-tuple).  A sentence then evaluates to an ``(M, S)``
array in a handful of numpy operations per node.  Quantifiers range over the
fixed element pool ``a1..aK`` shared by all rows, with membership masks
standing in for the domains; this agrees with the substitutional clauses of
``valuation`` and the test suite checks the two against each other.
"""

from __future__ import annotations

from itertools import product

import numpy as np

from .syntax import (And, Atom, Const, Def, DiagramConst, Exists, Forall, Formula, Id, Imp,
                     Neg, Or, Signature, substitute)


class Batch:
    def __init__(self, sig: Signature, raws, stages: int, universe: int):
        self.sig = sig
        self.S, self.K = S, K = stages, universe
        self.elements = [f"a{i}" for i in range(1, K + 1)]
        self.index = {a: i for i, a in enumerate(self.elements)}
        preds = sorted(sig.predicates)
        self.preds = preds
        tables = {"frame": {}, "const": {}, "ipos": {}, "ineg": {}}
        for p in preds:
            tables[p] = {}
        cols = {k: [] for k in tables}
        cols["const"] = [[] for _ in sig.constants]
        for raw in raws:
            fr, consts, ipos, pv, ineg = raw
            cols["frame"].append(_intern(tables["frame"], fr))
            for j, c in enumerate(consts):
                cols["const"][j].append(_intern(tables["const"], c))
            cols["ipos"].append(_intern(tables["ipos"], ipos))
            cols["ineg"].append(_intern(tables["ineg"], ineg))
            for p, v in zip(preds, pv):
                cols[p].append(_intern(tables[p], v))
        self.M = M = len(cols["frame"])
        frames = _keys(tables["frame"])
        fi = np.asarray(cols["frame"], dtype=np.int64)
        self.exists = np.array([[w < f.n for w in range(S)] for f in frames], dtype=bool)[fi] \
            if frames else np.zeros((0, S), bool)
        self.leq = (np.array([[[(w, v) in f.leq for v in range(S)] for w in range(S)] for f in frames],
                             dtype=bool)[fi] if frames else np.zeros((0, S, S), bool))
        self.dom = (np.array([[[w < f.n and a in f.domains[w] for a in self.elements]
                               for w in range(S)] for f in frames], dtype=bool)[fi]
                    if frames else np.zeros((0, S, K), bool))
        cvals = _keys(tables["const"])
        crow = np.array([[-1 if (w >= len(c) or c[w] is None) else self.index[c[w]] for w in range(S)]
                         for c in cvals], dtype=np.int64).reshape(len(cvals), S)
        self.const = {c: crow[np.asarray(cols["const"][j], dtype=np.int64)] if M else
                      np.zeros((0, S), np.int64) for j, c in enumerate(sig.constants)}
        pairs = list(product(self.elements, repeat=2))
        self.ipos = self._rel_rows(tables["ipos"], cols["ipos"], pairs)
        self.ineg = self._rel_rows(tables["ineg"], cols["ineg"], pairs)
        self.pos, self.neg = {}, {}
        for p in preds:
            tuples = list(product(self.elements, repeat=sig.predicates[p]))
            vals = _keys(tables[p])
            ix = np.asarray(cols[p], dtype=np.int64)
            self.pos[p] = self._pred_rows(vals, ix, tuples, 0)
            self.neg[p] = self._pred_rows(vals, ix, tuples, 1)

    def _rel_rows(self, table, col, keys):
        vals = _keys(table)
        rows = np.array([[[w < len(r) and k in r[w] for k in keys] for w in range(self.S)] for r in vals],
                        dtype=bool).reshape(len(vals), self.S, len(keys))
        return rows[np.asarray(col, dtype=np.int64)]

    def _pred_rows(self, vals, ix, keys, sign):
        rows = np.array([[[w < len(r) and k in r[w][sign] for k in keys] for w in range(self.S)]
                         for r in vals], dtype=bool).reshape(len(vals), self.S, len(keys))
        return rows[ix]

    # -- evaluation ---------------------------------------------------------

    def term(self, t) -> np.ndarray:
        if isinstance(t, Const):
            if t.name not in self.const:
                return np.full((self.M, self.S), -1, dtype=np.int64)
            return self.const[t.name]
        if isinstance(t, DiagramConst):
            i = self.index.get(t.element)
            if i is None:
                return np.full((self.M, self.S), -1, dtype=np.int64)
            return np.where(self.dom[:, :, i], i, -1)
        raise ValueError(f"free variable {t.name}")

    def _lookup(self, table, terms) -> np.ndarray:
        if not terms:
            return table[:, :, 0].copy()
        idx = np.zeros((self.M, self.S), dtype=np.int64)
        ok = np.ones((self.M, self.S), dtype=bool)
        for t in terms:
            v = self.term(t)
            ok &= v >= 0
            idx = idx * self.K + np.maximum(v, 0)
        return ok & np.take_along_axis(table, idx[:, :, None], axis=2)[:, :, 0]

    def _box(self, g: np.ndarray) -> np.ndarray:
        # true at w iff g holds at every v >= w
        return np.all(~self.leq | g[:, None, :], axis=2)

    def value(self, f: Formula, negative: bool = False, memo=None) -> np.ndarray:
        """``(M, S)`` array of v(f) (or v(~f)); rows for absent stages are junk."""
        memo = {} if memo is None else memo
        key = (f, negative)
        out = memo.get(key)
        if out is None:
            out = memo[key] = self._value(f, negative, memo)
        return out

    def _value(self, f, negative, memo):
        if isinstance(f, Def):
            d = self.term(f.term) >= 0
            return ~d if negative else d
        if isinstance(f, Id):
            return self._lookup(self.ineg if negative else self.ipos, (f.left, f.right))
        if isinstance(f, Atom):
            tab = (self.neg if negative else self.pos).get(f.pred)
            if tab is None:
                return np.zeros((self.M, self.S), dtype=bool)
            return self._lookup(tab, f.terms)
        if isinstance(f, Neg):
            return self.value(f.sub, not negative, memo)
        if isinstance(f, (And, Or)):
            l, r = self.value(f.left, negative, memo), self.value(f.right, negative, memo)
            return (l & r) if isinstance(f, And) != negative else (l | r)
        if isinstance(f, Imp):
            a = self.value(f.left, False, memo)
            if negative:
                return a & self.value(f.right, True, memo)
            return self._box(~a | self.value(f.right, False, memo))
        insts = [(i, self.value(substitute(f.body, f.var, DiagramConst(a)), negative, memo))
                 for i, a in enumerate(self.elements)]
        if isinstance(f, Exists) != negative:
            out = np.zeros((self.M, self.S), dtype=bool)
            for i, v in insts:
                out |= self.dom[:, :, i] & v
            return out
        g = np.ones((self.M, self.S), dtype=bool)
        for i, v in insts:
            g &= ~self.dom[:, :, i] | v
        return self._box(g)

    def first_counterexample(self, gamma, goal) -> tuple[int, int] | None:
        memo = {}
        mask = self.exists & ~self.value(goal, memo=memo)
        for g in gamma:
            if not mask.any():
                break
            mask &= self.value(g, memo=memo)
        hits = np.flatnonzero(mask.ravel())
        if not len(hits):
            return None
        i = int(hits[0])
        return i // self.S, i % self.S


def _intern(table: dict, key) -> int:
    k = table.get(key)
    if k is None:
        k = table[key] = len(table)
    return k


def _keys(table: dict) -> list:
    out = [None] * len(table)
    for k, i in table.items():
        out[i] = k
    return out
