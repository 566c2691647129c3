"""Finite variable-domain Kripke models and their well-formedness conditions."""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import cached_property
from itertools import product
from pathlib import Path
from typing import Iterable

from .syntax import Signature

Pair = tuple[str, str]
Tup = tuple[str, ...]
EMPTY: frozenset = frozenset()

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class KripkeModel:
    """A model over stages ``stages`` with preorder generated by ``order``.

    ``constants`` maps a constant to its (partial) stage-wise interpretation,
    ``predicates`` maps a predicate to ``{stage: (pos, neg)}``.  Missing
    entries read as undefined / empty.
    """

    stages: tuple[str, ...]
    order: frozenset[Pair] = EMPTY
    domains: dict[str, frozenset[str]] = field(default_factory=dict)
    constants: dict[str, dict[str, str]] = field(default_factory=dict)
    predicates: dict[str, dict[str, tuple[frozenset[Tup], frozenset[Tup]]]] = field(default_factory=dict)
    arities: dict[str, int] = field(default_factory=dict)
    id_pos: dict[str, frozenset[Pair]] = field(default_factory=dict)
    id_neg: dict[str, frozenset[Pair]] = field(default_factory=dict)
    persistence_safe: bool = True

    @cached_property
    def leq(self) -> frozenset[Pair]:
        return preorder_closure(self.stages, self.order)

    @cached_property
    def _up(self) -> dict[str, tuple[str, ...]]:
        return {w: tuple(v for v in self.stages if (w, v) in self.leq) for w in self.stages}

    def up(self, w: str) -> tuple[str, ...]:
        """Stages ``v`` with ``w <= v``, in stage order."""
        return self._up[w]

    def domain(self, w: str) -> frozenset[str]:
        return self.domains.get(w, EMPTY)

    @cached_property
    def elements(self) -> tuple[str, ...]:
        seen = set()
        for w in self.stages:
            seen |= self.domain(w)
        return tuple(sorted(seen))

    def interp(self, c: str, w: str) -> str | None:
        return self.constants.get(c, {}).get(w)

    def ext(self, p: str, w: str) -> tuple[frozenset[Tup], frozenset[Tup]]:
        return self.predicates.get(p, {}).get(w, (EMPTY, EMPTY))

    def ipos(self, w: str) -> frozenset[Pair]:
        return self.id_pos.get(w, EMPTY)

    def ineg(self, w: str) -> frozenset[Pair]:
        return self.id_neg.get(w, EMPTY)

    def evolve(self, **changes) -> "KripkeModel":
        return replace(self, **changes)

    # -- JSON ---------------------------------------------------------------

    def to_json(self) -> dict:
        st = self.stages
        preds = {}
        for p in sorted(set(self.arities) | set(self.predicates)):
            preds[p] = {w: {"pos": sorted(map(list, self.ext(p, w)[0])),
                            "neg": sorted(map(list, self.ext(p, w)[1]))} for w in st}
        consts = {c: {w: self.constants[c][w] for w in st if w in self.constants[c]}
                  for c in sorted(self.constants)}
        return {
            "stages": list(st),
            "order": sorted([list(p) for p in self.order]),
            "domains": {w: sorted(self.domain(w)) for w in st},
            "constants": consts,
            "predicates": preds,
            "id_pos": {w: sorted(map(list, self.ipos(w))) for w in st},
            "id_neg": {w: sorted(map(list, self.ineg(w))) for w in st},
            "persistence_safe": self.persistence_safe,
        }

    def dumps(self, extra: dict | None = None) -> str:
        data = self.to_json()
        if extra:
            data.update(extra)
        return json.dumps(data, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, data: dict, sig: Signature | None = None) -> "KripkeModel":
        stages = tuple(data["stages"])
        domains = {w: frozenset(data.get("domains", {}).get(w, [])) for w in stages}
        arities = dict(sig.predicates) if sig is not None else {}
        preds = {}
        for p, per in data.get("predicates", {}).items():
            table = {}
            for w, pn in per.items():
                table[w] = (frozenset(tuple(t) for t in pn.get("pos", [])),
                            frozenset(tuple(t) for t in pn.get("neg", [])))
                for t in table[w][0] | table[w][1]:
                    arities.setdefault(p, len(t))
            preds[p] = table
        if "id_pos" in data:
            id_pos = {w: frozenset(tuple(t) for t in v) for w, v in data["id_pos"].items()}
        else:
            id_pos = {w: frozenset((a, a) for a in domains[w]) for w in stages}
        id_neg = {w: frozenset(tuple(t) for t in v) for w, v in data.get("id_neg", {}).items()}
        return cls(
            stages=stages,
            order=frozenset(tuple(p) for p in data.get("order", [])),
            domains=domains,
            constants={c: dict(v) for c, v in data.get("constants", {}).items()},
            predicates=preds,
            arities=arities,
            id_pos=id_pos,
            id_neg=id_neg,
            persistence_safe=bool(data.get("persistence_safe", True)),
        )

    @classmethod
    def load(cls, path, sig: Signature | None = None) -> "KripkeModel":
        return cls.from_json(json.loads(Path(path).read_text()), sig)


def preorder_closure(stages: Iterable[str], edges: Iterable[Pair]) -> frozenset[Pair]:
    stages = list(stages)
    rel = {(w, w) for w in stages} | {tuple(e) for e in edges}
    succ = defaultdict(set)
    for a, b in rel:
        succ[a].add(b)
    out = set()
    for w in stages:
        seen, todo = {w}, [w]
        while todo:
            for v in succ[todo.pop()]:
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
        out |= {(w, v) for v in seen}
    return frozenset(out)


def order_closure(m: KripkeModel) -> KripkeModel:
    return m.evolve(order=m.leq)


# -- validation --------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    stage: str | None = None
    severity: str = ERROR

    def to_json(self) -> dict:
        return {"code": self.code, "severity": self.severity, "stage": self.stage,
                "message": self.message}


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def errors(self) -> list[Violation]:
        return [v for v in self.violations if v.severity == ERROR]

    @property
    def ok(self) -> bool:
        return not self.errors

    def __bool__(self):
        return bool(self.violations)

    def __len__(self):
        return len(self.violations)

    def codes(self) -> set[str]:
        return {v.code for v in self.violations}

    def add(self, code, message, stage=None, severity=ERROR):
        self.violations.append(Violation(code, message, stage, severity))

    def to_json(self) -> list[dict]:
        return [v.to_json() for v in self.violations]


def diversity_demands(pos_neg: Iterable[tuple[frozenset[Tup], frozenset[Tup]]]) -> set[Pair]:
    """Pairs forced into i-(w) by positive/negative tuples differing in at most one place.

    Takes (pos, neg) pairs for every predicate, identity included.
    """
    out: set[Pair] = set()
    for pos, neg in pos_neg:
        if not pos or not neg:
            continue
        m = len(next(iter(pos)))
        for j in range(m):
            index = defaultdict(set)
            for t in pos:
                index[t[:j] + t[j + 1:]].add(t[j])
            for t in neg:
                for a in index.get(t[:j] + t[j + 1:], ()):
                    out.add((a, t[j]))
                    out.add((t[j], a))
    return out


def _stage_demands(m: KripkeModel, w: str, neg: frozenset[Pair]) -> set[Pair]:
    tables = [m.ext(p, w) for p in m.predicates]
    tables.append((m.ipos(w), neg))
    return diversity_demands(tables)


def _is_equivalence(rel: frozenset[Pair], dom: frozenset[str]) -> str | None:
    for a in dom:
        if (a, a) not in rel:
            return f"not reflexive at {a}"
    for a, b in rel:
        if (b, a) not in rel:
            return f"not symmetric at ({a}, {b})"
    succ = defaultdict(set)
    for a, b in rel:
        succ[a].add(b)
    for a, b in rel:
        for c in succ[b]:
            if (a, c) not in rel:
                return f"not transitive at ({a}, {b}), ({b}, {c})"
    return None


def _congruence_failure(ipos: frozenset[Pair], tuples: frozenset[Tup]) -> tuple | None:
    cls = defaultdict(set)
    for a, b in ipos:
        cls[a].add(b)
    for t in tuples:
        for t2 in product(*[sorted(cls[a] | {a}) for a in t]):
            if t2 not in tuples:
                return t, t2
    return None


def validate(m: KripkeModel) -> ValidationReport:
    rep = ValidationReport()
    st = set(m.stages)
    if not m.stages:
        rep.add("EMPTY_STAGES", "a model needs at least one stage")
        return rep
    if len(st) != len(m.stages):
        rep.add("DUPLICATE_STAGE", "stage ids must be unique")
    for a, b in m.order:
        if a not in st or b not in st:
            rep.add("UNKNOWN_STAGE", f"order pair ({a}, {b}) names an unknown stage")
    tables = [m.domains, m.id_pos, m.id_neg] + list(m.constants.values()) + list(m.predicates.values())
    for tab in tables:
        for w in tab:
            if w not in st:
                rep.add("UNKNOWN_STAGE", f"unknown stage {w!r}", w)
    if rep.errors:
        return rep
    leq = [(w, v) for (w, v) in sorted(m.leq) if w != v]

    for w, v in leq:
        if not m.domain(w) <= m.domain(v):
            rep.add("DOMAIN_SHRINK", f"d({w}) not included in d({v}): missing "
                    f"{sorted(m.domain(w) - m.domain(v))}", w)

    for c in sorted(m.constants):
        for w in m.stages:
            a = m.interp(c, w)
            if a is not None and a not in m.domain(w):
                rep.add("CONST_OUT_OF_DOMAIN", f"I({c}, {w}) = {a} is not in d({w})", w)
        for w, v in leq:
            a, b = m.interp(c, w), m.interp(c, v)
            if a is not None and a != b:
                rep.add("CONST_NOT_RIGID", f"I({c}, {w}) = {a} but I({c}, {v}) = {b}", w)
            if a is None and b is not None:
                rep.add("CONST_DEFINEDNESS_NOT_PERSISTENT",
                        f"{c} undefined at {w} but defined at later stage {v}", w,
                        ERROR if m.persistence_safe else WARNING)

    for p in sorted(m.predicates):
        if p not in m.arities:
            rep.add("UNKNOWN_PREDICATE", f"predicate {p} has no declared arity")
            continue
        n = m.arities[p]
        for w in m.stages:
            pos, neg = m.ext(p, w)
            for sign, tuples in (("+", pos), ("-", neg)):
                for t in sorted(tuples):
                    if len(t) != n:
                        rep.add("PRED_ARITY", f"{p}{sign} at {w} has tuple {t} of wrong length", w)
                    elif not set(t) <= m.domain(w):
                        rep.add("PRED_OUT_OF_DOMAIN", f"{p}{sign} at {w} has tuple {t} outside d({w})", w)
        for w, v in leq:
            (pw, nw), (pv, nv) = m.ext(p, w), m.ext(p, v)
            if not pw <= pv or not nw <= nv:
                rep.add("PRED_NOT_MONOTONE", f"extension of {p} shrinks from {w} to {v}", w)

    shape_ok = True
    for w in m.stages:
        dom = m.domain(w)
        for name, rel in (("i+", m.ipos(w)), ("i-", m.ineg(w))):
            bad = sorted(p for p in rel if not set(p) <= dom)
            if bad:
                shape_ok = False
                rep.add("ID_OUT_OF_DOMAIN", f"{name}({w}) has pairs outside d({w}): {bad}", w)
        why = _is_equivalence(m.ipos(w), dom)
        if why:
            shape_ok = False
            rep.add("ID_POS_NOT_EQUIVALENCE", f"i+({w}) {why}", w)
            continue
        for p in sorted(m.predicates):
            for sign, tuples in zip("+-", m.ext(p, w)):
                bad = _congruence_failure(m.ipos(w), tuples)
                if bad:
                    rep.add("ID_POS_NOT_CONGRUENCE",
                            f"{bad[0]} in {p}{sign} at {w} but i+-equivalent {bad[1]} is not", w)
    if shape_ok:
        for w in m.stages:
            missing = _stage_demands(m, w, m.ineg(w)) - m.ineg(w)
            if missing:
                rep.add("DIVERSITY_UNSAT", f"i-({w}) lacks forced pairs {sorted(missing)}", w)
    for w, v in leq:
        if not m.ipos(w) <= m.ipos(v) or not m.ineg(w) <= m.ineg(v):
            rep.add("ID_NOT_MONOTONE", f"identity (anti-)extension shrinks from {w} to {v}", w)
    return rep


def saturate(m: KripkeModel) -> KripkeModel:
    """Least enlargement of every i-(w) closed under diversity and monotone along <=."""
    neg = {w: set(m.ineg(w)) for w in m.stages}
    changed = True
    while changed:
        changed = False
        for w in m.stages:
            new = set(neg[w])
            for v in m.stages:
                if (v, w) in m.leq:
                    new |= neg[v]
            new |= _stage_demands(m, w, frozenset(new))
            if new != neg[w]:
                neg[w] = new
                changed = True
    return m.evolve(id_neg={w: frozenset(neg[w]) for w in m.stages})


class DiagramCollision(ValueError):
    pass


def diagram_name(a: str) -> str:
    return "@" + a


def diagram(m: KripkeModel, sig: Signature) -> tuple[Signature, KripkeModel]:
    """Signature and model with a constant ``@a`` for each element ``a``."""
    consts = dict(m.constants)
    for a in m.elements:
        name = diagram_name(a)
        expected = {w: a for w in m.stages if a in m.domain(w)}
        if name in sig.constants or name in consts:
            if consts.get(name, {}) != expected:
                raise DiagramCollision(f"declared constant {name} clashes with the diagram constant")
            continue
        consts[name] = expected
    new_sig = sig.with_constants(diagram_name(a) for a in m.elements)
    return new_sig, m.evolve(constants=consts)
