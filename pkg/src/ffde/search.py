"""Bounded model enumeration, countermodel search and the soundness fuzzer.

Bounded search never certifies validity: a query either gets a countermodel
or the report that the bounds were exhausted.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations, islice, product
from typing import Iterable, Iterator

from .batch import Batch
from .generate import DerivationGenerator
from .kripke import KripkeModel, diversity_demands, saturate, validate
from .proof import STRICT, Derivation, ProofError, check
from .syntax import (FFDE, FN4, Formula, Signature, constants_of, free_vars, has_implication,
                     predicates_of, render)
from .valuation import consequence_in_model


@dataclass(frozen=True)
class Bounds:
    """Size limits for enumeration.

    ``max_universe`` caps the union of all domains and defaults to
    ``max_elements``; see ``enumerate_models``.
    """

    max_stages: int = 2
    max_elements: int = 2
    persistence_safe: bool = True
    max_universe: int | None = None
    prune_isomorphic: bool = False

    def __post_init__(self):
        if self.max_stages < 1 or self.max_elements < 0:
            raise ValueError("need max_stages >= 1 and max_elements >= 0")

    @property
    def universe(self) -> int:
        return self.max_elements if self.max_universe is None else self.max_universe

    def to_json(self) -> dict:
        return {"max_stages": self.max_stages, "max_elements": self.max_elements,
                "persistence_safe": self.persistence_safe}


@dataclass(frozen=True)
class Countermodel:
    model: KripkeModel
    stage: str
    index: int = 0

    def to_json(self) -> dict:
        return {"verdict": "Countermodel", "stage": self.stage, "index": self.index,
                "model": self.model.to_json()}


@dataclass(frozen=True)
class ExhaustedBounds:
    bounds: Bounds
    models_checked: int

    def to_json(self) -> dict:
        return {"verdict": "ExhaustedBounds", "bounds": self.bounds.to_json(),
                "models_checked": self.models_checked}


Verdict = Countermodel | ExhaustedBounds


# -- enumeration -------------------------------------------------------------

def _preorders(n: int) -> list[frozenset]:
    """All preorders on range(n) as sets of strict pairs, in a fixed order."""
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    out = []
    for r in range(len(off) + 1):
        for rel in combinations(off, r):
            s = set(rel)
            if all((a, c) in s for a, b in s for b2, c in s if b == b2 and a != c):
                out.append(frozenset(s))
    return out


def _subsets(items, max_size=None):
    items = tuple(items)
    top = len(items) if max_size is None else min(max_size, len(items))
    for r in range(top + 1):
        yield from (frozenset(c) for c in combinations(items, r))


def _partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _equivalences(dom) -> list[frozenset]:
    out = []
    for part in _partitions(sorted(dom)):
        out.append(frozenset((a, b) for block in part for a in block for b in block))
    return sorted(out, key=lambda r: (len(r), sorted(r)))


def _closed_sets(dom, arity, ipos) -> list[frozenset]:
    """Subsets of dom^arity that are unions of i+-class products."""
    cls = {a: frozenset(b for (x, b) in ipos if x == a) for a in dom}
    blocks, seen = [], set()
    for t in product(sorted(dom), repeat=arity):
        if t in seen:
            continue
        blk = frozenset(product(*[sorted(cls[a]) for a in t]))
        seen |= blk
        blocks.append(blk)
    out = []
    for r in range(len(blocks) + 1):
        for chosen in combinations(blocks, r):
            out.append(frozenset().union(*chosen))
    return out


def _monotone_families(n, leq, options, below):
    """Tuples (x_0..x_{n-1}), x_i from options[i], with below(x_i, x_j) whenever i <= j."""
    def rec(i, acc):
        if i == n:
            yield tuple(acc)
            return
        for x in options[i]:
            if all(below(acc[j], x) for j in range(i) if (j, i) in leq) and \
               all(below(x, acc[j]) for j in range(i) if (i, j) in leq):
                acc.append(x)
                yield from rec(i + 1, acc)
                acc.pop()
    yield from rec(0, [])


def _subset(a, b):
    return a <= b


@dataclass(frozen=True)
class _Frame:
    n: int
    strict: frozenset
    domains: tuple

    @property
    def leq(self):
        return self.strict | {(i, i) for i in range(self.n)}


def _frames(b: Bounds) -> Iterator[_Frame]:
    for n in range(1, b.max_stages + 1):
        orders = _preorders(n)
        for k in range(b.universe + 1):
            pool = [f"a{i}" for i in range(1, k + 1)]
            opts = [list(_subsets(pool, b.max_elements))] * n
            for strict in orders:
                leq = strict | {(i, i) for i in range(n)}
                for doms in _monotone_families(n, leq, opts, _subset):
                    if set().union(*doms) == set(pool):
                        yield _Frame(n, strict, doms)


def _constant_options(fr: _Frame, safe: bool) -> list[tuple]:
    opts = [[None] + sorted(d) for d in fr.domains]

    def ok(x, y):
        # x at an earlier stage, y at a later one
        if x is not None and x != y:
            return False
        return not (safe and x is None and y is not None)
    return list(_monotone_families(fr.n, fr.leq, opts, ok))


def _i_neg_options(fr, tables, ipos, base_neg) -> list[tuple]:
    per_stage = []
    for w in range(fr.n):
        dom = fr.domains[w]
        pairs = sorted(product(sorted(dom), repeat=2))
        floor = base_neg[w]
        free = [p for p in pairs if p not in floor]
        cands = []
        for extra in _subsets(free):
            neg = floor | extra
            if diversity_demands(tables[w] + [(ipos[w], neg)]) <= neg:
                cands.append(neg)
        per_stage.append(cands)
    return list(_monotone_families(fr.n, fr.leq, per_stage, _subset))


def _canonical_key(raw) -> tuple:
    fr, consts, ipos, preds, ineg = raw
    return (fr.n, tuple(sorted(fr.strict)), fr.domains, consts, ipos, preds, ineg)


def _relabel(raw, sp, ep):
    fr, consts, ipos, preds, ineg = raw
    inv = {old: new for new, old in enumerate(sp)}
    e = {a: ep[i] for i, a in enumerate(sorted(set().union(*fr.domains)))}

    def tup(t):
        return tuple(e[a] for a in t)

    def rel(r):
        return frozenset(tup(t) for t in r)
    strict = frozenset((inv[i], inv[j]) for i, j in fr.strict)
    doms = tuple(frozenset(e[a] for a in fr.domains[sp[i]]) for i in range(fr.n))
    cs = tuple(tuple(None if c[sp[i]] is None else e[c[sp[i]]] for i in range(fr.n)) for c in consts)
    ip = tuple(rel(ipos[sp[i]]) for i in range(fr.n))
    ps = tuple(tuple((rel(p[sp[i]][0]), rel(p[sp[i]][1])) for i in range(fr.n)) for p in preds)
    ng = tuple(rel(ineg[sp[i]]) for i in range(fr.n))
    return (_Frame(fr.n, strict, doms), cs, ip, ps, ng)


def _is_canonical(raw) -> bool:
    """True iff no stage/element renaming yields a smaller canonical key."""
    from itertools import permutations
    fr = raw[0]
    elems = sorted(set().union(*fr.domains))
    key = _sort_key(raw)
    for sp in permutations(range(fr.n)):
        for ep in permutations(elems):
            if (sp, tuple(ep)) == (tuple(range(fr.n)), tuple(elems)):
                continue
            if _sort_key(_relabel(raw, sp, list(ep))) < key:
                return False
    return True


def _sort_key(raw):
    def norm(x):
        if isinstance(x, frozenset):
            return (0, tuple(sorted((norm(y) for y in x))))
        if isinstance(x, tuple):
            return (1, tuple(norm(y) for y in x))
        if x is None:
            return (2, "")
        return (3, x)
    return norm(_canonical_key(raw))


def _raw_models(sig: Signature, b: Bounds) -> Iterator[tuple]:
    preds = sorted(sig.predicates)
    for fr in _frames(b):
        copts = _constant_options(fr, b.persistence_safe)
        eq_opts = [_equivalences(d) for d in fr.domains]
        for ipos in _monotone_families(fr.n, fr.leq, eq_opts, _subset):
            pred_opts = []
            for p in preds:
                per = [_closed_sets(fr.domains[w], sig.predicates[p], ipos[w]) for w in range(fr.n)]
                fam = list(_monotone_families(fr.n, fr.leq, per, _subset))
                pred_opts.append([tuple(zip(pos, neg)) for pos in fam for neg in fam])
            for consts in product(copts, repeat=len(sig.constants)):
                for pv in product(*pred_opts):
                    tables = [[pv[i][w] for i in range(len(preds))] for w in range(fr.n)]
                    base = _least_neg(fr, tables, ipos)
                    for ineg in _i_neg_options(fr, tables, ipos, base):
                        yield (fr, consts, ipos, pv, ineg)


def _least_neg(fr, tables, ipos):
    neg = [set() for _ in range(fr.n)]
    changed = True
    while changed:
        changed = False
        for w in range(fr.n):
            new = set(neg[w])
            for v in range(fr.n):
                if (v, w) in fr.strict:
                    new |= neg[v]
            new |= diversity_demands(tables[w] + [(ipos[w], frozenset(new))])
            if new != neg[w]:
                neg[w], changed = new, True
    return [frozenset(s) for s in neg]


def _to_model(sig: Signature, raw, safe: bool) -> KripkeModel:
    fr, consts, ipos, pv, ineg = raw
    st = tuple(f"w{i + 1}" for i in range(fr.n))
    preds = sorted(sig.predicates)
    return KripkeModel(
        stages=st,
        order=frozenset((st[i], st[j]) for i, j in fr.strict),
        domains={st[i]: fr.domains[i] for i in range(fr.n)},
        constants={c: {st[i]: a for i, a in enumerate(consts[k]) if a is not None}
                   for k, c in enumerate(sig.constants)},
        predicates={p: {st[i]: pv[k][i] for i in range(fr.n)} for k, p in enumerate(preds)},
        arities=dict(sig.predicates),
        id_pos={st[i]: ipos[i] for i in range(fr.n)},
        id_neg={st[i]: ineg[i] for i in range(fr.n)},
        persistence_safe=safe,
    )


def enumerate_models(sig: Signature, b: Bounds) -> Iterator[KripkeModel]:
    """Every valid model within ``b``, in canonical order.

    Stages are ``w1..wn`` and the union of the domains is ``a1..ak`` with
    ``k <= b.universe``.  Order: stage count, element count, preorder, domains,
    constants, identity, predicates, then the identity anti-extension (always a
    superset of the diversity fixpoint).
    """
    for raw in _raw_models(sig, b):
        if b.prune_isomorphic and not _is_canonical(raw):
            continue
        yield _to_model(sig, raw, b.persistence_safe)


def count_models(sig: Signature, b: Bounds) -> int:
    return sum(1 for raw in _raw_models(sig, b) if not b.prune_isomorphic or _is_canonical(raw))


# -- countermodels -----------------------------------------------------------

def restrict(sig: Signature, formulas: Iterable[Formula]) -> Signature:
    """The part of ``sig`` that the formulas mention."""
    formulas = list(formulas)
    cs = set().union(*(constants_of(f) for f in formulas)) if formulas else set()
    ps = set().union(*(predicates_of(f) for f in formulas)) if formulas else set()
    unknown = (cs - set(sig.constants)) | (ps - set(sig.predicates))
    if unknown:
        raise ValueError(f"symbols outside the signature: {sorted(unknown)}")
    return Signature(tuple(c for c in sig.constants if c in cs),
                     {p: n for p, n in sig.predicates.items() if p in ps}, sig.logic)


@lru_cache(maxsize=12)
def _batch(sig: Signature, b: Bounds) -> Batch:
    raws = (r for r in _raw_models(sig, b) if not b.prune_isomorphic or _is_canonical(r))
    return Batch(sig, raws, b.max_stages, b.universe)


def model_at(sig: Signature, b: Bounds, index: int) -> KripkeModel:
    """The model at position ``index`` of the canonical stream."""
    raws = (r for r in _raw_models(sig, b) if not b.prune_isomorphic or _is_canonical(r))
    raw = next(islice(raws, index, None))
    return _to_model(sig, raw, b.persistence_safe)


def find_countermodel(sig: Signature, gamma: Iterable[Formula], goal: Formula, b: Bounds,
                      logic: str | None = None) -> Verdict:
    """First model/stage in canonical order where ``gamma`` holds and ``goal`` fails.

    Only the symbols occurring in the query are enumerated; the others are
    left empty or undefined, which changes no value of the query.
    """
    gamma = list(gamma)
    logic = logic or sig.logic
    if logic not in (FFDE, FN4):
        raise ValueError(f"unknown logic {logic!r}")
    if logic == FFDE and any(has_implication(f) for f in gamma + [goal]):
        raise ValueError("implication is only available in fn4")
    for f in gamma + [goal]:
        if free_vars(f):
            raise ValueError(f"not a sentence: {render(f)}")
    sub = restrict(sig, gamma + [goal])
    batch = _batch(sub, b)
    hit = batch.first_counterexample(gamma, goal)
    if hit is None:
        return ExhaustedBounds(b, batch.M)
    i, w = hit
    model = model_at(sub, b, i)
    stage = model.stages[w]
    # replay through the reference valuation
    if consequence_in_model(model, gamma, goal) != stage:
        raise AssertionError("batch evaluation disagrees with the valuation")
    return Countermodel(model, stage, i)


# -- soundness fuzzing ------------------------------------------------------

@dataclass
class FuzzReport:
    n: int
    seed: int
    mode: str
    logic: str
    bounds: Bounds
    accepted: int = 0
    rejected: dict = field(default_factory=dict)
    sequents_checked: int = 0
    models_checked: int = 0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> dict:
        return {"n": self.n, "seed": self.seed, "mode": self.mode, "logic": self.logic,
                "bounds": self.bounds.to_json(), "accepted": self.accepted,
                "rejected": dict(sorted(self.rejected.items())),
                "sequents_checked": self.sequents_checked, "violations": len(self.violations)}

    def to_jsonl(self) -> str:
        return "".join(json.dumps(v, sort_keys=True) + "\n" for v in self.violations)


FUZZ_MAX_PREDICATES = 2
FUZZ_MAX_ARITY = 2
FUZZ_MAX_CONSTANTS = 2


def fuzz_signature(sig: Signature) -> Signature:
    """Cap ``sig`` to two predicates of arity at most two and two constants."""
    preds = {p: n for p, n in sorted(sig.predicates.items()) if n <= FUZZ_MAX_ARITY}
    preds = dict(list(preds.items())[:FUZZ_MAX_PREDICATES])
    return Signature(sig.constants[:FUZZ_MAX_CONSTANTS], preds, sig.logic)


def fuzz_corpus(sig: Signature, n: int, seed: int, max_depth: int = 5) -> list[Derivation]:
    rng = random.Random(seed)
    out = []
    for _ in range(n):
        gen = DerivationGenerator(sig, rng, max_depth=max_depth)
        out.append(gen.derivation())
    return out


def fuzz_soundness(sig: Signature, b: Bounds, n: int, seed: int = 0, logic: str | None = None,
                   mode: str = STRICT, extra: Iterable[Derivation] = (),
                   corpus: list | None = None) -> FuzzReport:
    """Check ``n`` random derivations and search countermodels for the accepted sequents.

    ``extra`` derivations are appended to the generated corpus.
    """
    logic = logic or sig.logic
    sig = fuzz_signature(sig).with_logic(logic)
    report = FuzzReport(n, seed, mode, logic, b)
    if n == 0 and not extra:
        return report
    if not sig.constants:
        raise ValueError("fuzzing needs at least one constant")
    ders = list(corpus) if corpus is not None else fuzz_corpus(sig, n, seed)
    ders += list(extra)
    verdicts: dict = {}
    for i, d in enumerate(ders):
        check_sig = sig.with_constants(sorted(_eigens(d)))
        try:
            seq = check(d, check_sig, mode)
        except (ProofError, ValueError) as e:
            code = getattr(e, "code", type(e).__name__)
            report.rejected[code] = report.rejected.get(code, 0) + 1
            continue
        report.accepted += 1
        key = (seq.assumptions, seq.conclusion)
        if key not in verdicts:
            verdicts[key] = find_countermodel(sig, sorted(seq.assumptions, key=render), seq.conclusion,
                                              b, logic)
            report.sequents_checked += 1
        v = verdicts[key]
        if isinstance(v, Countermodel):
            report.violations.append({
                "index": i, "sequent": str(seq), "derivation": d.to_json(),
                "stage": v.stage, "model_index": v.index, "witness": v.model.to_json()})
        else:
            report.models_checked += v.models_checked
    return report


def _eigens(d: Derivation) -> set[str]:
    out = set()
    if isinstance(d.attrs.get("eigen"), str):
        out.add(d.attrs["eigen"])
    for p in d.premises:
        out |= _eigens(p)
    return out


# -- random models -----------------------------------------------------------

def random_model(sig: Signature, b: Bounds, seed: int) -> KripkeModel:
    """A random valid model: sampled frame and interpretation, then saturated."""
    rng = random.Random(seed)
    n = rng.randint(1, b.max_stages)
    st = tuple(f"w{i + 1}" for i in range(n))
    order = frozenset((st[i], st[j]) for i in range(n) for j in range(n)
                      if i != j and rng.random() < 0.35)
    leq = KripkeModel(stages=st, order=order).leq
    doms = _random_domains(rng, st, leq, b)
    comps = _components(st, leq)
    consts = {}
    for c in sig.constants:
        table = {}
        for comp in comps:
            if b.persistence_safe:
                pool = frozenset.intersection(*(doms[w] for w in comp))
            else:
                pool = frozenset().union(*(doms[w] for w in comp))
            a = rng.choice([None] + sorted(pool))
            if a is None:
                continue
            # persistence-safe definedness covers the whole component
            seeds = comp if b.persistence_safe else [w for w in comp if a in doms[w] and rng.random() < 0.5]
            for w in seeds:
                table.update({v: a for v in st if (w, v) in leq})
        consts[c] = table
    ipos = {}
    for w in st:
        part = [[a] for a in sorted(doms[w])]
        rng.shuffle(part)
        while len(part) > 1 and rng.random() < 0.25:
            part.append(part.pop() + part.pop())
        ipos[w] = frozenset((a, x) for blk in part for a in blk for x in blk)
    ipos = _close_equivalences(st, leq, ipos)
    preds = {}
    for p, m in sorted(sig.predicates.items()):
        table = {}
        for w in st:
            tuples = list(product(sorted(doms[w]), repeat=m))
            table[w] = (frozenset(t for t in tuples if rng.random() < 0.3),
                        frozenset(t for t in tuples if rng.random() < 0.3))
        preds[p] = _close_tables(st, leq, ipos, table)
    ineg = {w: frozenset(pr for pr in product(sorted(doms[w]), repeat=2)
                         if pr[0] != pr[1] and rng.random() < 0.15) for w in st}
    m = KripkeModel(stages=st, order=order, domains=doms, constants=consts, predicates=preds,
                    arities=dict(sig.predicates), id_pos=ipos, id_neg=ineg,
                    persistence_safe=b.persistence_safe)
    m = saturate(m)
    rep = validate(m)
    if not rep.ok:
        raise AssertionError(f"random_model produced an invalid model: {rep.to_json()}")
    return m


def _random_domains(rng, st, leq, b: Bounds) -> dict:
    pool = [f"a{i}" for i in range(1, b.universe + 1)]
    while True:
        doms = {w: frozenset(a for a in pool if rng.random() < 0.5) for w in st}
        doms = {w: frozenset(sorted(d)[:b.max_elements]) for w, d in doms.items()}
        changed = True
        while changed:
            changed = False
            for w, v in leq:
                if not doms[w] <= doms[v]:
                    doms[v] = doms[v] | doms[w]
                    changed = True
        if all(len(d) <= b.max_elements for d in doms.values()):
            return doms


def _components(st, leq) -> list[list[str]]:
    comp = {w: frozenset({w}) for w in st}
    for w, v in leq:
        if comp[w] != comp[v]:
            merged = comp[w] | comp[v]
            for u in merged:
                comp[u] = merged
    out, seen = [], set()
    for w in st:
        if w not in seen:
            seen |= comp[w]
            out.append(sorted(comp[w], key=st.index))
    return out


def _close_equivalences(st, leq, ipos):
    rel = {w: set(ipos[w]) for w in st}
    changed = True
    while changed:
        changed = False
        for w, v in leq:
            if not rel[w] <= rel[v]:
                rel[v] |= rel[w]
                changed = True
        for w in st:
            extra = {(a, c) for a, x in rel[w] for y, c in rel[w] if x == y} - rel[w]
            if extra:
                rel[w] |= extra
                changed = True
    return {w: frozenset(rel[w]) for w in st}


def _close_tables(st, leq, ipos, table):
    cur = {w: [set(table[w][0]), set(table[w][1])] for w in st}
    changed = True
    while changed:
        changed = False
        for w, v in leq:
            for k in (0, 1):
                if not cur[w][k] <= cur[v][k]:
                    cur[v][k] |= cur[w][k]
                    changed = True
        for w in st:
            cls = {}
            for a, x in ipos[w]:
                cls.setdefault(a, set()).add(x)
            for k in (0, 1):
                extra = {t2 for t in cur[w][k] for t2 in product(*[sorted(cls[a]) for a in t])}
                if not extra <= cur[w][k]:
                    cur[w][k] |= extra
                    changed = True
    return {w: (frozenset(cur[w][0]), frozenset(cur[w][1])) for w in st}
