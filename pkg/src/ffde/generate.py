"""Random sentences and random derivations for property runs and fuzzing.

Derivations are grown backwards from a random goal: a rule whose conclusion
fits the goal is picked, its premises become new goals, and Hyp leaves close
branches.  Labels come from a per-formula registry, so every occurrence of a
hypothesis carries the same label and discharges line up by construction.
Side conditions are not guaranteed; the checker has the last word.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .proof import Derivation, hyp, node
from .syntax import (FN4, And, Atom, Const, Def, Exists, Forall, Formula, Id, Imp, Neg, Or,
                     Signature, Var, constants_of, free_vars, neq, replace_constant, substitute,
                     terms_of)

VARS = ("x", "y", "z", "u", "v")


def random_formula(rng: random.Random, sig: Signature, depth: int, free=(), logic: str | None = None,
                   quantifiers: bool = True) -> Formula:
    """A random formula of depth <= ``depth`` whose free variables lie in ``free``."""
    logic = logic or sig.logic
    terms = [Const(c) for c in sig.constants] + [Var(x) for x in free]
    if depth == 0 or rng.random() < 0.25:
        return _random_atom(rng, sig, terms)
    ops = ["neg", "and", "or"] + (["imp"] if logic == FN4 else []) + (["all", "ex"] if quantifiers else [])
    op = rng.choice(ops)
    if op == "neg":
        return Neg(random_formula(rng, sig, depth - 1, free, logic, quantifiers))
    if op in ("all", "ex"):
        x = next((v for v in VARS if v not in free), None)
        if x is None:
            return _random_atom(rng, sig, terms)
        body = random_formula(rng, sig, depth - 1, tuple(free) + (x,), logic, quantifiers)
        return (Forall if op == "all" else Exists)(x, body)
    l = random_formula(rng, sig, depth - 1, free, logic, quantifiers)
    r = random_formula(rng, sig, depth - 1, free, logic, quantifiers)
    return {"and": And, "or": Or, "imp": Imp}[op](l, r)


def _random_atom(rng, sig, terms) -> Formula:
    if not terms:
        zero = sorted(p for p, n in sig.predicates.items() if n == 0)
        if zero:
            return Atom(rng.choice(zero), ())
        return Exists("x", Id(Var("x"), Var("x")))
    kind = rng.choice(["id", "def"] + ["pred"] * 2 * len(sig.predicates))
    if kind == "id":
        return Id(rng.choice(terms), rng.choice(terms))
    if kind == "def":
        return Def(rng.choice(terms))
    p = rng.choice(sorted(sig.predicates))
    return Atom(p, tuple(rng.choice(terms) for _ in range(sig.predicates[p])))


def random_sentence(rng: random.Random, sig: Signature, depth: int, logic: str | None = None) -> Formula:
    return random_formula(rng, sig, depth, (), logic)


CONNECTIVE, QUANTIFIER, IDENTITY = "connective", "quantifier", "identity"
WEIGHTS = {CONNECTIVE: 1, QUANTIFIER: 2, IDENTITY: 2}
# rules applicable to any goal are damped so goal-specific rules get a say
GENERIC = {"and_e_l", "and_e_r", "or_e", "neg_and_e", "dne", "pex", "ex_e", "neg_all_e",
           "imp_e", "neg_imp_e_l", "neg_or_e_l", "neg_or_e_r", "neg_imp_e_r"}
ELIM_FACTOR = 0.3


@dataclass
class DerivationGenerator:
    """Backward random derivation builder over ``sig``.

    ``d_template_rate`` is the chance that an inequation is introduced by a
    NeqI whose template is D-headed or repeats its variable; strict checking
    rejects those nodes.
    """

    sig: Signature
    rng: random.Random
    max_depth: int = 5
    leaf_rate: float = 0.2
    d_template_rate: float = 0.1
    labels: dict = field(default_factory=dict)
    eigens: list = field(default_factory=list)

    def label(self, f: Formula) -> int:
        k = self.labels.get(f)
        if k is None:
            k = self.labels[f] = len(self.labels) + 1
        return k

    def leaf(self, f: Formula) -> Derivation:
        return hyp(f, self.label(f))

    def fresh(self) -> Const:
        name = self.sig.fresh_constant("c", self.eigens)
        self.eigens.append(name)
        return Const(name)

    def const(self) -> Const:
        return Const(self.rng.choice(self.sig.constants))

    def small(self, free=()) -> Formula:
        return random_formula(self.rng, self.sig, self.rng.choice((0, 0, 1)), free)

    def derivation(self) -> Derivation:
        return self.gen(self.root_goal(), self.max_depth, frozenset())

    def root_goal(self) -> Formula:
        r = self.rng
        kind = r.choice(["any", "any", "neq", "all", "ex", "negex", "negall", "def", "id"])
        if kind == "any":
            return random_sentence(r, self.sig, r.choice((0, 1, 2)))
        if kind == "neq":
            return neq(self.const(), self.const())
        if kind == "def":
            return Def(self.const())
        if kind == "id":
            return Id(self.const(), self.const())
        body = self.small(free=("x",))
        if kind in ("all", "negall"):
            q = Forall("x", body)
        else:
            q = Exists("x", body)
        return Neg(q) if kind.startswith("neg") else q

    # backward step

    def gen(self, goal: Formula, depth: int, ctx: frozenset) -> Derivation:
        closable = goal in ctx or not (constants_of(goal) & set(self.eigens))
        if depth == 0 or (closable and self.rng.random() < (0.6 if goal in ctx else self.leaf_rate)):
            return self.leaf(goal)
        options = self.options(goal)
        weights = [WEIGHTS[kind] * (ELIM_FACTOR if build.__name__ in GENERIC else 1)
                   for kind, build in options]
        _, build = self.rng.choices(options, weights)[0]
        return build(goal, depth - 1, ctx)

    def options(self, g: Formula):
        fn4 = self.sig.logic == FN4
        out = [(CONNECTIVE, self.and_e_l), (CONNECTIVE, self.and_e_r), (CONNECTIVE, self.or_e),
               (CONNECTIVE, self.neg_and_e), (CONNECTIVE, self.dne), (IDENTITY, self.pex),
               (QUANTIFIER, self.ex_e), (QUANTIFIER, self.neg_all_e)]
        if fn4:
            out += [(CONNECTIVE, self.imp_e), (CONNECTIVE, self.neg_imp_e_l)]
        if isinstance(g, And):
            out.append((CONNECTIVE, self.and_i))
        if isinstance(g, Or):
            out += [(CONNECTIVE, self.or_i_l), (CONNECTIVE, self.or_i_r)]
            if isinstance(g.left, Def) and g.right == Neg(g.left):
                out.append((IDENTITY, self.pem))
        if isinstance(g, Imp):
            out.append((CONNECTIVE, self.imp_i))
        if isinstance(g, Forall):
            out.append((QUANTIFIER, self.all_i))
        if isinstance(g, Exists):
            out.append((QUANTIFIER, self.ex_i))
        if isinstance(g, Def) and isinstance(g.term, Const):
            out.append((IDENTITY, self.def_i))
        if isinstance(g, Id) and g.left == g.right:
            out.append((IDENTITY, self.eq_i))
        if _atomic_core(g) is not None and constants_of(g):
            out.append((IDENTITY, self.eq_e))
        if self.abstractable(g):
            out.append((QUANTIFIER, self.all_e))
        if isinstance(g, Neg):
            s = g.sub
            out += [(CONNECTIVE, self.neg_or_e_l), (CONNECTIVE, self.neg_or_e_r)]
            if fn4:
                out.append((CONNECTIVE, self.neg_imp_e_r))
            if isinstance(s, Neg):
                out.append((CONNECTIVE, self.dni))
            if isinstance(s, And):
                out += [(CONNECTIVE, self.neg_and_i_l), (CONNECTIVE, self.neg_and_i_r)]
            if isinstance(s, Or):
                out.append((CONNECTIVE, self.neg_or_i))
            if isinstance(s, Imp):
                out.append((CONNECTIVE, self.neg_imp_i))
            if isinstance(s, Forall):
                out.append((QUANTIFIER, self.neg_all_i))
            if isinstance(s, Exists):
                out.append((QUANTIFIER, self.neg_ex_i))
            if isinstance(s, Id):
                out.append((IDENTITY, self.neq_i))
            if self.abstractable(s):
                out.append((QUANTIFIER, self.neg_ex_e))
        return out

    def abstractable(self, f: Formula) -> bool:
        return bool(constants_of(f))

    def abstract(self, f: Formula):
        """(x, body, c) with body(c/x) == f, abstracting some constant of f."""
        c = Const(self.rng.choice(sorted(constants_of(f))))
        used = {t.name for t in terms_of(f) if isinstance(t, Var)} | _bound_vars(f)
        x = next(v for v in VARS + tuple(f"x{i}" for i in range(99)) if v not in used)
        return x, replace_constant(f, c, Var(x)), c

    # connective rules

    def and_i(self, g, d, ctx):
        return node("AndI", g, self.gen(g.left, d, ctx), self.gen(g.right, d, ctx))

    def and_e_l(self, g, d, ctx):
        return node("AndE_L", g, self.gen(And(g, self.small()), d, ctx))

    def and_e_r(self, g, d, ctx):
        return node("AndE_R", g, self.gen(And(self.small(), g), d, ctx))

    def or_i_l(self, g, d, ctx):
        return node("OrI_L", g, self.gen(g.left, d, ctx))

    def or_i_r(self, g, d, ctx):
        return node("OrI_R", g, self.gen(g.right, d, ctx))

    def _split(self, rule, g, d, ctx, major, left, right):
        return node(rule, g, self.gen(major, d, ctx), self.gen(g, d, ctx | {left}),
                    self.gen(g, d, ctx | {right}), discharge=[self.label(left), self.label(right)])

    def or_e(self, g, d, ctx):
        a, b = self.small(), self.small()
        return self._split("OrE", g, d, ctx, Or(a, b), a, b)

    def neg_and_e(self, g, d, ctx):
        a, b = self.small(), self.small()
        return self._split("NegAndE", g, d, ctx, Neg(And(a, b)), Neg(a), Neg(b))

    def neg_and_i_l(self, g, d, ctx):
        return node("NegAndI_L", g, self.gen(Neg(g.sub.left), d, ctx))

    def neg_and_i_r(self, g, d, ctx):
        return node("NegAndI_R", g, self.gen(Neg(g.sub.right), d, ctx))

    def neg_or_i(self, g, d, ctx):
        return node("NegOrI", g, self.gen(Neg(g.sub.left), d, ctx), self.gen(Neg(g.sub.right), d, ctx))

    def neg_or_e_l(self, g, d, ctx):
        return node("NegOrE_L", g, self.gen(Neg(Or(g.sub, self.small())), d, ctx))

    def neg_or_e_r(self, g, d, ctx):
        return node("NegOrE_R", g, self.gen(Neg(Or(self.small(), g.sub)), d, ctx))

    def dni(self, g, d, ctx):
        return node("DNI", g, self.gen(g.sub.sub, d, ctx))

    def dne(self, g, d, ctx):
        return node("DNE", g, self.gen(Neg(Neg(g)), d, ctx))

    def imp_i(self, g, d, ctx):
        return node("ImpI", g, self.gen(g.right, d, ctx | {g.left}), discharge=[self.label(g.left)])

    def imp_e(self, g, d, ctx):
        a = self.small()
        return node("ImpE", g, self.gen(Imp(a, g), d, ctx), self.gen(a, d, ctx))

    def neg_imp_i(self, g, d, ctx):
        return node("NegImpI", g, self.gen(g.sub.left, d, ctx), self.gen(Neg(g.sub.right), d, ctx))

    def neg_imp_e_l(self, g, d, ctx):
        return node("NegImpE_L", g, self.gen(Neg(Imp(g, self.small())), d, ctx))

    def neg_imp_e_r(self, g, d, ctx):
        return node("NegImpE_R", g, self.gen(Neg(Imp(self.small(), g.sub)), d, ctx))

    # identity rules

    def pex(self, g, d, ctx):
        c = self.const()
        return node("PEX_D", g, self.gen(Def(c), d, ctx), self.gen(Neg(Def(c)), d, ctx))

    def pem(self, g, d, ctx):
        return node("PEM_D", g)

    def def_i(self, g, d, ctx):
        c = g.term
        preds = [p for p, n in self.sig.predicates.items() if n > 0]
        if preds and self.rng.random() < 0.6:
            p = self.rng.choice(sorted(preds))
            n = self.sig.predicates[p]
            i = self.rng.randrange(n)
            args = tuple(c if j == i else self.const() for j in range(n))
            prem = Atom(p, args)
        else:
            i = self.rng.randrange(2)
            other = self.const()
            prem = Id(c, other) if i == 0 else Id(other, c)
        if self.rng.random() < 0.4:
            prem = Neg(prem)
        return node("DefI", g, self.gen(prem, d, ctx), index=i + 1)

    def eq_i(self, g, d, ctx):
        return node("EqI", g, self.gen(Def(g.left), d, ctx))

    def eq_e(self, g, d, ctx):
        x, tmpl, c2 = self.abstract(g)
        c1 = self.const()
        return node("EqE", g, self.gen(substitute(tmpl, x, c1), d, ctx), self.gen(Id(c1, c2), d, ctx),
                    template=tmpl, var=x)

    def neq_i(self, g, d, ctx):
        c1, c2 = g.sub.left, g.sub.right
        x = Var("x")
        r = self.rng.random()
        if r < self.d_template_rate / 2:
            tmpl = Def(x)
        elif r < self.d_template_rate:
            tmpl = Id(x, x)
        else:
            terms = [Const(c) for c in self.sig.constants]
            preds = [p for p, n in self.sig.predicates.items() if n > 0]
            if preds and self.rng.random() < 0.6:
                p = self.rng.choice(sorted(preds))
                n = self.sig.predicates[p]
                i = self.rng.randrange(n)
                tmpl = Atom(p, tuple(x if j == i else self.rng.choice(terms) for j in range(n)))
            else:
                t = self.rng.choice(terms)
                tmpl = Id(x, t) if self.rng.random() < 0.5 else Id(t, x)
        return node("NeqI", g, self.gen(substitute(tmpl, "x", c1), d, ctx),
                    self.gen(Neg(substitute(tmpl, "x", c2)), d, ctx), template=tmpl, var="x")

    # quantifier rules

    def all_i(self, g, d, ctx):
        c = self.fresh()
        return node("AllI_D", g, self.gen(substitute(g.body, g.var, c), d, ctx | {Def(c)}),
                    discharge=[self.label(Def(c))], eigen=c.name)

    def neg_ex_i(self, g, d, ctx):
        c = self.fresh()
        s = g.sub
        return node("NegExI_D", g, self.gen(Neg(substitute(s.body, s.var, c)), d, ctx | {Def(c)}),
                    discharge=[self.label(Def(c))], eigen=c.name)

    def ex_i(self, g, d, ctx):
        c = self.const()
        return node("ExI_D", g, self.gen(substitute(g.body, g.var, c), d, ctx), self.gen(Def(c), d, ctx))

    def neg_all_i(self, g, d, ctx):
        c = self.const()
        s = g.sub
        return node("NegAllI_D", g, self.gen(Neg(substitute(s.body, s.var, c)), d, ctx),
                    self.gen(Def(c), d, ctx))

    def all_e(self, g, d, ctx):
        x, body, c = self.abstract(g)
        return node("AllE_D", g, self.gen(Forall(x, body), d, ctx), self.gen(Def(c), d, ctx))

    def neg_ex_e(self, g, d, ctx):
        x, body, c = self.abstract(g.sub)
        return node("NegExE_D", g, self.gen(Neg(Exists(x, body)), d, ctx), self.gen(Def(c), d, ctx))

    def _elim(self, rule, g, d, ctx, negated):
        x = "x"
        body = self.small(free=(x,))
        while x not in free_vars(body) and self.rng.random() < 0.8:
            body = self.small(free=(x,))
        c = self.fresh()
        inst = substitute(body, x, c)
        if negated:
            major, inst = Neg(Forall(x, body)), Neg(inst)
        else:
            major = Exists(x, body)
        minor = self.gen(g, d, ctx | {inst, Def(c)})
        return node(rule, g, self.gen(major, d, ctx), minor,
                    discharge=[self.label(inst), self.label(Def(c))], eigen=c.name)

    def ex_e(self, g, d, ctx):
        return self._elim("ExE_D", g, d, ctx, False)

    def neg_all_e(self, g, d, ctx):
        return self._elim("NegAllE_D", g, d, ctx, True)


def _atomic_core(f):
    core = f.sub if isinstance(f, Neg) else f
    return core if isinstance(core, (Atom, Id, Def)) else None


def _bound_vars(f) -> set[str]:
    out = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, (Forall, Exists)):
            out.add(g.var)
            stack.append(g.body)
        elif isinstance(g, Neg):
            stack.append(g.sub)
        elif isinstance(g, (And, Or, Imp)):
            stack += [g.left, g.right]
    return out


def seeded_neqi_on_d(sig: Signature) -> Derivation:
    """NeqI with template D(x): {D(c1), ~D(c2)} |- c1 != c2 (permissive only)."""
    c1, c2 = (Const(c) for c in sig.constants[:2])
    x = Var("x")
    return node("NeqI", neq(c1, c2), hyp(Def(c1), 1), hyp(Neg(Def(c2)), 2), template=Def(x), var="x")
