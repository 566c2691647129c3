"""Natural-deduction derivations for FFDE and FN4, and their checker.

A derivation is a tree of rule applications.  Hypotheses are ``Hyp`` leaves
carrying an integer label; a discharging rule names the labels it closes.
Rule templates for the identity rules and the eigenconstants of the
quantifier rules travel in ``attrs``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .syntax import (FN4, And, Atom, Const, Def, Exists, Forall, Formula, Id, Imp, Neg, Or,
                     Signature, Var, constants_of, count_free, free_vars, has_implication,
                     is_atomic, neq, parse_formula, render, substitute, subformulas)

STRICT = "strict"
PERMISSIVE = "permissive"
MODES = (STRICT, PERMISSIVE)


class ProofError(ValueError):
    code = "ProofError"

    def __init__(self, message: str, path: tuple = ()):
        self.path = path
        where = f" at node {'/'.join(map(str, path)) or 'root'}" if path is not None else ""
        super().__init__(f"{self.code}: {message}{where}")


class RuleMismatch(ProofError):
    code = "RuleMismatch"


class FreshnessViolation(ProofError):
    code = "FreshnessViolation"


class TemplateViolation(ProofError):
    code = "TemplateViolation"


class DischargeViolation(ProofError):
    code = "DischargeViolation"


class ModeViolation(ProofError):
    code = "ModeViolation"


class PreconditionViolation(ValueError):
    code = "PreconditionViolation"


@dataclass(frozen=True, eq=False)
class Derivation:
    rule: str
    conclusion: Formula
    premises: tuple["Derivation", ...] = ()
    attrs: dict = field(default_factory=dict)
    label: int | None = None

    def size(self) -> int:
        return 1 + sum(p.size() for p in self.premises)

    def height(self) -> int:
        return 1 + max((p.height() for p in self.premises), default=0)

    def to_json(self) -> dict:
        if self.rule == "Hyp":
            return {"rule": "Hyp", "conclusion": render(self.conclusion), "label": self.label}
        out = {"rule": self.rule, "conclusion": render(self.conclusion),
               "premises": [p.to_json() for p in self.premises]}
        if self.attrs:
            attrs = dict(self.attrs)
            if "template" in attrs and not isinstance(attrs["template"], str):
                attrs["template"] = render(attrs["template"])
            out["attrs"] = attrs
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def hyp(f: Formula, label: int) -> Derivation:
    return Derivation("Hyp", f, label=label)


def node(rule: str, conclusion: Formula, *premises: Derivation, **attrs) -> Derivation:
    return Derivation(rule, conclusion, tuple(premises), attrs)


def _eigen_names(data: dict) -> set[str]:
    out = set()
    if isinstance(data.get("attrs"), dict) and isinstance(data["attrs"].get("eigen"), str):
        out.add(data["attrs"]["eigen"])
    for p in data.get("premises", []):
        out |= _eigen_names(p)
    return out


def signature_for(data: dict, sig: Signature) -> Signature:
    """``sig`` extended by the eigenconstants a proof file introduces."""
    return sig.with_constants(sorted(_eigen_names(data)))


def from_json(data: dict, sig: Signature) -> Derivation:
    sig = signature_for(data, sig)
    return _from_json(data, sig)


def _from_json(data: dict, sig: Signature) -> Derivation:
    rule = data["rule"]
    concl = parse_formula(data["conclusion"], sig)
    if rule == "Hyp":
        return Derivation("Hyp", concl, label=int(data["label"]))
    attrs = dict(data.get("attrs", {}))
    if isinstance(attrs.get("template"), str):
        attrs["template"] = parse_formula(attrs["template"], sig, variables=[attrs.get("var", "x")])
    prem = tuple(_from_json(p, sig) for p in data.get("premises", []))
    return Derivation(rule, concl, prem, attrs)


def load(path, sig: Signature) -> Derivation:
    return from_json(json.loads(Path(path).read_text()), sig)


@dataclass(frozen=True)
class CheckedSequent:
    assumptions: frozenset
    conclusion: Formula

    def __str__(self):
        left = ", ".join(sorted(render(a) for a in self.assumptions))
        return f"{left} ⊢ {render(self.conclusion)}" if left else f"⊢ {render(self.conclusion)}"


# -- pattern helpers ---------------------------------------------------------

def _match_term(tmpl, inst, var, found):
    if isinstance(tmpl, Var) and tmpl.name == var:
        if found[0] is None:
            found[0] = inst
            return not isinstance(inst, Var)
        return found[0] == inst
    return tmpl == inst


def _match(tmpl: Formula, inst: Formula, var: str, found: list) -> bool:
    if type(tmpl) is not type(inst):
        return False
    if isinstance(tmpl, Atom):
        return (tmpl.pred == inst.pred and len(tmpl.terms) == len(inst.terms)
                and all(_match_term(a, b, var, found) for a, b in zip(tmpl.terms, inst.terms)))
    if isinstance(tmpl, Id):
        return _match_term(tmpl.left, inst.left, var, found) and _match_term(tmpl.right, inst.right, var, found)
    if isinstance(tmpl, Def):
        return _match_term(tmpl.term, inst.term, var, found)
    if isinstance(tmpl, Neg):
        return _match(tmpl.sub, inst.sub, var, found)
    if isinstance(tmpl, (And, Or, Imp)):
        return _match(tmpl.left, inst.left, var, found) and _match(tmpl.right, inst.right, var, found)
    if tmpl.var != inst.var:
        return False
    if tmpl.var == var:
        return tmpl == inst
    return _match(tmpl.body, inst.body, var, found)


def instance_term(template: Formula, var: str, inst: Formula):
    """The closed term ``t`` with ``template(t/var) == inst``.

    Returns ``(True, None)`` when ``var`` is not free in ``template`` and the
    formulas coincide, ``(False, None)`` when ``inst`` is no instance.
    """
    found = [None]
    if not _match(template, inst, var, found):
        return False, None
    return True, found[0]


# -- checker -----------------------------------------------------------------

CONNECTIVE_RULES = {
    "AndI", "AndE_L", "AndE_R", "OrI_L", "OrI_R", "OrE", "NegAndI_L", "NegAndI_R", "NegAndE",
    "NegOrI", "NegOrE_L", "NegOrE_R", "DNI", "DNE",
}
QUANTIFIER_RULES = {
    "AllI_D", "AllE_D", "ExI_D", "ExE_D", "NegAllI_D", "NegAllE_D", "NegExI_D", "NegExE_D",
}
IDENTITY_RULES = {"DefI", "PEX_D", "PEM_D", "EqI", "EqE", "NeqI"}
IMPLICATION_RULES = {"ImpI", "ImpE", "NegImpI", "NegImpE_L", "NegImpE_R"}
ALL_RULES = {"Hyp"} | CONNECTIVE_RULES | QUANTIFIER_RULES | IDENTITY_RULES | IMPLICATION_RULES


class _Checker:
    def __init__(self, sig: Signature, mode: str):
        if mode not in MODES:
            raise ValueError(f"unknown mode {mode!r}")
        self.sig = sig
        self.mode = mode

    def run(self, d: Derivation, path=()) -> frozenset:
        c = d.conclusion
        if free_vars(c):
            raise RuleMismatch(f"conclusion {render(c)} is not a sentence", path)
        if self.sig.logic != FN4 and has_implication(c):
            raise ModeViolation("implication occurs in an FFDE derivation", path)
        if d.rule not in ALL_RULES:
            raise RuleMismatch(f"unknown rule {d.rule!r}", path)
        if d.rule in IMPLICATION_RULES and self.sig.logic != FN4:
            raise ModeViolation(f"{d.rule} is an FN4 rule", path)
        if d.rule == "Hyp":
            if d.premises or d.label is None:
                raise RuleMismatch("Hyp is a labelled leaf", path)
            return frozenset({(c, d.label)})
        opens = [self.run(p, path + (i,)) for i, p in enumerate(d.premises)]
        handler = getattr(self, "r_" + d.rule)
        return handler(d, [p.conclusion for p in d.premises], opens, path)

    # helpers

    def arity(self, d, n, path):
        if len(d.premises) != n:
            raise RuleMismatch(f"{d.rule} takes {n} premises, got {len(d.premises)}", path)

    def want(self, cond, msg, path):
        if not cond:
            raise RuleMismatch(msg, path)

    def labels(self, d, path) -> set[int]:
        raw = d.attrs.get("discharge", [])
        if isinstance(raw, int):
            raw = [raw]
        try:
            return {int(x) for x in raw}
        except (TypeError, ValueError):
            raise DischargeViolation(f"bad discharge labels {raw!r}", path)

    def discharge(self, opens: frozenset, labels: set[int], allowed: set, path,
                  elsewhere: frozenset = frozenset()) -> frozenset:
        """Close the hypotheses of ``opens`` carrying one of ``labels``.

        A labelled hypothesis whose formula is in ``elsewhere`` belongs to a
        sibling premise's discharge and stays open here.
        """
        keep = set()
        for f, lab in opens:
            if lab in labels and f in elsewhere and f not in allowed:
                keep.add((f, lab))
            elif lab in labels:
                if f not in allowed:
                    shown = ", ".join(sorted(map(render, allowed)))
                    raise DischargeViolation(
                        f"hypothesis {render(f)} labelled {lab} cannot be discharged here "
                        f"(expected {shown})", path)
            else:
                keep.add((f, lab))
        return frozenset(keep)

    def union(self, *sets) -> frozenset:
        out = frozenset()
        for s in sets:
            out |= s
        return out

    def _template(self, d, path) -> tuple[Formula, str]:
        t = d.attrs.get("template")
        x = d.attrs.get("var", "x")
        if t is None:
            raise RuleMismatch(f"{d.rule} needs a template and variable in attrs", path)
        if isinstance(t, str):
            t = parse_formula(t, self.sig, variables=[x])
        if not free_vars(t) <= {x}:
            raise TemplateViolation(f"template {render(t)} has free variables besides {x}", path)
        return t, x

    def _closed_const(self, t, path, what):
        if not isinstance(t, Const):
            raise FreshnessViolation(f"{what} must be an individual constant, got {t}", path)
        return t

    def _fresh_check(self, c: Const, forms, path, where):
        for f in forms:
            if c.name in constants_of(f):
                raise FreshnessViolation(f"eigenconstant {c} occurs in {where} {render(f)}", path)

    # connectives

    def r_AndI(self, d, p, o, path):
        self.arity(d, 2, path)
        self.want(d.conclusion == And(p[0], p[1]), "AndI: conclusion must be the conjunction of the premises", path)
        return self.union(*o)

    def r_AndE_L(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(p[0], And) and p[0].left == d.conclusion, "AndE_L: premise must be A & B, conclusion A", path)
        return o[0]

    def r_AndE_R(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(p[0], And) and p[0].right == d.conclusion, "AndE_R: premise must be A & B, conclusion B", path)
        return o[0]

    def r_OrI_L(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(d.conclusion, Or) and d.conclusion.left == p[0], "OrI_L: conclusion must be A | B from A", path)
        return o[0]

    def r_OrI_R(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(d.conclusion, Or) and d.conclusion.right == p[0], "OrI_R: conclusion must be A | B from B", path)
        return o[0]

    def _case_split(self, d, p, o, path, major, left, right):
        labs = self.labels(d, path)
        self.want(p[1] == d.conclusion and p[2] == d.conclusion,
                  f"{d.rule}: both minor premises must conclude {render(d.conclusion)}", path)
        return self.union(o[0], self.discharge(o[1], labs, {left}, path, frozenset({right})),
                          self.discharge(o[2], labs, {right}, path, frozenset({left})))

    def r_OrE(self, d, p, o, path):
        self.arity(d, 3, path)
        self.want(isinstance(p[0], Or), "OrE: major premise must be a disjunction", path)
        return self._case_split(d, p, o, path, p[0], p[0].left, p[0].right)

    def r_NegAndI_L(self, d, p, o, path):
        self.arity(d, 1, path)
        c = d.conclusion
        self.want(isinstance(c, Neg) and isinstance(c.sub, And) and p[0] == Neg(c.sub.left),
                  "NegAndI_L: from ~A conclude ~(A & B)", path)
        return o[0]

    def r_NegAndI_R(self, d, p, o, path):
        self.arity(d, 1, path)
        c = d.conclusion
        self.want(isinstance(c, Neg) and isinstance(c.sub, And) and p[0] == Neg(c.sub.right),
                  "NegAndI_R: from ~B conclude ~(A & B)", path)
        return o[0]

    def r_NegAndE(self, d, p, o, path):
        self.arity(d, 3, path)
        self.want(isinstance(p[0], Neg) and isinstance(p[0].sub, And), "NegAndE: major premise must be ~(A & B)", path)
        return self._case_split(d, p, o, path, p[0], Neg(p[0].sub.left), Neg(p[0].sub.right))

    def r_NegOrI(self, d, p, o, path):
        self.arity(d, 2, path)
        c = d.conclusion
        self.want(isinstance(c, Neg) and isinstance(c.sub, Or) and p[0] == Neg(c.sub.left)
                  and p[1] == Neg(c.sub.right), "NegOrI: from ~A and ~B conclude ~(A | B)", path)
        return self.union(*o)

    def r_NegOrE_L(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(p[0], Neg) and isinstance(p[0].sub, Or) and d.conclusion == Neg(p[0].sub.left),
                  "NegOrE_L: from ~(A | B) conclude ~A", path)
        return o[0]

    def r_NegOrE_R(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(p[0], Neg) and isinstance(p[0].sub, Or) and d.conclusion == Neg(p[0].sub.right),
                  "NegOrE_R: from ~(A | B) conclude ~B", path)
        return o[0]

    def r_DNI(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(d.conclusion == Neg(Neg(p[0])), "DNI: from A conclude ~~A", path)
        return o[0]

    def r_DNE(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(p[0] == Neg(Neg(d.conclusion)), "DNE: from ~~A conclude A", path)
        return o[0]

    # definedness and identity

    def r_DefI(self, d, p, o, path):
        self.arity(d, 1, path)
        a = p[0].sub if isinstance(p[0], Neg) else p[0]
        self.want(isinstance(a, (Atom, Id)), "DefI: premise must be a (negated) predicate or identity atom", path)
        args = a.terms if isinstance(a, Atom) else (a.left, a.right)
        self.want(isinstance(d.conclusion, Def), "DefI: conclusion must be D(t)", path)
        idx = d.attrs.get("index")
        if idx is not None:
            self.want(1 <= int(idx) <= len(args) and args[int(idx) - 1] == d.conclusion.term,
                      f"DefI: argument {idx} is not {d.conclusion.term}", path)
        else:
            self.want(d.conclusion.term in args, f"DefI: {d.conclusion.term} is not an argument of the premise", path)
        return o[0]

    def r_PEX_D(self, d, p, o, path):
        self.arity(d, 2, path)
        self.want(isinstance(p[0], Def) and p[1] == Neg(p[0]), "PEX_D: premises must be D(c) and ~D(c)", path)
        return self.union(*o)

    def r_PEM_D(self, d, p, o, path):
        self.arity(d, 0, path)
        c = d.conclusion
        self.want(isinstance(c, Or) and isinstance(c.left, Def) and c.right == Neg(c.left),
                  "PEM_D: conclusion must be D(c) | ~D(c)", path)
        return frozenset()

    def r_EqI(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(p[0], Def) and d.conclusion == Id(p[0].term, p[0].term), "EqI: from D(c) conclude c = c", path)
        return o[0]

    def r_EqE(self, d, p, o, path):
        self.arity(d, 2, path)
        tmpl, x = self._template(d, path)
        core = tmpl.sub if isinstance(tmpl, Neg) else tmpl
        if not is_atomic(core):
            raise TemplateViolation(f"EqE template {render(tmpl)} is not atomic or negated atomic", path)
        self.want(isinstance(p[1], Id), "EqE: second premise must be an identity", path)
        c1, c2 = p[1].left, p[1].right
        self.want(p[0] == substitute(tmpl, x, c1), f"EqE: first premise is not the template at {c1}", path)
        self.want(d.conclusion == substitute(tmpl, x, c2), f"EqE: conclusion is not the template at {c2}", path)
        return self.union(*o)

    def r_NeqI(self, d, p, o, path):
        self.arity(d, 2, path)
        tmpl, x = self._template(d, path)
        if not is_atomic(tmpl):
            raise TemplateViolation(f"NeqI template {render(tmpl)} is not atomic", path)
        if x not in free_vars(tmpl):
            raise TemplateViolation(f"NeqI template {render(tmpl)} has no free {x}", path)
        if self.mode == STRICT:
            if isinstance(tmpl, Def):
                raise TemplateViolation("NeqI template headed by D is only accepted in permissive mode", path)
            if count_free(tmpl, x) != 1:
                raise TemplateViolation(
                    f"NeqI template {render(tmpl)} must contain {x} exactly once in strict mode", path)
        c = d.conclusion
        self.want(isinstance(c, Neg) and isinstance(c.sub, Id), "NeqI: conclusion must be c1 != c2", path)
        c1, c2 = c.sub.left, c.sub.right
        self.want(p[0] == substitute(tmpl, x, c1), f"NeqI: first premise is not the template at {c1}", path)
        self.want(p[1] == Neg(substitute(tmpl, x, c2)), f"NeqI: second premise is not the negated template at {c2}", path)
        return self.union(*o)

    # quantifiers

    def _instance(self, body, var, inst, explicit, path, rule):
        ok, t = instance_term(body, var, inst)
        self.want(ok, f"{rule}: {render(inst)} is not an instance of {render(body)}", path)
        if t is None and explicit is not None:
            t = explicit
        if explicit is not None and t != explicit:
            raise RuleMismatch(f"{rule}: instance uses {t}, attrs name {explicit}", path)
        return t

    def _gen_intro(self, d, p, o, path, body, var, inst):
        # AllI_D / NegExI_D: c fresh; discharges D(c)
        eig = d.attrs.get("eigen")
        explicit = Const(eig) if eig is not None else None
        c = self._instance(body, var, inst, explicit, path, d.rule)
        labs = self.labels(d, path)
        if c is None:
            allowed = {f for f, lab in o[0] if lab in labs and isinstance(f, Def)}
            if len({f.term for f in allowed}) > 1:
                raise DischargeViolation(f"{d.rule}: discharged D-hypotheses disagree", path)
            if allowed:
                c = next(iter(allowed)).term
        if c is None:
            return self.discharge(o[0], labs, set(), path)
        c = self._closed_const(c, path, "eigenconstant")
        self._fresh_check(c, [body], path, "the quantified formula")
        rest = self.discharge(o[0], labs, {Def(c)}, path)
        self._fresh_check(c, [f for f, _ in rest if f != Def(c)], path, "open hypothesis")
        return rest

    def _gen_elim(self, d, p, o, path, body, var, pattern, make_inst):
        # ExE_D / NegAllE_D: discharges the instance and D(c) in the minor premise
        labs = self.labels(d, path)
        self.want(p[1] == d.conclusion, f"{d.rule}: minor premise must conclude {render(d.conclusion)}", path)
        eig = d.attrs.get("eigen")
        c = Const(eig) if eig is not None else None
        if c is None:
            for f, lab in o[1]:
                if lab in labs and isinstance(f, Def):
                    c = f.term
                    break
        if c is None:
            for f, lab in o[1]:
                if lab in labs:
                    ok, t = instance_term(pattern, var, f)
                    if ok and t is not None:
                        c = t
                        break
        if c is None:
            return self.union(o[0], self.discharge(o[1], labs, set(), path))
        c = self._closed_const(c, path, "eigenconstant")
        self._fresh_check(c, [body], path, "the quantified formula")
        self._fresh_check(c, [d.conclusion], path, "the conclusion")
        rest = self.discharge(o[1], labs, {make_inst(c), Def(c)}, path)
        self._fresh_check(c, [f for f, _ in o[0] | rest], path, "open hypothesis")
        return self.union(o[0], rest)

    def r_AllI_D(self, d, p, o, path):
        self.arity(d, 1, path)
        c = d.conclusion
        self.want(isinstance(c, Forall), "AllI_D: conclusion must be universal", path)
        return self._gen_intro(d, p, o, path, c.body, c.var, p[0])

    def r_NegExI_D(self, d, p, o, path):
        self.arity(d, 1, path)
        c = d.conclusion
        self.want(isinstance(c, Neg) and isinstance(c.sub, Exists) and isinstance(p[0], Neg),
                  "NegExI_D: from ~A(c/x) conclude ~exists x. A", path)
        return self._gen_intro(d, p, o, path, c.sub.body, c.sub.var, p[0].sub)

    def r_ExE_D(self, d, p, o, path):
        self.arity(d, 2, path)
        self.want(isinstance(p[0], Exists), "ExE_D: major premise must be existential", path)
        body, var = p[0].body, p[0].var
        return self._gen_elim(d, p, o, path, body, var, body, lambda t: substitute(body, var, t))

    def r_NegAllE_D(self, d, p, o, path):
        self.arity(d, 2, path)
        self.want(isinstance(p[0], Neg) and isinstance(p[0].sub, Forall), "NegAllE_D: major premise must be ~forall", path)
        body, var = p[0].sub.body, p[0].sub.var
        return self._gen_elim(d, p, o, path, body, var, Neg(body), lambda t: Neg(substitute(body, var, t)))

    def _def_premise(self, f, path, rule):
        self.want(isinstance(f, Def), f"{rule}: second premise must be D(c)", path)
        return f.term

    def r_AllE_D(self, d, p, o, path):
        self.arity(d, 2, path)
        self.want(isinstance(p[0], Forall), "AllE_D: first premise must be universal", path)
        t = self._def_premise(p[1], path, d.rule)
        self.want(d.conclusion == substitute(p[0].body, p[0].var, t), "AllE_D: conclusion must be A(c/x)", path)
        return self.union(*o)

    def r_ExI_D(self, d, p, o, path):
        self.arity(d, 2, path)
        c = d.conclusion
        self.want(isinstance(c, Exists), "ExI_D: conclusion must be existential", path)
        t = self._def_premise(p[1], path, d.rule)
        self.want(p[0] == substitute(c.body, c.var, t), "ExI_D: first premise must be A(c/x)", path)
        return self.union(*o)

    def r_NegAllI_D(self, d, p, o, path):
        self.arity(d, 2, path)
        c = d.conclusion
        self.want(isinstance(c, Neg) and isinstance(c.sub, Forall), "NegAllI_D: conclusion must be ~forall", path)
        t = self._def_premise(p[1], path, d.rule)
        self.want(p[0] == Neg(substitute(c.sub.body, c.sub.var, t)), "NegAllI_D: first premise must be ~A(c/x)", path)
        return self.union(*o)

    def r_NegExE_D(self, d, p, o, path):
        self.arity(d, 2, path)
        self.want(isinstance(p[0], Neg) and isinstance(p[0].sub, Exists), "NegExE_D: first premise must be ~exists", path)
        t = self._def_premise(p[1], path, d.rule)
        self.want(d.conclusion == Neg(substitute(p[0].sub.body, p[0].sub.var, t)),
                  "NegExE_D: conclusion must be ~A(c/x)", path)
        return self.union(*o)

    # implication

    def r_ImpI(self, d, p, o, path):
        self.arity(d, 1, path)
        c = d.conclusion
        self.want(isinstance(c, Imp) and c.right == p[0], "ImpI: from B conclude A -> B", path)
        return self.discharge(o[0], self.labels(d, path), {c.left}, path)

    def r_ImpE(self, d, p, o, path):
        self.arity(d, 2, path)
        self.want(isinstance(p[0], Imp) and p[0].left == p[1] and p[0].right == d.conclusion,
                  "ImpE: from A -> B and A conclude B", path)
        return self.union(*o)

    def r_NegImpI(self, d, p, o, path):
        self.arity(d, 2, path)
        c = d.conclusion
        self.want(isinstance(c, Neg) and isinstance(c.sub, Imp) and p[0] == c.sub.left and p[1] == Neg(c.sub.right),
                  "NegImpI: from A and ~B conclude ~(A -> B)", path)
        return self.union(*o)

    def r_NegImpE_L(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(p[0], Neg) and isinstance(p[0].sub, Imp) and d.conclusion == p[0].sub.left,
                  "NegImpE_L: from ~(A -> B) conclude A", path)
        return o[0]

    def r_NegImpE_R(self, d, p, o, path):
        self.arity(d, 1, path)
        self.want(isinstance(p[0], Neg) and isinstance(p[0].sub, Imp) and d.conclusion == Neg(p[0].sub.right),
                  "NegImpE_R: from ~(A -> B) conclude ~B", path)
        return o[0]


def check(d: Derivation, sig: Signature, mode: str = STRICT) -> CheckedSequent:
    opens = _Checker(sig, mode).run(d)
    return CheckedSequent(frozenset(f for f, _ in opens), d.conclusion)


def assumptions(d: Derivation, sig: Signature, mode: str = STRICT) -> frozenset:
    return check(d, sig, mode).assumptions


# -- derived rules -----------------------------------------------------------

def _all_constants(d: Derivation) -> set[str]:
    out = set(constants_of(d.conclusion))
    for p in d.premises:
        out |= _all_constants(p)
    return out


class _Builder:
    def __init__(self, sig: Signature | None, avoid, mode: str):
        self.sig = sig or Signature((), {})
        self.avoid = set(avoid)
        self.mode = mode
        self.next_label = 1

    def label(self) -> int:
        k = self.next_label
        self.next_label += 1
        return k

    def fresh(self, *ds: Derivation) -> Const:
        for d in ds:
            self.avoid |= _all_constants(d)
        name = self.sig.fresh_constant("c", self.avoid)
        self.avoid.add(name)
        return Const(name)

    # Sym!=: from c2 != c1 conclude c1 != c2
    def sym_neq(self, d: Derivation, c1, c2) -> Derivation:
        dc1 = node("DefI", Def(c1), d, index=2)
        refl = node("EqI", Id(c1, c1), dc1)
        return node("NeqI", neq(c1, c2), refl, d, template=Id(Var("x"), c1), var="x")

    def sym_eq(self, d: Derivation, c1, c2) -> Derivation:
        # from c1 = c2 conclude c2 = c1
        refl = node("EqI", Id(c1, c1), node("DefI", Def(c1), d, index=1))
        return node("EqE", Id(c2, c1), refl, d, template=Id(Var("x"), c1), var="x")

    def gen_eqe(self, a: Formula, x: str, c1, c2, d1: Derivation, d2: Derivation) -> Derivation:
        """From d1 : A(c1/x) and d2 : c1 = c2 derive A(c2/x)."""
        if x not in free_vars(a):
            return d1
        goal = substitute(a, x, c2)
        core = a.sub if isinstance(a, Neg) else a
        if is_atomic(core):
            return node("EqE", goal, d1, d2, template=a, var=x)
        if isinstance(a, And):
            left = self.gen_eqe(a.left, x, c1, c2, node("AndE_L", substitute(a.left, x, c1), d1), d2)
            right = self.gen_eqe(a.right, x, c1, c2, node("AndE_R", substitute(a.right, x, c1), d1), d2)
            return node("AndI", goal, left, right)
        if isinstance(a, Or):
            k1, k2 = self.label(), self.label()
            h1 = hyp(substitute(a.left, x, c1), k1)
            h2 = hyp(substitute(a.right, x, c1), k2)
            b1 = node("OrI_L", goal, self.gen_eqe(a.left, x, c1, c2, h1, d2))
            b2 = node("OrI_R", goal, self.gen_eqe(a.right, x, c1, c2, h2, d2))
            return node("OrE", goal, d1, b1, b2, discharge=[k1, k2])
        if isinstance(a, Imp):
            k = self.label()
            h = hyp(substitute(a.left, x, c2), k)
            back = self.gen_eqe(a.left, x, c2, c1, h, self.sym_eq(d2, c1, c2))
            mid = node("ImpE", substitute(a.right, x, c1), d1, back)
            return node("ImpI", goal, self.gen_eqe(a.right, x, c1, c2, mid, d2), discharge=[k])
        if isinstance(a, Forall):
            c, k = self.fresh(d1, d2), self.label()
            dc = hyp(Def(c), k)
            body = substitute(a.body, a.var, c)
            inst = node("AllE_D", substitute(body, x, c1), d1, dc)
            return node("AllI_D", goal, self.gen_eqe(body, x, c1, c2, inst, d2), discharge=[k], eigen=c.name)
        if isinstance(a, Exists):
            c, k = self.fresh(d1, d2), self.label()
            body = substitute(a.body, a.var, c)
            h = hyp(substitute(body, x, c1), k)
            moved = self.gen_eqe(body, x, c1, c2, h, d2)
            intro = node("ExI_D", goal, moved, hyp(Def(c), k))
            return node("ExE_D", goal, d1, intro, discharge=[k], eigen=c.name)
        b = a.sub
        if isinstance(b, Neg):
            inner = self.gen_eqe(b.sub, x, c1, c2, node("DNE", substitute(b.sub, x, c1), d1), d2)
            return node("DNI", goal, inner)
        if isinstance(b, And):
            k1, k2 = self.label(), self.label()
            h1 = hyp(Neg(substitute(b.left, x, c1)), k1)
            h2 = hyp(Neg(substitute(b.right, x, c1)), k2)
            l = node("NegAndI_L", goal, self.gen_eqe(Neg(b.left), x, c1, c2, h1, d2))
            r = node("NegAndI_R", goal, self.gen_eqe(Neg(b.right), x, c1, c2, h2, d2))
            return node("NegAndE", goal, d1, l, r, discharge=[k1, k2])
        if isinstance(b, Or):
            l = self.gen_eqe(Neg(b.left), x, c1, c2, node("NegOrE_L", Neg(substitute(b.left, x, c1)), d1), d2)
            r = self.gen_eqe(Neg(b.right), x, c1, c2, node("NegOrE_R", Neg(substitute(b.right, x, c1)), d1), d2)
            return node("NegOrI", goal, l, r)
        if isinstance(b, Imp):
            l = self.gen_eqe(b.left, x, c1, c2, node("NegImpE_L", substitute(b.left, x, c1), d1), d2)
            r = self.gen_eqe(Neg(b.right), x, c1, c2, node("NegImpE_R", Neg(substitute(b.right, x, c1)), d1), d2)
            return node("NegImpI", goal, l, r)
        if isinstance(b, Forall):
            c, k = self.fresh(d1, d2), self.label()
            body = substitute(b.body, b.var, c)
            h = hyp(Neg(substitute(body, x, c1)), k)
            moved = self.gen_eqe(Neg(body), x, c1, c2, h, d2)
            intro = node("NegAllI_D", goal, moved, hyp(Def(c), k))
            return node("NegAllE_D", goal, d1, intro, discharge=[k], eigen=c.name)
        c, k = self.fresh(d1, d2), self.label()
        body = substitute(b.body, b.var, c)
        inst = node("NegExE_D", Neg(substitute(body, x, c1)), d1, hyp(Def(c), k))
        return node("NegExI_D", goal, self.gen_eqe(Neg(body), x, c1, c2, inst, d2), discharge=[k], eigen=c.name)

    def gen_neqi(self, a: Formula, x: str, c1, c2, d1: Derivation, d2: Derivation) -> Derivation:
        """From d1 : A(c1/x) and d2 : ~A(c2/x) derive c1 != c2."""
        goal = neq(c1, c2)
        if is_atomic(a):
            if self.mode == STRICT and (isinstance(a, Def) or count_free(a, x) != 1):
                raise PreconditionViolation(
                    f"atomic subformula {render(a)} is not a strict NeqI template "
                    f"(needs a predicate or identity atom with exactly one {x})")
            return node("NeqI", goal, d1, d2, template=a, var=x)
        if isinstance(a, And):
            k1, k2 = self.label(), self.label()
            l = self.gen_neqi(a.left, x, c1, c2, node("AndE_L", substitute(a.left, x, c1), d1),
                              hyp(Neg(substitute(a.left, x, c2)), k1))
            r = self.gen_neqi(a.right, x, c1, c2, node("AndE_R", substitute(a.right, x, c1), d1),
                              hyp(Neg(substitute(a.right, x, c2)), k2))
            return node("NegAndE", goal, d2, l, r, discharge=[k1, k2])
        if isinstance(a, Or):
            k1, k2 = self.label(), self.label()
            l = self.gen_neqi(a.left, x, c1, c2, hyp(substitute(a.left, x, c1), k1),
                              node("NegOrE_L", Neg(substitute(a.left, x, c2)), d2))
            r = self.gen_neqi(a.right, x, c1, c2, hyp(substitute(a.right, x, c1), k2),
                              node("NegOrE_R", Neg(substitute(a.right, x, c2)), d2))
            return node("OrE", goal, d1, l, r, discharge=[k1, k2])
        if isinstance(a, Forall):
            c, k = self.fresh(d1, d2), self.label()
            body = substitute(a.body, a.var, c)
            inst = node("AllE_D", substitute(body, x, c1), d1, hyp(Def(c), k))
            inner = self.gen_neqi(body, x, c1, c2, inst, hyp(Neg(substitute(body, x, c2)), k))
            return node("NegAllE_D", goal, d2, inner, discharge=[k], eigen=c.name)
        if isinstance(a, Exists):
            c, k = self.fresh(d1, d2), self.label()
            body = substitute(a.body, a.var, c)
            inst = node("NegExE_D", Neg(substitute(body, x, c2)), d2, hyp(Def(c), k))
            inner = self.gen_neqi(body, x, c1, c2, hyp(substitute(body, x, c1), k), inst)
            return node("ExE_D", goal, d1, inner, discharge=[k], eigen=c.name)
        if isinstance(a, Imp):
            raise PreconditionViolation(f"implication {render(a)} has no generalized NeqI case")
        b = a.sub
        if isinstance(b, Neg):
            l = node("DNE", substitute(b.sub, x, c1), d1)
            r = node("DNE", Neg(substitute(b.sub, x, c2)), d2)
            return self.gen_neqi(b.sub, x, c1, c2, l, r)
        if isinstance(b, Imp):
            raise PreconditionViolation(f"implication {render(b)} has no generalized NeqI case")
        # ~B: swap the roles of c1 and c2 on B, then flip the inequation
        pos = node("DNE", substitute(b, x, c2), d2)
        return self.sym_neq(self.gen_neqi(b, x, c2, c1, pos, d1), c1, c2)


MACROS = ("GenEqE", "GenNeqI", "SymNeq")


def _term(t):
    return Const(t) if isinstance(t, str) else t


def expand_macro(name: str, *args, sig: Signature | None = None, mode: str = STRICT) -> Derivation:
    """Expand a derived rule into primitive rules.

    ``GenEqE(A, x, c1, c2)`` derives A(c2/x) from A(c1/x) and c1 = c2;
    ``GenNeqI(A, x, c1, c2)`` derives c1 != c2 from A(c1/x) and ~A(c2/x);
    ``SymNeq(c1, c2)`` derives c1 != c2 from c2 != c1.  The premises are Hyp
    leaves, so the checked sequent is exactly the rule's schema.
    """
    if name == "SymNeq":
        c1, c2 = map(_term, args)
        b = _Builder(sig, {c1.name, c2.name}, mode)
        return b.sym_neq(hyp(neq(c2, c1), b.label()), c1, c2)
    if name not in MACROS:
        raise ValueError(f"unknown macro {name!r}")
    a, x, c1, c2 = args
    c1, c2 = _term(c1), _term(c2)
    if not free_vars(a) <= {x}:
        raise PreconditionViolation(f"template {render(a)} has free variables besides {x}")
    b = _Builder(sig, constants_of(a) | {c1.name, c2.name}, mode)
    if name == "GenEqE":
        d1 = hyp(substitute(a, x, c1), b.label())
        d2 = hyp(Id(c1, c2), b.label())
        if x not in free_vars(a):
            # keep c1 = c2 among the assumptions
            return node("AndE_L", a, node("AndI", And(a, Id(c1, c2)), d1, d2))
        return b.gen_eqe(a, x, c1, c2, d1, d2)
    for g in subformulas(a):
        if x not in free_vars(g):
            raise PreconditionViolation(f"{x} is not free in the subformula {render(g)}")
    d1 = hyp(substitute(a, x, c1), b.label())
    d2 = hyp(Neg(substitute(a, x, c2)), b.label())
    return b.gen_neqi(a, x, c1, c2, d1, d2)
