"""Signatures, terms and formulas of the free first-order language.

Formulas are immutable trees.  Terms are constants, variables, or diagram
constants ``@a`` naming a domain element ``a`` of some model.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Union

FFDE = "ffde"
FN4 = "fn4"
LOGICS = (FFDE, FN4)
RESERVED = frozenset({"D", "="})


class SyntaxErrorAt(ValueError):
    """Parse or signature error, with a character offset into the input."""

    code = "MalformedSyntax"

    def __init__(self, message: str, pos: int | None = None):
        self.pos = pos
        where = f" at position {pos}" if pos is not None else ""
        super().__init__(f"{self.code}: {message}{where}")


class UnknownIdentifier(SyntaxErrorAt):
    code = "UnknownIdentifier"


class ArityMismatch(SyntaxErrorAt):
    code = "ArityMismatch"


class ImplicationInFFDE(SyntaxErrorAt):
    code = "ImplicationInFFDE"


class SignatureError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    constants: tuple[str, ...] = ()
    predicates: dict[str, int] = field(default_factory=dict)
    logic: str = FFDE

    def __post_init__(self):
        object.__setattr__(self, "constants", tuple(self.constants))
        object.__setattr__(self, "predicates", dict(self.predicates))
        if self.logic not in LOGICS:
            raise SignatureError(f"unknown logic {self.logic!r}")
        if len(set(self.constants)) != len(self.constants):
            raise SignatureError("duplicate constant names")
        clash = set(self.constants) & set(self.predicates)
        if clash:
            raise SignatureError(f"names used as both constant and predicate: {sorted(clash)}")
        bad = (set(self.constants) | set(self.predicates)) & RESERVED
        if bad:
            raise SignatureError(f"reserved names declared: {sorted(bad)}")
        for p, n in self.predicates.items():
            if not isinstance(n, int) or n < 0:
                raise SignatureError(f"predicate {p} has invalid arity {n!r}")

    def __hash__(self):
        return hash((self.constants, tuple(sorted(self.predicates.items())), self.logic))

    def with_constants(self, extra) -> "Signature":
        new = [c for c in extra if c not in self.constants]
        return Signature(self.constants + tuple(new), self.predicates, self.logic)

    def with_logic(self, logic: str) -> "Signature":
        return Signature(self.constants, self.predicates, logic)

    def fresh_constant(self, base: str = "c", avoid=()) -> str:
        """Mint ``base#k`` for the least k making it unused."""
        taken = set(self.constants) | set(avoid)
        k = 1
        while f"{base}#{k}" in taken:
            k += 1
        return f"{base}#{k}"

    def to_json(self) -> dict:
        return {"constants": list(self.constants), "predicates": dict(self.predicates),
                "logic": self.logic}

    @classmethod
    def from_json(cls, data: dict) -> "Signature":
        return cls(tuple(data.get("constants", [])), dict(data.get("predicates", {})),
                   data.get("logic", FFDE))

    @classmethod
    def load(cls, path) -> "Signature":
        return cls.from_json(json.loads(Path(path).read_text()))


# -- terms -------------------------------------------------------------------

@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class DiagramConst:
    element: str

    def __str__(self):
        return "@" + self.element


Term = Union[Const, Var, DiagramConst]


# -- formulas ----------------------------------------------------------------
#
# Each node caches its hash: evaluation memoizes on whole subformulas.

class _Node:
    __slots__ = ()

    def __post_init__(self):
        object.__setattr__(self, "_h", hash((type(self).__name__,) + self._key()))

    def __hash__(self):
        return self._h

    def __str__(self):
        return render(self)


def _node(cls):
    cls = dataclass(frozen=True, repr=False)(cls)
    cls.__hash__ = _Node.__hash__
    cls.__repr__ = lambda self: f"{type(self).__name__}({', '.join(map(repr, self._key()))})"
    return cls


@_node
class Atom(_Node):
    pred: str
    terms: tuple = ()
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.pred, self.terms)


@_node
class Id(_Node):
    left: Term
    right: Term
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.left, self.right)


@_node
class Def(_Node):
    term: Term
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.term,)


@_node
class Neg(_Node):
    sub: "Formula"
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.sub,)


@_node
class And(_Node):
    left: "Formula"
    right: "Formula"
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.left, self.right)


@_node
class Or(_Node):
    left: "Formula"
    right: "Formula"
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.left, self.right)


@_node
class Imp(_Node):
    left: "Formula"
    right: "Formula"
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.left, self.right)


@_node
class Forall(_Node):
    var: str
    body: "Formula"
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.var, self.body)


@_node
class Exists(_Node):
    var: str
    body: "Formula"
    _h: int = field(init=False, compare=False, default=0)

    def _key(self):
        return (self.var, self.body)


Formula = Union[Atom, Id, Def, Neg, And, Or, Imp, Forall, Exists]
ATOMIC = (Atom, Id, Def)
BINARY = (And, Or, Imp)
QUANTIFIERS = (Forall, Exists)


def neq(t1: Term, t2: Term) -> Neg:
    return Neg(Id(t1, t2))


def terms_of(f: Formula) -> Iterator[Term]:
    """Every term occurrence, bound variables included."""
    if isinstance(f, Atom):
        yield from f.terms
    elif isinstance(f, Id):
        yield f.left
        yield f.right
    elif isinstance(f, Def):
        yield f.term
    elif isinstance(f, Neg):
        yield from terms_of(f.sub)
    elif isinstance(f, BINARY):
        yield from terms_of(f.left)
        yield from terms_of(f.right)
    else:
        yield from terms_of(f.body)


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, Neg):
        yield from subformulas(f.sub)
    elif isinstance(f, BINARY):
        yield from subformulas(f.left)
        yield from subformulas(f.right)
    elif isinstance(f, QUANTIFIERS):
        yield from subformulas(f.body)


def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, ATOMIC):
        return frozenset(t.name for t in terms_of(f) if isinstance(t, Var))
    if isinstance(f, Neg):
        return free_vars(f.sub)
    if isinstance(f, BINARY):
        return free_vars(f.left) | free_vars(f.right)
    return free_vars(f.body) - {f.var}


def is_sentence(f: Formula) -> bool:
    return not free_vars(f)


def constants_of(f: Formula) -> frozenset[str]:
    return frozenset(t.name for t in terms_of(f) if isinstance(t, Const))


def diagram_elements_of(f: Formula) -> frozenset[str]:
    return frozenset(t.element for t in terms_of(f) if isinstance(t, DiagramConst))


def predicates_of(f: Formula) -> frozenset[str]:
    return frozenset(g.pred for g in subformulas(f) if isinstance(g, Atom))


def has_implication(f: Formula) -> bool:
    return any(isinstance(g, Imp) for g in subformulas(f))


def depth(f: Formula) -> int:
    if isinstance(f, ATOMIC):
        return 0
    if isinstance(f, Neg):
        return 1 + depth(f.sub)
    if isinstance(f, BINARY):
        return 1 + max(depth(f.left), depth(f.right))
    return 1 + depth(f.body)


def count_term(f: Formula, t: Term) -> int:
    return sum(1 for s in terms_of(f) if s == t)


def count_free(f: Formula, var: str) -> int:
    """Number of free occurrences of ``var``."""
    if isinstance(f, ATOMIC):
        return sum(1 for t in terms_of(f) if t == Var(var))
    if isinstance(f, Neg):
        return count_free(f.sub, var)
    if isinstance(f, BINARY):
        return count_free(f.left, var) + count_free(f.right, var)
    return 0 if f.var == var else count_free(f.body, var)


def _sub_term(t: Term, var: str, by: Term) -> Term:
    return by if isinstance(t, Var) and t.name == var else t


def substitute(f: Formula, var: str, t: Term) -> Formula:
    """Replace the free occurrences of ``var`` by the closed term ``t``."""
    if isinstance(t, Var):
        raise TypeError("substitute expects a closed term")
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(_sub_term(s, var, t) for s in f.terms))
    if isinstance(f, Id):
        return Id(_sub_term(f.left, var, t), _sub_term(f.right, var, t))
    if isinstance(f, Def):
        return Def(_sub_term(f.term, var, t))
    if isinstance(f, Neg):
        return Neg(substitute(f.sub, var, t))
    if isinstance(f, BINARY):
        return type(f)(substitute(f.left, var, t), substitute(f.right, var, t))
    if f.var == var:
        return f
    return type(f)(f.var, substitute(f.body, var, t))


def replace_constant(f: Formula, old: Term, new: Term) -> Formula:
    """Replace every occurrence of the closed term ``old`` by the term ``new``."""
    def rt(s):
        return new if s == old else s
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(rt(s) for s in f.terms))
    if isinstance(f, Id):
        return Id(rt(f.left), rt(f.right))
    if isinstance(f, Def):
        return Def(rt(f.term))
    if isinstance(f, Neg):
        return Neg(replace_constant(f.sub, old, new))
    if isinstance(f, BINARY):
        return type(f)(replace_constant(f.left, old, new), replace_constant(f.right, old, new))
    return type(f)(f.var, replace_constant(f.body, old, new))


def x_free_in_all_subformulas(f: Formula, var: str) -> bool:
    return all(var in free_vars(g) for g in subformulas(f))


def is_atomic(f: Formula, allow_def: bool = True) -> bool:
    if isinstance(f, Def):
        return allow_def
    return isinstance(f, (Atom, Id))


# -- concrete syntax ---------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<arrow>->)
  | (?P<neq>!=)
  | (?P<sym>[~&|().,=])
  | (?P<diag>@[A-Za-z0-9_][A-Za-z0-9_#']*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_#']*)
""", re.VERBOSE)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise SyntaxErrorAt(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            val = m.group()
            if kind in ("sym", "neq", "arrow"):
                kind = val
            out.append((kind, val, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, sig: Signature, variables=()):
        self.toks = _tokenize(text)
        self.i = 0
        self.sig = sig
        self.bound: list[str] = list(variables)

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str):
        tok = self.next()
        if tok[0] != kind:
            shown = tok[1] or "end of input"
            raise SyntaxErrorAt(f"expected {kind!r}, found {shown!r}", tok[2])
        return tok

    def formula(self) -> Formula:
        left = self.disj()
        if self.peek()[0] == "->":
            tok = self.next()
            if self.sig.logic != FN4:
                raise ImplicationInFFDE("'->' is only available in fn4", tok[2])
            return Imp(left, self.formula())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.peek()[0] == "|":
            self.next()
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.peek()[0] == "&":
            self.next()
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "~":
            self.next()
            return Neg(self.unary())
        if kind == "ident" and val in ("forall", "exists"):
            self.next()
            var = self.expect("ident")
            if var[1] in self.sig.predicates or var[1] in RESERVED:
                raise SyntaxErrorAt(f"cannot bind {var[1]!r}", var[2])
            self.expect(".")
            self.bound.append(var[1])
            try:
                body = self.formula()
            finally:
                self.bound.pop()
            return (Forall if val == "forall" else Exists)(var[1], body)
        if kind == "(":
            self.next()
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def term(self) -> Term:
        kind, val, pos = self.next()
        if kind == "diag":
            return DiagramConst(val[1:])
        if kind != "ident":
            raise SyntaxErrorAt(f"expected a term, found {val or 'end of input'!r}", pos)
        if val in self.bound:
            return Var(val)
        if val in self.sig.constants:
            return Const(val)
        raise UnknownIdentifier(f"{val!r} is neither a bound variable nor a declared constant", pos)

    def atom(self) -> Formula:
        kind, val, pos = self.peek()
        if kind == "ident" and val == "D" and self.peek(1)[0] == "(":
            self.next()
            self.next()
            t = self.term()
            self.expect(")")
            return Def(t)
        if kind == "ident" and self.peek(1)[0] == "(":
            self.next()
            self.next()
            if val not in self.sig.predicates:
                raise UnknownIdentifier(f"undeclared predicate {val!r}", pos)
            terms = [self.term()]
            while self.peek()[0] == ",":
                self.next()
                terms.append(self.term())
            self.expect(")")
            if len(terms) != self.sig.predicates[val]:
                raise ArityMismatch(
                    f"{val} takes {self.sig.predicates[val]} arguments, got {len(terms)}", pos)
            return Atom(val, tuple(terms))
        if kind == "ident" and self.peek(1)[0] not in ("=", "!=") and val in self.sig.predicates:
            self.next()
            if self.sig.predicates[val] != 0:
                raise ArityMismatch(f"{val} takes {self.sig.predicates[val]} arguments", pos)
            return Atom(val, ())
        if kind in ("ident", "diag"):
            left = self.term()
            op = self.next()
            if op[0] not in ("=", "!="):
                raise SyntaxErrorAt(f"expected '=' or '!=' after term, found {op[1] or 'end of input'!r}", op[2])
            right = self.term()
            return Id(left, right) if op[0] == "=" else neq(left, right)
        raise SyntaxErrorAt(f"unexpected {val or 'end of input'!r}", pos)


def parse_formula(text: str, sig: Signature, variables=()) -> Formula:
    """Parse ``text``; names in ``variables`` may occur free (rule templates)."""
    p = _Parser(text, sig, variables)
    f = p.formula()
    tok = p.peek()
    if tok[0] != "eof":
        raise SyntaxErrorAt(f"unexpected {tok[1]!r}", tok[2])
    return f


_PREC = {Imp: 1, Or: 2, And: 3}


def _open_right(f: Formula) -> bool:
    """True when rendering ``f`` ends in a quantifier body that would swallow a suffix."""
    while isinstance(f, Neg):
        f = f.sub
    return isinstance(f, QUANTIFIERS)


def render(f: Formula) -> str:
    if isinstance(f, Atom):
        return f.pred if not f.terms else f"{f.pred}({', '.join(map(str, f.terms))})"
    if isinstance(f, Id):
        return f"{f.left} = {f.right}"
    if isinstance(f, Def):
        return f"D({f.term})"
    if isinstance(f, Neg):
        if isinstance(f.sub, Id):
            return f"{f.sub.left} != {f.sub.right}"
        inner = render(f.sub)
        if isinstance(f.sub, BINARY):
            inner = f"({inner})"
        return "~" + inner
    if isinstance(f, QUANTIFIERS):
        kw = "forall" if isinstance(f, Forall) else "exists"
        return f"{kw} {f.var}. {render(f.body)}"
    prec = _PREC[type(f)]

    def side(g, is_left):
        s = render(g)
        if isinstance(g, BINARY):
            gp = _PREC[type(g)]
            # '->' is right associative, '&' and '|' left associative
            need = gp < prec or (gp == prec and (is_left == isinstance(f, Imp)))
            if need:
                return f"({s})"
        if _open_right(g):
            return f"({s})"
        return s

    op = {And: "&", Or: "|", Imp: "->"}[type(f)]
    return f"{side(f.left, True)} {op} {side(f.right, False)}"
