import random

import pytest
from hypothesis import given, settings, strategies as st

from ffde.generate import random_formula
from ffde.syntax import (FN4, And, ArityMismatch, Atom, Const, Def, DiagramConst, Exists, Forall,
                         Id, Imp, ImplicationInFFDE, Neg, Or, Signature, SignatureError,
                         SyntaxErrorAt, UnknownIdentifier, Var, constants_of, count_free,
                         count_term, free_vars, parse_formula, render, substitute,
                         x_free_in_all_subformulas)

SIG = Signature(("c", "c1", "c2"), {"P": 1, "Q": 1, "R": 2, "p": 0})
x, y = Var("x"), Var("y")
c, c1, c2 = Const("c"), Const("c1"), Const("c2")


def P(t):
    return Atom("P", (t,))


def Q(t):
    return Atom("Q", (t,))


def R(s, t):
    return Atom("R", (s, t))


class TestParse:
    def test_quantifier_scope_extends_right(self):
        sig = Signature((), {"P": 1})
        got = parse_formula("forall x. (exists y. ~P(y)) | P(x)", sig)
        assert got == Forall("x", Or(Exists("y", Neg(Atom("P", (y,)))), Atom("P", (x,))))

    def test_neq_desugars(self):
        assert parse_formula("~(c1 = c2)", SIG) == Neg(Id(c1, c2)) == parse_formula("c1 != c2", SIG)

    def test_unbound_identifier(self):
        with pytest.raises(UnknownIdentifier) as e:
            parse_formula("P(x)", SIG)
        assert e.value.pos == 2

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatch):
            parse_formula("R(c)", SIG)

    def test_implication_needs_fn4(self):
        with pytest.raises(ImplicationInFFDE):
            parse_formula("P(c) -> Q(c)", SIG)
        assert parse_formula("P(c) -> Q(c)", SIG.with_logic(FN4)) == Imp(P(c), Q(c))

    def test_implication_is_right_associative(self):
        s = SIG.with_logic(FN4)
        assert parse_formula("p -> p -> p", s) == Imp(Atom("p"), Imp(Atom("p"), Atom("p")))

    @pytest.mark.parametrize("text", ["P(c", "P(c) &", "forall . P(c)", "c =", "$"])
    def test_malformed(self, text):
        with pytest.raises(SyntaxErrorAt):
            parse_formula(text, SIG)

    def test_propositional_atom_and_diagram_constant(self):
        assert parse_formula("p & P(@a1)", SIG) == And(Atom("p"), P(DiagramConst("a1")))

    def test_definedness(self):
        assert parse_formula("D(c)", SIG) == Def(c)

    def test_precedence(self):
        assert parse_formula("~P(c) & Q(c) | P(c)", SIG) == Or(And(Neg(P(c)), Q(c)), P(c))


class TestRender:
    def test_examples(self):
        assert render(Neg(Id(c1, c2))) == "c1 != c2"
        assert render(Forall("x", Id(x, x))) == "forall x. x = x"
        assert render(Def(c)) == "D(c)"

    def test_quantifier_in_left_operand_is_parenthesized(self):
        f = And(Forall("x", P(x)), Q(c))
        assert parse_formula(render(f), SIG) == f


class TestSubstitution:
    def test_examples(self):
        assert substitute(And(P(x), Q(c2)), "x", c1) == And(P(c1), Q(c2))
        assert substitute(Forall("x", P(x)), "x", c) == Forall("x", P(x))
        assert substitute(Forall("y", R(x, y)), "x", DiagramConst("a")) == \
            Forall("y", R(DiagramConst("a"), y))

    def test_free_vars(self):
        assert free_vars(Forall("x", P(x))) == frozenset()
        assert free_vars(And(P(x), Q(c))) == {"x"}
        assert free_vars(Id(x, y)) == {"x", "y"}

    def test_x_free_everywhere(self):
        assert not x_free_in_all_subformulas(And(P(x), Q(c2)), "x")
        assert x_free_in_all_subformulas(And(P(x), R(x, c)), "x")
        assert x_free_in_all_subformulas(Neg(Neg(P(x))), "x")

    def test_constants_of(self):
        assert constants_of(And(P(c1), Q(c2))) == {"c1", "c2"}
        assert constants_of(Forall("x", P(x))) == frozenset()
        assert constants_of(Def(c)) == {"c"}


class TestSignature:
    @pytest.mark.parametrize("consts,preds", [(("D",), {}), ((), {"=": 2}), (("c",), {"c": 1}),
                                              ((), {"P": -1})])
    def test_rejects(self, consts, preds):
        with pytest.raises(SignatureError):
            Signature(consts, preds)

    def test_fresh_constant_avoids_names(self):
        s = Signature(("c", "c#1"), {})
        assert s.fresh_constant("c") not in s.constants

    def test_json_round_trip(self):
        assert Signature.from_json(SIG.to_json()) == SIG


formula_seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


@settings(max_examples=300, deadline=None)
@given(formula_seeds, st.integers(0, 4))
def test_parse_render_round_trip(seed, depth):
    f = random_formula(random.Random(seed), SIG.with_logic(FN4), depth, free=("x",))
    assert parse_formula(render(f), SIG.with_logic(FN4), variables=["x"]) == f


@settings(max_examples=200, deadline=None)
@given(formula_seeds, st.integers(0, 4))
def test_substitution_counts(seed, depth):
    f = random_formula(random.Random(seed), Signature(("c1",), {"P": 1, "R": 2}), depth, free=("x",))
    g = substitute(f, "x", Const("k"))
    assert count_term(g, Const("k")) == count_free(f, "x")
    assert "x" not in free_vars(g)


@settings(max_examples=200, deadline=None)
@given(formula_seeds, st.integers(0, 4))
def test_free_everywhere_implies_free(seed, depth):
    f = random_formula(random.Random(seed), SIG, depth, free=("x",))
    if x_free_in_all_subformulas(f, "x"):
        assert "x" in free_vars(f)
