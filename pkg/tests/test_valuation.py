import random

import pytest
from hypothesis import given, settings, strategies as st

from ffde.generate import random_sentence
from ffde.kripke import KripkeModel
from ffde.search import Bounds, enumerate_models, random_model
from ffde.syntax import FN4, Neg, Signature, parse_formula
from ffde.valuation import EvalError, FourValue, Valuation, consequence_in_model, eval, \
    four_valued, holds_all

from conftest import f

B = "exists y. ~P(y)"


def test_pc_qc(pc_qc):
    sig, m = pc_qc
    cases = {("w1", "P(c)"): 0, ("w1", "~P(c)"): 0, ("w2", "P(c)"): 1, ("w2", "Q(c)"): 1,
             ("w2", "~Q(c)"): 1}
    for (w, s), v in cases.items():
        assert eval(m, w, f(s, sig)) == v
    assert four_valued(m, "w1", f("P(c)", sig)) is FourValue.N
    assert four_valued(m, "w2", f("Q(c)", sig)) is FourValue.B


def test_constant_domain(constant_domain):
    sig, m = constant_domain
    assert eval(m, "w1", f(f"forall x. ({B}) | P(x)", sig)) == 1
    assert eval(m, "w1", f(f"({B}) | forall x. P(x)", sig)) == 0
    assert holds_all(m, "w1", [f(f"forall x. ({B}) | P(x)", sig)])
    assert consequence_in_model(m, [f(f"forall x. ({B}) | P(x)", sig)],
                                f(f"({B}) | forall x. P(x)", sig)) == "w1"


def test_empty_domain():
    sig = Signature(("c",), {"P": 1})
    m = KripkeModel.from_json({"stages": ["w"], "domains": {"w": []}}, sig)
    cases = {"forall x. P(x)": 1, "exists x. P(x)": 0, "~exists x. P(x)": 1, "D(c)": 0,
             "~D(c)": 1, "D(c) | ~D(c)": 1}
    for s, v in cases.items():
        assert eval(m, "w", f(s, sig)) == v, s


def test_self_identity_model(self_identity):
    sig, m = self_identity
    assert eval(m, "w", f("exists x. x = c", sig)) == 1
    assert eval(m, "w", f("~exists x. x = c", sig)) == 1
    assert eval(m, "w", f("~D(c)", sig)) == 0
    assert four_valued(m, "w", f("exists x. x = c", sig)) is FourValue.B
    assert holds_all(m, "w", [f("exists x. x = c", sig), f("~exists x. x = c", sig)])
    assert consequence_in_model(m, [f("~exists x. x = c", sig)], f("~D(c)", sig)) == "w"


def test_generalized_neq_model(gen_neq):
    sig, m = gen_neq
    # the formula and its negation both hold, yet c1 != c1 fails
    a1 = f("P(c1) & Q(c2)", sig)
    assert eval(m, "w", a1) == 1
    assert eval(m, "w", Neg(a1)) == 1
    assert eval(m, "w", f("c1 != c1", sig)) == 0


def test_consequence_trivia(pc_qc):
    sig, m = pc_qc
    assert holds_all(m, "w1", [])
    a = f("Q(c)", sig)
    assert consequence_in_model(m, [a], a) is None


def test_definedness_excluded_middle_exhaustively():
    sig = Signature(("c",), {})
    for m in enumerate_models(sig, Bounds(2, 2)):
        for w in m.stages:
            assert four_valued(m, w, f("D(c) | ~D(c)", sig)) in (FourValue.T, FourValue.B)


def test_errors(pc_qc):
    sig, m = pc_qc
    with pytest.raises(EvalError):
        eval(m, "w1", f("P(x)", sig, ["x"]))
    with pytest.raises(EvalError):
        eval(m, "nowhere", f("P(c)", sig))


def test_undefined_arguments():
    sig = Signature(("c", "d"), {"P": 1, "R": 2})
    m = KripkeModel.from_json({"stages": ["w"], "domains": {"w": ["a"]}, "constants": {"c": {"w": "a"}},
                               "predicates": {"P": {"w": {"pos": [["a"]], "neg": [["a"]]}},
                                              "R": {"w": {"pos": [["a", "a"]], "neg": [["a", "a"]]}}}},
                              sig)
    for s in ["R(c, d)", "R(d, c)", "P(d)", "c = d", "d = d"]:
        atom = f(s, sig)
        assert (eval(m, "w", atom), eval(m, "w", Neg(atom))) == (0, 0), s
    assert eval(m, "w", f("~D(d)", sig)) == 1
    assert eval(m, "w", f("~D(c)", sig)) == 0


SIG = Signature(("c1", "c2"), {"P": 1, "R": 2}, FN4)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_double_negation_and_persistence(seed):
    rng = random.Random(seed)
    m = random_model(SIG, Bounds(3, 3), seed)
    val = Valuation(m)
    for _ in range(20):
        s = random_sentence(rng, SIG, rng.randint(0, 4))
        for w, v in m.leq:
            assert val(w, Neg(Neg(s))) == val(w, s)
            assert not val(w, s) or val(v, s)
            assert not val(w, Neg(s)) or val(v, Neg(s))
