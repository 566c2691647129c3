import pytest

from ffde.kripke import diagram, diagram_name
from ffde.properties import FRESH, lemma_diagram, lemma_repoint, repoint, substitution_lemmas
from ffde.search import Bounds, random_model
from ffde.syntax import Const, FN4, Signature, parse_formula, substitute
from ffde.valuation import Valuation

SIG = Signature(("c1", "c2"), {"P": 1, "R": 2}, FN4)


def _model(seed=4):
    m = random_model(SIG, Bounds(3, 3), seed)
    return m.evolve(constants={**m.constants, FRESH: {}})


@pytest.mark.parametrize("text", ["P(x)", "R(x, c2)", "x = c1", "D(x)", "exists y. R(y, x)",
                                  "~forall y. (P(y) -> x != y)"])
def test_lemmas_on_fixed_formulas(text):
    a = parse_formula(text, SIG, ("x",))
    for seed in range(1, 11):
        m = _model(seed)
        for c in SIG.constants:
            assert lemma_diagram(m, SIG, a, "x", c) == []
            assert lemma_repoint(m, a, "x", FRESH, c) == []


def test_repoint_copies_interpretation():
    m = _model()
    r = repoint(m, FRESH, "c2")
    assert all(r.interp(FRESH, w) == m.interp("c2", w) for w in m.stages)


def test_diagram_lemma_detects_wrong_element():
    # pair c with the wrong diagram constant: the identity must then disagree somewhere
    for seed in range(1, 40):
        m = random_model(SIG, Bounds(1, 2), seed)
        w = m.stages[0]
        a = m.interp("c1", w)
        others = [b for b in m.domain(w) if b != a and (a, b) not in m.ipos(w)]
        if a is None or not others:
            continue
        _, dm = diagram(m, SIG)
        f = parse_formula("x = c1", SIG, ("x",))
        v, dv = Valuation(m), Valuation(dm)
        assert v(w, substitute(f, "x", Const("c1"))) == 1
        assert dv(w, substitute(f, "x", Const(diagram_name(others[0])))) == 0
        return
    pytest.skip("no model with two distinguishable elements")


def test_repoint_lemma_needs_freshness():
    # c1 occurs in the formula, so re-pointing it changes what the formula says
    for seed in range(200):
        m = random_model(SIG, Bounds(1, 2), seed)
        w = m.stages[0]
        a, b = m.interp("c1", w), m.interp("c2", w)
        plus = m.ext("P", w)[0]
        if a is not None and b is not None and ((a,) in plus) != ((b,) in plus):
            break
    else:
        pytest.skip("no suitable model")
    f = parse_formula("P(c1) | P(x) & ~P(x)", SIG, ("x",))
    assert lemma_repoint(m, f, "x", "c1", "c2") == [w]


def test_small_random_run():
    rep = substitution_lemmas(SIG, Bounds(3, 3), models=5, pairs=20, seed=3)
    assert rep.ok and rep.models == 5 and rep.pairs == 100
    assert rep.to_json() == {"models": 5, "pairs": 100, "failures": 0}


def test_needs_a_constant():
    with pytest.raises(ValueError):
        substitution_lemmas(Signature((), {"P": 1}), Bounds(1, 1))
