import json

import pytest

from ffde import proof
from ffde.proof import (PERMISSIVE, STRICT, CheckedSequent, DischargeViolation, FreshnessViolation,
                        ModeViolation, PreconditionViolation, RuleMismatch, TemplateViolation,
                        assumptions, check, expand_macro, hyp, node)
from ffde.syntax import (FN4, Const, Def, Exists, Forall, Id, Imp, Neg, Signature, Var, neq,
                         parse_formula, render, substitute)

from conftest import FIXTURES

SIG = Signature(("c", "c1", "c2"), {"P": 1, "Q": 1, "R": 2})
c, c1, c2 = Const("c"), Const("c1"), Const("c2")
x = Var("x")


def F(text, variables=()):
    return parse_formula(text, SIG, variables)


def fixture(name, sig=SIG):
    return proof.load(FIXTURES / f"{name}.json", sig)


def fixture_sig(name, sig=SIG):
    return proof.signature_for(json.loads((FIXTURES / f"{name}.json").read_text()), sig)


def seq(name, mode=STRICT):
    return check(fixture(name), fixture_sig(name), mode)


def as_set(*texts):
    return frozenset(F(t) for t in texts)


class TestFixtures:
    @pytest.mark.parametrize("name,gamma,goal", [
        ("forall-self-identity", [], "forall x. x = x"),
        ("forall-self-identity-elim", ["forall x. x = x", "D(c)"], "c = c"),
        ("definedness-to-exists-identity", ["D(c)"], "exists x. x = c"),
        ("exists-identity-to-definedness", ["exists x. x = c"], "D(c)"),
        ("self-diversity-from-contradiction", ["P(c)", "~P(c)"], "c != c"),
        ("sym-neq", ["c2 != c1"], "c1 != c2"),
    ])
    def test_sequent(self, name, gamma, goal):
        s = seq(name)
        assert s.assumptions == as_set(*gamma)
        assert s.conclusion == F(goal)

    def test_render(self):
        assert str(seq("forall-self-identity")) == "⊢ forall x. x = x"

    def test_neqi_on_definedness_is_permissive_only(self):
        with pytest.raises(TemplateViolation):
            seq("neg-exists-identity-from-neg-definedness")
        s = seq("neg-exists-identity-from-neg-definedness", PERMISSIVE)
        assert s.assumptions == as_set("~D(c)")
        assert s.conclusion == F("~exists x. x = c")

    @pytest.mark.parametrize("case,template", [
        ("atomic", "P(x)"), ("neg-atomic", "~P(x)"), ("double-neg", "~~P(x)"),
        ("and", "P(x) & Q(x)"), ("or", "P(x) | Q(x)"), ("neg-and", "~(P(x) & Q(x))"),
        ("neg-or", "~(P(x) | Q(x))"), ("forall", "forall y. R(x, y)"),
        ("exists", "exists y. R(y, x)"), ("neg-forall", "~(forall y. R(x, y))"),
        ("neg-exists", "~(exists y. R(x, y))"),
    ])
    def test_generalized_neq_cases(self, case, template):
        a = F(template, ["x"])
        s = seq(f"gen-neqi-{case}")
        assert s.assumptions == {substitute(a, "x", c1), Neg(substitute(a, "x", c2))}
        assert s.conclusion == neq(c1, c2)

    def test_json_round_trip(self):
        d = fixture("exists-identity-to-definedness")
        again = proof.from_json(json.loads(d.dumps()), SIG)
        assert check(again, fixture_sig("exists-identity-to-definedness")) == \
            seq("exists-identity-to-definedness")


class TestAssumptions:
    def test_hyp(self):
        assert assumptions(hyp(F("P(c)"), 1), SIG) == as_set("P(c)")

    def test_closed_theorem(self):
        assert assumptions(fixture("forall-self-identity"), SIG) == frozenset()

    def test_imp_intro(self):
        s4 = SIG.with_logic(FN4)
        a = F("P(c)")
        d = node("ImpI", Imp(a, a), hyp(a, 1), discharge=[1])
        assert assumptions(d, s4) == frozenset()


class TestSideConditions:
    def test_eigen_in_open_hypothesis(self):
        d = node("AllI_D", F("forall x. P(x)"), hyp(F("P(c)"), 2), discharge=[1], eigen="c")
        with pytest.raises(FreshnessViolation) as e:
            check(d, SIG)
        assert "P(c)" in str(e.value)

    def test_eigen_in_conclusion_of_exists_elim(self):
        d = node("ExE_D", F("P(c)"), hyp(F("exists x. P(x)"), 1), hyp(F("P(c)"), 2),
                 discharge=[2], eigen="c")
        with pytest.raises(FreshnessViolation):
            check(d, SIG)

    def test_eigen_in_major_premise_hypotheses(self):
        # the major premise depends on P(c), which mentions the eigenconstant
        major = node("ExI_D", F("exists x. P(x)"), hyp(F("P(c)"), 3), hyp(F("D(c)"), 4))
        d = node("ExE_D", F("Q(c1)"), major, hyp(F("Q(c1)"), 5), discharge=[2], eigen="c")
        with pytest.raises(FreshnessViolation):
            check(d, SIG)

    def test_exists_elim_ok(self):
        d = node("ExE_D", F("exists x. Q(x)"), hyp(F("exists x. P(x) & Q(x)"), 1),
                 node("ExI_D", F("exists x. Q(x)"), node("AndE_R", F("Q(c)"), hyp(F("P(c) & Q(c)"), 2)),
                      hyp(F("D(c)"), 2)),
                 discharge=[2], eigen="c")
        assert check(d, SIG).assumptions == as_set("exists x. P(x) & Q(x)")

    def test_wrong_discharge(self):
        d = node("AllI_D", F("forall x. x = x"), node("EqI", F("c = c"), hyp(F("D(c)"), 1)),
                 discharge=[1, 7], eigen="c")
        assert check(d, SIG).assumptions == frozenset()
        bad = node("AllI_D", F("forall x. P(x)"),
                   node("AndE_L", F("P(c)"), hyp(F("P(c) & D(c)"), 1)), discharge=[1], eigen="c")
        with pytest.raises(DischargeViolation):
            check(bad, SIG)

    def test_case_split_labels_are_per_premise(self):
        # label 2 marks the right disjunct P(c1); the left case may still use it as an open
        # assumption, which then stays open at the root
        d = node("OrE", F("P(c1)"), hyp(F("Q(c1) | P(c1)"), 1),
                 node("AndE_R", F("P(c1)"),
                      node("AndI", F("Q(c1) & P(c1)"), hyp(F("Q(c1)"), 3), hyp(F("P(c1)"), 2))),
                 hyp(F("P(c1)"), 2), discharge=[3, 2])
        assert check(d, SIG).assumptions == as_set("Q(c1) | P(c1)", "P(c1)")

    def test_eqe_template_must_be_atomic(self):
        d = node("EqE", F("P(c2) & Q(c2)"), hyp(F("P(c1) & Q(c1)"), 1), hyp(F("c1 = c2"), 2),
                 template=F("P(x) & Q(x)", ["x"]), var="x")
        with pytest.raises(TemplateViolation):
            check(d, SIG)

    def test_eqe_accepts_negated_atoms(self):
        d = node("EqE", F("~P(c2)"), hyp(F("~P(c1)"), 1), hyp(F("c1 = c2"), 2),
                 template=F("~P(x)", ["x"]), var="x")
        assert check(d, SIG).conclusion == F("~P(c2)")

    def test_neqi_template_needs_x(self):
        d = node("NeqI", F("c1 != c2"), hyp(F("P(c)"), 1), hyp(F("~P(c)"), 2),
                 template=F("P(c)"), var="x")
        with pytest.raises(TemplateViolation):
            check(d, SIG)

    def test_neqi_self_identity_template_is_strictly_rejected(self):
        d = node("NeqI", F("c1 != c2"), hyp(F("c1 = c1"), 1), hyp(F("c2 != c2"), 2),
                 template=F("x = x", ["x"]), var="x")
        with pytest.raises(TemplateViolation):
            check(d, SIG)
        assert check(d, SIG, PERMISSIVE).conclusion == F("c1 != c2")

    def test_rule_mismatch_carries_path(self):
        d = node("AndI", F("P(c) & Q(c)"), hyp(F("P(c)"), 1),
                 node("AndE_L", F("Q(c)"), hyp(F("P(c) & Q(c)"), 2)))
        with pytest.raises(RuleMismatch) as e:
            check(d, SIG)
        assert e.value.path == (1,)
        assert "at node 1" in str(e.value)

    def test_implication_rules_need_fn4(self):
        a = F("P(c)")
        d = node("ImpI", Imp(a, a), hyp(a, 1), discharge=[1])
        with pytest.raises(ModeViolation):
            check(d, SIG)

    def test_fn4_rules(self):
        s4 = SIG.with_logic(FN4)
        a, b = parse_formula("P(c)", s4), parse_formula("Q(c)", s4)
        mp = node("ImpE", b, hyp(Imp(a, b), 1), hyp(a, 2))
        assert check(mp, s4).assumptions == {Imp(a, b), a}
        ni = node("NegImpI", Neg(Imp(a, b)), hyp(a, 1), hyp(Neg(b), 2))
        assert check(ni, s4).conclusion == Neg(Imp(a, b))
        left = node("NegImpE_L", a, hyp(Neg(Imp(a, b)), 1))
        right = node("NegImpE_R", Neg(b), hyp(Neg(Imp(a, b)), 1))
        assert check(left, s4).conclusion == a and check(right, s4).conclusion == Neg(b)

    def test_pem_has_no_premises(self):
        assert check(node("PEM_D", F("D(c) | ~D(c)")), SIG).assumptions == frozenset()

    def test_defi_index(self):
        d = node("DefI", F("D(c2)"), hyp(F("R(c1, c2)"), 1), index=2)
        assert check(d, SIG).conclusion == F("D(c2)")
        with pytest.raises(RuleMismatch):
            check(node("DefI", F("D(c2)"), hyp(F("R(c1, c2)"), 1), index=1), SIG)

    def test_unknown_mode(self):
        with pytest.raises(ValueError):
            check(hyp(F("P(c)"), 1), SIG, "lenient")

    def test_conclusions_must_be_sentences(self):
        with pytest.raises(RuleMismatch):
            check(hyp(F("P(x)", ["x"]), 1), SIG)


class TestMacros:
    def test_gen_eqe_atomic_is_one_node(self):
        d = expand_macro("GenEqE", F("P(x)", ["x"]), "x", "c1", "c2", sig=SIG)
        assert d.rule == "EqE" and all(p.rule == "Hyp" for p in d.premises)
        assert check(d, SIG) == CheckedSequent(as_set("P(c1)", "c1 = c2"), F("P(c2)"))

    @pytest.mark.parametrize("template", [
        "~P(x)", "P(x) & Q(c)", "P(x) | R(x, c1)", "~(P(x) & Q(c))", "~~R(x, x)",
        "forall y. R(x, y)", "exists y. ~R(y, x)", "~(forall y. R(y, x))", "Q(c)",
        "~(exists y. R(x, y) | P(y))", "D(x)", "~D(x)",
    ])
    def test_gen_eqe(self, template):
        a = F(template, ["x"])
        d = expand_macro("GenEqE", a, "x", "c1", "c2", sig=SIG)
        s = check(d, SIG.with_constants(sorted(proof._all_constants(d) - set(SIG.constants))))
        assert s.assumptions == {substitute(a, "x", c1), F("c1 = c2")}
        assert s.conclusion == substitute(a, "x", c2)

    def test_gen_eqe_with_implication(self):
        s4 = SIG.with_logic(FN4)
        a = parse_formula("P(x) -> Q(x)", s4, ["x"])
        d = expand_macro("GenEqE", a, "x", "c1", "c2", sig=s4)
        s = check(d, s4)
        assert s.assumptions == {substitute(a, "x", c1), Id(c1, c2)}

    def test_double_negation_case_uses_dne_on_both_premises(self):
        d = expand_macro("GenNeqI", F("~~P(x)", ["x"]), "x", "c1", "c2", sig=SIG)
        assert d.rule == "NeqI"
        assert [p.rule for p in d.premises] == ["DNE", "DNE"]
        assert check(d, SIG).assumptions == as_set("~~P(c1)", "~~~P(c2)")

    def test_gen_neqi_precondition(self):
        with pytest.raises(PreconditionViolation) as e:
            expand_macro("GenNeqI", F("P(x) & Q(c2)", ["x"]), "x", "c1", "c2", sig=SIG)
        assert "Q(c2)" in str(e.value)

    def test_gen_neqi_rejects_implication(self):
        s4 = SIG.with_logic(FN4)
        with pytest.raises(PreconditionViolation):
            expand_macro("GenNeqI", parse_formula("P(x) -> Q(x)", s4, ["x"]), "x", "c1", "c2", sig=s4)

    def test_sym_neq(self):
        d = expand_macro("SymNeq", "c1", "c2", sig=SIG)
        assert check(d, SIG) == CheckedSequent(as_set("c2 != c1"), F("c1 != c2"))

    def test_unknown_macro(self):
        with pytest.raises(ValueError):
            expand_macro("Cut", sig=SIG)


def test_weakening_only_grows_assumptions():
    core = fixture("forall-self-identity")
    extra = hyp(F("Q(c1)"), 9)
    d = node("AndE_L", core.conclusion, node("AndI", F("(forall x. x = x) & Q(c1)"), core, extra))
    assert check(d, SIG).assumptions == as_set("Q(c1)")
    assert check(d, SIG).conclusion == core.conclusion
