import random
from itertools import islice, permutations

import pytest

from ffde.generate import random_sentence, seeded_neqi_on_d
from ffde.kripke import validate
from ffde.proof import PERMISSIVE
from ffde.search import (Bounds, Countermodel, ExhaustedBounds, _batch, count_models,
                         enumerate_models, find_countermodel, fuzz_signature, fuzz_soundness,
                         model_at, random_model, restrict)
from ffde.syntax import FN4, Atom, Neg, Signature, parse_formula
from ffde.valuation import Valuation, consequence_in_model

from conftest import load_model


class TestEnumeration:
    def test_single_propositional_atom(self):
        sig = Signature((), {"p": 0})
        models = list(enumerate_models(sig, Bounds(1, 0)))
        assert len(models) == 4
        pairs = {m.ext("p", m.stages[0]) for m in models}
        assert len(pairs) == 4

    def test_empty_signature(self):
        assert count_models(Signature((), {}), Bounds(1, 0)) == 1

    def test_first_model_is_empty(self):
        sig = Signature(("c",), {"P": 1, "R": 2})
        m = next(enumerate_models(sig, Bounds(2, 2)))
        assert len(m.stages) == 1
        w = m.stages[0]
        assert not m.domain(w)
        assert m.interp("c", w) is None
        assert not any(m.ext(p, w)[0] or m.ext(p, w)[1] for p in sig.predicates)

    def test_every_model_validates(self):
        sig = Signature(("c",), {"P": 1})
        ms = list(enumerate_models(sig, Bounds(2, 2)))
        assert len(ms) == count_models(sig, Bounds(2, 2)) == 96191
        assert all(validate(m).ok for m in islice(ms, 0, None, 97))

    def test_deterministic(self):
        sig = Signature(("c",), {"P": 1})
        a = [m.to_json() for m in islice(enumerate_models(sig, Bounds(2, 1)), 200)]
        b = [m.to_json() for m in islice(enumerate_models(sig, Bounds(2, 1)), 200)]
        assert a == b

    def test_model_at(self):
        sig = Signature(("c",), {"P": 1})
        ms = list(islice(enumerate_models(sig, Bounds(2, 1)), 50))
        assert model_at(sig, Bounds(2, 1), 37) == ms[37]

    def test_isomorphism_pruning_keeps_one_per_class(self):
        sig = Signature(("c",), {"P": 1})
        full = count_models(sig, Bounds(2, 2))
        pruned = count_models(sig, Bounds(2, 2, prune_isomorphic=True))
        assert full / 4 <= pruned < full


def _structure(m, sig, sp, ep):
    def tup(t):
        return tuple(ep[a] for a in t)
    return (
        frozenset((sp[w], sp[v]) for w, v in m.leq),
        frozenset((sp[w], frozenset(ep[a] for a in m.domain(w))) for w in m.stages),
        frozenset((c, sp[w], ep[m.interp(c, w)]) for c in sig.constants for w in m.stages
                  if m.interp(c, w) is not None),
        frozenset((p, sp[w], s, tup(t)) for p in sig.predicates for w in m.stages
                  for s in (0, 1) for t in m.ext(p, w)[s]),
        frozenset((sp[w], tup(t)) for w in m.stages for t in m.ipos(w)),
        frozenset((sp[w], tup(t)) for w in m.stages for t in m.ineg(w)),
    )


@pytest.mark.parametrize("name,bounds", [("pc_qc", Bounds(2, 1)), ("constant_domain", Bounds(2, 2)),
                                         ("exists_self_identity", Bounds(1, 1)),
                                         ("generalized_neq", Bounds(1, 2))])
def test_fixture_models_occur_in_the_stream(name, bounds):
    sig, fixture = load_model(name)
    stages = [f"w{i}" for i in range(1, len(fixture.stages) + 1)]
    elems = [f"a{i}" for i in range(1, len(fixture.elements) + 1)]
    variants = {_structure(fixture, sig, dict(zip(fixture.stages, sp)), dict(zip(fixture.elements, ep)))
                for sp in permutations(stages) for ep in permutations(elems)}
    ident = None
    for m in enumerate_models(sig, bounds):
        ident = {w: w for w in m.stages}, {a: a for a in m.elements}
        if _structure(m, sig, *ident) in variants:
            return
    pytest.fail(f"{name} not enumerated")


def test_batch_agrees_with_valuation():
    sig = Signature(("c1", "c2"), {"P": 1}, FN4)
    b = Bounds(2, 2)
    batch = _batch(sig, b)
    rng = random.Random(3)
    sentences = [random_sentence(rng, sig, rng.randint(0, 4)) for _ in range(40)]
    picks = sorted(rng.sample(range(batch.M), 300))
    models = {i: m for i, m in enumerate(enumerate_models(sig, b)) if i in set(picks)}
    memo = {}
    for s in sentences:
        for neg in (False, True):
            arr = batch.value(s, neg, memo)
            for i in picks:
                m = models[i]
                val = Valuation(m)
                for j, w in enumerate(m.stages):
                    assert bool(arr[i, j]) == bool(val(w, Neg(s) if neg else s)), (s, i, w)


class TestCountermodels:
    def test_constant_domain(self):
        sig = Signature((), {"P": 1})
        g = parse_formula("forall x. (exists y. ~P(y)) | P(x)", sig)
        a = parse_formula("(exists y. ~P(y)) | forall x. P(x)", sig)
        v = find_countermodel(sig, [g], a, Bounds(2, 2))
        assert isinstance(v, Countermodel)
        assert consequence_in_model(v.model, [g], a) == v.stage
        assert validate(v.model).ok

    def test_explosion_propositional(self):
        sig = Signature((), {"p": 0, "q": 0})
        p, q = Atom("p"), Atom("q")
        v = find_countermodel(sig, [p, Neg(p)], q, Bounds(1, 0))
        assert isinstance(v, Countermodel)
        w = v.model.stages[0]
        assert v.model.ext("p", w) == ({()}, {()})
        assert v.model.ext("q", w) == (frozenset(), frozenset())

    def test_reflexive(self):
        sig = Signature(("c",), {"P": 1})
        a = parse_formula("exists x. P(x) | ~P(c)", sig)
        v = find_countermodel(sig, [a], a, Bounds(2, 2))
        assert isinstance(v, ExhaustedBounds)
        assert v.models_checked == count_models(sig, Bounds(2, 2))

    def test_implication_needs_fn4(self):
        sig = Signature(("c",), {"P": 1}, FN4)
        a = parse_formula("P(c) -> P(c)", sig)
        with pytest.raises(ValueError):
            find_countermodel(sig, [], a, Bounds(1, 1), logic="ffde")

    def test_restrict(self):
        sig = Signature(("c", "d"), {"P": 1, "Q": 1})
        sub = restrict(sig, [parse_formula("P(c)", sig)])
        assert sub.constants == ("c",) and sub.predicates == {"P": 1}
        with pytest.raises(ValueError):
            restrict(Signature(("c",), {}), [parse_formula("P(d)", sig)])


class TestFuzz:
    SIG = Signature(("c1", "c2"), {"P": 1})

    def test_empty(self):
        rep = fuzz_soundness(self.SIG, Bounds(2, 2), 0)
        assert rep.ok and rep.accepted == 0 and rep.to_jsonl() == ""

    def test_signature_cap(self):
        big = Signature(("a", "b", "c"), {"P": 1, "Q": 2, "R": 3, "S": 1})
        capped = fuzz_signature(big)
        assert len(capped.constants) == 2
        assert len(capped.predicates) <= 2 and max(capped.predicates.values()) <= 2

    def test_small_strict_run(self):
        rep = fuzz_soundness(self.SIG, Bounds(1, 2), 40, seed=5)
        assert rep.accepted > 0 and rep.ok

    def test_seeded_permissive_violation(self):
        rep = fuzz_soundness(self.SIG, Bounds(1, 1), 0, mode=PERMISSIVE,
                             extra=[seeded_neqi_on_d(self.SIG)])
        assert len(rep.violations) == 1
        wit = rep.violations[0]["witness"]
        assert wit["constants"]["c2"] == {}
        assert list(wit["constants"]["c1"].values()) == ["a1"]


class TestRandomModel:
    def test_valid_for_many_seeds(self):
        sig = Signature(("c1", "c2"), {"P": 1, "R": 2})
        assert all(validate(random_model(sig, Bounds(3, 3), s)).ok for s in range(1, 101))

    def test_respects_bounds(self):
        sig = Signature(("c",), {"P": 1})
        for s in range(30):
            m = random_model(sig, Bounds(2, 1), s)
            assert len(m.stages) <= 2 and all(len(m.domain(w)) <= 1 for w in m.stages)
