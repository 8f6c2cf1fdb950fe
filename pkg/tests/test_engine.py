import pytest

from ful_reasoner.dsl import parse_formula, parse_kb, render_formula
from ful_reasoner.engine import (
    BACKGROUND, DerivationContext, ResourceLimits, Status, background_context,
    build_wul_context, check_gamma_consistency, detect_contradiction, saturate, willed_scope,
)
from ful_reasoner.syntax import Const, negate, normalize
from ful_reasoner.universal import universalize

SIG = ("sort Object\nsort Agent\nsort Action\nconst c : Object\nconst k : Agent\n"
       "const s : Action\npred P(Object)\npred Q(Object)\npred Happy(Agent)\npred Alive(Agent)\n")


def kb_with(*axioms, maxim=None):
    lines = [SIG] + [f"axiom A{i}: {a}" for i, a in enumerate(axioms)]
    if maxim:
        lines.append(f"maxim M: {maxim}")
    return parse_kb("\n".join(lines) + "\n")


def texts(ctx, scope=None):
    return {f.text for f in ctx.facts if scope is None or f.scope == scope}


def wul(kb, name):
    m = kb.maxim(name)
    rec = universalize(m, set(kb.constants) | set(kb.functions) | set(kb.predicates), kb.sorts)
    return build_wul_context(kb, m, rec)


# ------------- limits -------------


@pytest.mark.parametrize("field", ["max_facts", "max_iterations", "max_term_depth"])
def test_limits_must_be_positive(field):
    with pytest.raises(ValueError):
        ResourceLimits(**{field: 0})


def test_fact_limit_reports_exhaustion(kbs):
    ctx = wul(kbs["falsepromise"], "M")
    ctx.limits = ResourceLimits(max_facts=12)
    result = saturate(ctx)
    assert result.status is Status.EXHAUSTED
    assert len(ctx.facts) <= 12


def test_iteration_limit_reports_exhaustion(kbs):
    ctx = wul(kbs["falsepromise"], "M")
    ctx.limits = ResourceLimits(max_iterations=1)
    assert saturate(ctx).status is Status.EXHAUSTED


# ------------- background saturation -------------


def test_modus_ponens_saturates():
    result = check_gamma_consistency(kb_with("P(c)", "P(c) -> Q(c)"))
    assert result.status is Status.SATURATED
    assert "Q(c)" in texts(result.context)


def test_direct_clash_is_a_contradiction():
    result = check_gamma_consistency(kb_with("P(c)", "not P(c)"))
    assert result.status is Status.CONTRADICTION
    ev = result.evidence
    assert render_formula(ev.positive) == "P(c)"
    assert ev.negative == negate(ev.positive)
    assert ev.scope == BACKGROUND


def test_universal_against_existential_counterexample():
    result = check_gamma_consistency(kb_with("forall x:Object. P(x)", "exists x:Object. not P(x)"))
    assert result.status is Status.CONTRADICTION


def test_empty_gamma_needs_no_rounds():
    result = check_gamma_consistency(parse_kb(SIG))
    assert result.status is Status.SATURATED
    assert result.iterations == 0 and result.context.facts == []


def test_contradiction_is_symmetric_in_axiom_order():
    a = check_gamma_consistency(kb_with("P(c)", "not P(c)")).evidence
    b = check_gamma_consistency(kb_with("not P(c)", "P(c)")).evidence
    assert (a.positive, a.negative) == (b.positive, b.negative)


def test_existential_witness_is_fresh():
    ctx = background_context(kb_with("exists x:Object. P(x)"))
    saturate(ctx)
    witnesses = [f for f in ctx.facts if f.rule == "Exists-Witness"]
    assert [f.text for f in witnesses] == ["P(w1)"]
    assert "w1" not in ctx.kb.constants


def test_detect_contradiction_on_consistent_context():
    ctx = background_context(kb_with("P(c)"))
    assert detect_contradiction(ctx) is None


# ------------- willed scopes -------------


def test_willed_facts_stay_out_of_the_background():
    kb = kb_with("forall a:Agent. Alive(a) -> Happy(a)", maxim="For(Does(k, s), P(c))")
    ctx = wul(kb, "M")
    saturate(ctx)
    scope = willed_scope(Const("k", "Agent"))
    assert "Happy(k)" in texts(ctx, scope)
    assert "Happy(k)" not in texts(ctx, BACKGROUND)
    for f in ctx.facts:
        if f.scope == BACKGROUND:
            assert all(ctx.facts[p].scope == BACKGROUND for p in f.premises)


def test_clash_across_scopes_is_seen_from_the_willed_scope():
    kb = kb_with("not Alive(k)", maxim="For(Does(k, s), P(c))")
    ctx = wul(kb, "M")
    result = saturate(ctx)
    assert result.status is Status.CONTRADICTION
    assert render_formula(result.evidence.positive) == "Alive(k)"
    assert result.evidence.scope == willed_scope(Const("k", "Agent"))


def test_wul_context_for_false_promising(kbs):
    ctx = wul(kbs["falsepromise"], "M")
    willed = texts(ctx, "willed-by(karli)")
    assert "Does(karli, falsePromise(jan))" in willed
    assert "Wills(karli, HasTravelMoney(karli))" in willed
    assert "Causes(Does(karli, falsePromise(jan)), HasTravelMoney(karli))" in willed
    assert "Alive(karli)" in willed
    assert {"B1", "B2", "B3"} == {f.detail["name"] for f in ctx.facts if f.rule == "axiom"}
    assert set(ctx.assumptions) == {"universal_law", "maxim"}


# ------------- traces of the shipped examples -------------


def saturated(kbs, example, maxim):
    ctx = wul(kbs[example], maxim)
    return saturate(ctx), texts(ctx)


def test_false_promising_reaches_the_key_steps(kbs):
    result, seen = saturated(kbs, "falsepromise", "M")
    assert result.status is Status.CONTRADICTION
    assert "exists _1:Agent. exists _2:Agent. Does(_1, falsePromise(_2))" in seen
    assert "forall _1:Agent. not BelievesPromise(_1, promise(_1))" in seen
    assert ("forall _1:Agent. forall _2:Agent. not Causes(Does(_1, promise(_2)), "
            "HasTravelMoney(_1))") in seen
    assert "not Causes(Does(karli, falsePromise(jan)), HasTravelMoney(karli))" in seen


def test_never_helping_reaches_the_key_steps(kbs):
    result, seen = saturated(kbs, "neverhelp", "NeverHelp")
    assert result.status is Status.CONTRADICTION
    assert "forall _1:Agent. forall _2:Agent. not Does(_1, help(_2))" in seen
    assert "not Alive(karli)" in seen
    assert render_formula(result.evidence.positive) == "Alive(karli)"


def test_murder_uses_the_background_witness(kbs):
    result, seen = saturated(kbs, "murder", "M")
    assert result.status is Status.CONTRADICTION
    assert "forall _1:Agent. not Does(_1, murder(karli))" in seen
    assert "Does(w1, murder(karli))" in seen
    witness = next(f for f in result.context.facts if f.rule == "Exists-Witness")
    assert witness.scope == BACKGROUND


def test_surgeon_saturates_without_contradiction(kbs):
    result, _ = saturated(kbs, "surgeon", "Surgery")
    assert result.status is Status.SATURATED


# ------------- trace invariants -------------


@pytest.mark.parametrize("example, maxim", [
    ("falsepromise", "M"), ("murder", "M"), ("neverhelp", "NeverHelp"),
    ("neverhelp", "HelpSome"), ("surgeon", "Surgery"),
])
def test_trace_invariants(kbs, example, maxim):
    ctx = wul(kbs[example], maxim)
    saturate(ctx)
    seen = set()
    for i, f in enumerate(ctx.facts):
        assert f.id == i
        assert all(p < f.id for p in f.premises)
        assert normalize(f.formula) == f.formula
        assert (f.formula, f.scope) not in seen
        seen.add((f.formula, f.scope))
        assert f.scope in ctx.scopes


@pytest.mark.parametrize("example, maxim", [("falsepromise", "M"), ("neverhelp", "NeverHelp")])
def test_saturation_is_deterministic(kbs, example, maxim):
    first, second = wul(kbs[example], maxim), wul(kbs[example], maxim)
    saturate(first)
    saturate(second)
    assert first.export() == second.export()


def test_limits_default_through_context(kbs):
    ctx = DerivationContext(kbs["surgeon"])
    assert ctx.limits == ResourceLimits()


def test_parsed_formula_lookup(kbs):
    kb = kbs["falsepromise"]
    ctx = wul(kb, "M")
    saturate(ctx)
    f = normalize(parse_formula("Does(karli, falsePromise(jan))", kb))
    assert ctx.visible(f, "willed-by(karli)") is not None
    assert ctx.visible(f, BACKGROUND) is None
