import pytest

from ful_reasoner.dsl import parse_formula, parse_kb, render_formula
from ful_reasoner.syntax import (
    Atom, Const, Exists, Implies, LogicError, Maxim, Var, Wills, alpha_equivalent,
    collect_constants, instantiate, is_closed, strip_foralls,
)
from ful_reasoner.universal import universalize

# Reference universal laws for the shipped maxims, written in the DSL.
GOLDEN = {
    ("falsepromise", "M"):
        "forall a1:Agent. Wills(a1, HasTravelMoney(a1)) -> exists a2:Agent. Does(a1, falsePromise(a2))",
    ("murder", "M"):
        "forall a1:Agent, a2:Agent, j1:Job. Wills(a1, HiredOver(a1, j1, a2) and SecurelyPoss(a1, j1))"
        " -> Does(a1, murder(a2))",
    ("neverhelp", "NeverHelp"):
        "forall a1, a3:Agent. Wills(a1, LeisureTime(a1)) -> not Does(a1, help(a3))",
}


def reserved(kb):
    return set(kb.constants) | set(kb.functions) | set(kb.predicates)


@pytest.mark.parametrize("example, maxim", sorted(GOLDEN))
def test_golden_universal_laws(kbs, example, maxim):
    kb = kbs[example]
    rec = universalize(kb.maxim(maxim), reserved(kb), kb.sorts)
    expected = parse_formula(GOLDEN[example, maxim], kb)
    assert alpha_equivalent(rec.ul_formula, expected)


def test_falsepromise_record(kbs):
    kb = kbs["falsepromise"]
    rec = universalize(kb.maxim("M"), reserved(kb), kb.sorts)
    karli, jan = kb.constants["karli"], kb.constants["jan"]
    assert rec.t_phi2 == (karli,)
    assert rec.t_phi1 == (jan,)
    assert rec.sigma == {karli: Var("a1", "Agent"), jan: Var("a2", "Agent")}
    # exact text, not just alpha-equivalence
    assert render_formula(rec.ul_formula) == GOLDEN["falsepromise", "M"]


def test_murder_constant_overlap_is_universal(kbs):
    kb = kbs["murder"]
    rec = universalize(kb.maxim("M"), reserved(kb), kb.sorts)
    assert [c.name for c in rec.t_phi2] == ["karli", "j", "jan"]
    assert rec.t_phi1 == ()
    assert {c.name: v.name for c, v in rec.sigma.items()} == {"karli": "a1", "j": "j1", "jan": "a2"}


def test_neverhelp_hoists_the_behaviour_block(kbs):
    kb = kbs["neverhelp"]
    rec = universalize(kb.maxim("NeverHelp"), reserved(kb), kb.sorts)
    assert len(rec.hoisted) == 1
    block, matrix = strip_foralls(rec.ul_formula)
    assert len(block) == 2 and isinstance(matrix, Implies)


def test_helpsome_keeps_its_existential(kbs):
    kb = kbs["neverhelp"]
    rec = universalize(kb.maxim("HelpSome"), reserved(kb), kb.sorts)
    expected = parse_formula(
        "forall a1:Agent. Wills(a1, LeisureTime(a1)) -> exists ax:Agent. Does(a1, help(ax))", kb)
    assert alpha_equivalent(rec.ul_formula, expected)
    assert rec.hoisted == ()


def test_nullary_action_has_no_existential_block():
    kb = parse_kb("sort Object\nsort Agent\nsort Action\nsort Song < Action\nconst karli : Agent\n"
                  "const sing : Action\nconst hum : Song\npred Happy(Agent)\n"
                  "maxim S: For(Does(karli, sing), Happy(karli))\n"
                  "maxim H: For(Does(karli, hum), Happy(karli))\n")
    rec = universalize(kb.maxim("S"), reserved(kb), kb.sorts)
    assert rec.t_phi2 == (kb.constants["karli"],)
    assert rec.t_phi1 == ()
    expected = parse_formula("forall a1:Agent. Wills(a1, Happy(a1)) -> Does(a1, sing)", kb)
    assert alpha_equivalent(rec.ul_formula, expected)
    # subsorts of Action name acts too
    assert universalize(kb.maxim("H"), reserved(kb), kb.sorts).t_phi1 == ()


def test_fresh_names_avoid_declared_symbols():
    kb = parse_kb("sort Object\nsort Agent\nsort Action\nconst a1, karli : Agent\nconst s : Action\n"
                  "pred Happy(Agent)\nmaxim S: For(Does(karli, s), Happy(a1))\n")
    rec = universalize(kb.maxim("S"), reserved(kb))
    names = {v.name for v in rec.sigma.values()}
    assert "a1" not in names
    assert is_closed(rec.ul_formula)


def test_behavior_without_does_is_rejected():
    karli = Const("karli", "Agent")
    with pytest.raises(LogicError):
        universalize(Maxim(karli, Atom("P", (karli,)), Atom("Q", (karli,))))


def test_grounding_round_trip(kbs):
    # Re-grounding the law with the original constants gives back the maxim's implication.
    for example, maxim in (("falsepromise", "M"), ("murder", "M")):
        kb = kbs[example]
        m = kb.maxim(maxim)
        rec = universalize(m, reserved(kb), kb.sorts)
        inverse = {v: c for c, v in rec.sigma.items()}
        block, body = strip_foralls(rec.ul_formula)
        grounded = instantiate(body, {v: inverse[v] for v in block})
        premise, conclusion = grounded.left, grounded.right
        assert premise == Wills(m.agent, m.purpose)
        while isinstance(conclusion, Exists):
            conclusion = instantiate(conclusion.body, {conclusion.var: inverse[conclusion.var]})
        assert conclusion == m.behavior
        assert collect_constants(rec.ul_formula) == set()
