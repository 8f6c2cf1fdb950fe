import json

import jsonschema
import pytest

from ful_reasoner.dsl import parse_formula, parse_kb, render_maxim
from ful_reasoner.engine import ContradictionEvidence, ResourceLimits
from ful_reasoner.evaluator import (
    Basis, DutyKind, classify_duty, evaluate, evaluate_perm, negated_behavior, verdict_to_json,
)
from ful_reasoner.syntax import DeonticOperator, alpha_equivalent, negate, normalize

SIG = ("sort Object\nsort Agent\nsort Action\nconst k : Agent\nconst s : Action\n"
       "pred Happy(Agent)\npred Alive(Agent)\npred Rich(Agent)\n")


def evidence(chi, m):
    chi = normalize(chi)
    return ContradictionEvidence(chi, negate(chi), 0, 1, "willed-by(karli)", (0,), (1,))


# ------------- the shipped examples -------------


def test_false_promising_is_a_perfect_duty(kbs):
    kb = kbs["falsepromise"]
    v = evaluate(kb, "imp", kb.maxim("M"))
    assert v.answer is True and v.basis is Basis.CONTRADICTION
    assert v.duty is DutyKind.PERFECT
    assert v.evidence.positive == normalize(kb.maxim("M").causal_law)
    assert len(v.trace) < 1000


def test_murder_is_impermissible(kbs):
    kb = kbs["murder"]
    v = evaluate(kb, DeonticOperator.IMP, kb.maxim("M"))
    assert v.answer is True
    assert v.duty is DutyKind.PERFECT


def test_never_helping_is_an_imperfect_duty(kbs):
    kb = kbs["neverhelp"]
    v = evaluate(kb, "imp", kb.maxim("NeverHelp"))
    assert v.answer is True and v.duty is DutyKind.IMPERFECT
    assert v.evidence.positive == parse_formula("Alive(karli)", kb)
    assert DutyKind.IMPERFECT in v.duties


def test_helping_some_is_obligatory(kbs):
    kb = kbs["neverhelp"]
    m = kb.maxim("HelpSome")
    obl = evaluate(kb, "obl", m)
    assert obl.answer is True
    assert alpha_equivalent(obl.evaluated_maxim.formula, kb.maxim("NeverHelp").formula)
    assert render_maxim(obl.evaluated_maxim) == render_maxim(kb.maxim("NeverHelp"))
    assert evaluate(kb, "perm", m).answer is True


def test_surgery_is_permissible_not_obligatory(kbs):
    kb = kbs["surgeon"]
    m = kb.maxim("Surgery")
    perm = evaluate(kb, "perm", m)
    assert perm.answer is True and perm.basis is Basis.SATURATED
    assert perm.duty is None and perm.evidence is None
    assert evaluate(kb, "imp", m).answer is False
    assert evaluate(kb, "obl", m).answer is False


def test_verdict_records_its_query(kbs):
    kb = kbs["surgeon"]
    v = evaluate(kb, "imp", kb.maxim("Surgery"))
    assert v.query == (DeonticOperator.IMP, kb.maxim("Surgery"))


# ------------- refusals and limits -------------


def test_inconsistent_gamma_is_refused():
    kb = parse_kb(SIG + "axiom A: Happy(k)\naxiom B: not Happy(k)\nmaxim M: For(Does(k, s), Rich(k))\n")
    perm = evaluate(kb, "perm", kb.maxim("M"))
    assert perm.refused and perm.basis is Basis.GAMMA_INCONSISTENT
    assert perm.answer is False
    imp = evaluate(kb, "imp", kb.maxim("M"))
    assert imp.refused and imp.answer is True
    assert "inconsistent" in imp.note


def test_exhaustion_is_unproven(kbs):
    kb = kbs["falsepromise"]
    v = evaluate(kb, "perm", kb.maxim("M"), ResourceLimits(max_facts=10))
    assert v.basis is Basis.EXHAUSTED and v.unproven
    assert v.answer is False
    assert v.note.startswith("UNPROVEN")


def test_trivial_maxim_in_empty_gamma_is_permissible():
    kb = parse_kb(SIG + "maxim M: For(Does(k, s), Rich(k))\n")
    v = evaluate_perm(kb, kb.maxim("M"))
    assert v.answer is True and v.basis is Basis.SATURATED


# ------------- duty classification -------------


def test_causal_law_is_a_contradiction_in_conception(kbs):
    kb = kbs["falsepromise"]
    m = kb.maxim("M")
    assert classify_duty(evidence(m.causal_law, m), m, kb.effective_necessities()) is DutyKind.PERFECT


def test_necessity_instance_is_a_contradiction_in_will(kbs):
    kb = kbs["neverhelp"]
    m = kb.maxim("NeverHelp")
    chi = parse_formula("Alive(karli)", kb)
    assert classify_duty(evidence(chi, m), m, kb.effective_necessities(), kb.sorts) is DutyKind.IMPERFECT


def test_other_clashes_are_unclassified(kbs):
    kb = kbs["neverhelp"]
    m = kb.maxim("NeverHelp")
    chi = parse_formula("LeisureTime(karli)", kb)
    assert classify_duty(evidence(chi, m), m, kb.effective_necessities(), kb.sorts) is DutyKind.UNCLASSIFIED


def test_declared_necessities_replace_the_default():
    kb = parse_kb(SIG + "necessity Rational(a:Agent): Happy(a)\nmaxim M: For(Does(k, s), Rich(k))\n")
    m = kb.maxim("M")
    nec = kb.effective_necessities()
    assert classify_duty(evidence(parse_formula("Happy(k)", kb), m), m, nec, kb.sorts) is DutyKind.IMPERFECT


# ------------- omission maxims -------------


def test_negated_behavior_keeps_binder_names(kbs):
    kb = kbs["neverhelp"]
    neg = negated_behavior(kb.maxim("NeverHelp"))
    assert neg.name == "not-NeverHelp"
    assert render_maxim(neg) == "For(exists ax:Agent. Does(karli, help(ax)), LeisureTime(karli))"


def test_obligation_is_impermissibility_of_the_omission(kbs):
    kb = kbs["falsepromise"]
    m = kb.maxim("M")
    obl = evaluate(kb, "obl", m)
    imp = evaluate(kb, "imp", negated_behavior(m))
    assert obl.answer == imp.answer and obl.basis == imp.basis


# ------------- json -------------


@pytest.mark.parametrize("example, maxim, op", [
    ("falsepromise", "M", "imp"), ("murder", "M", "perm"), ("neverhelp", "HelpSome", "obl"),
    ("surgeon", "Surgery", "perm"),
])
def test_verdict_json_matches_schema(kbs, verdict_schema, example, maxim, op):
    kb = kbs[example]
    doc = verdict_to_json(evaluate(kb, op, kb.maxim(maxim)), include_trace=True)
    jsonschema.validate(json.loads(json.dumps(doc)), verdict_schema)
    assert doc["query"] == {"op": DeonticOperator.parse(op).value, "maxim": maxim,
                            "formula": render_maxim(kb.maxim(maxim))}
    assert doc["facts"] == len(doc["trace"])


def test_refused_verdict_matches_schema(verdict_schema):
    kb = parse_kb(SIG + "axiom A: Happy(k)\naxiom B: not Happy(k)\nmaxim M: For(Does(k, s), Rich(k))\n")
    doc = verdict_to_json(evaluate(kb, "imp", kb.maxim("M")))
    jsonschema.validate(doc, verdict_schema)
    assert doc["refused"] is True and doc["basis"] == "gamma_inconsistent"
