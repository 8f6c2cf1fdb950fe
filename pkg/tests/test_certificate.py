import dataclasses
import json

import pytest

from ful_reasoner.certificate import check_refutation, check_trace
from ful_reasoner.dsl import parse_formula, parse_kb
from ful_reasoner.evaluator import evaluate
from ful_reasoner.serialize import fact_from_dict, fact_to_dict, formula_from_json, formula_to_json
from ful_reasoner.syntax import Const, Does, normalize

CASES = [
    ("falsepromise", "M", "imp"), ("murder", "M", "imp"), ("neverhelp", "NeverHelp", "imp"),
    ("neverhelp", "HelpSome", "obl"), ("surgeon", "Surgery", "perm"),
]


def verdict(kbs, example, maxim, op):
    kb = kbs[example]
    return kb, evaluate(kb, op, kb.maxim(maxim))


def tampered(v, fact_id, **changes):
    trace = list(v.trace)
    trace[fact_id] = dataclasses.replace(trace[fact_id], **changes)
    return trace


# ------------- replay -------------


@pytest.mark.parametrize("example, maxim, op", CASES)
def test_every_step_replays(kbs, example, maxim, op):
    kb, v = verdict(kbs, example, maxim, op)
    report = check_trace(v.trace, kb, v.assumptions)
    assert report.ok, report.errors
    assert report.checked == len(v.trace)
    if v.evidence:
        assert check_refutation(v.trace, kb, v.assumptions,
                                v.evidence.positive_id, v.evidence.negative_id).ok


@pytest.mark.parametrize("example, maxim, op", CASES)
def test_replay_survives_json(kbs, example, maxim, op):
    kb, v = verdict(kbs, example, maxim, op)
    docs = json.loads(json.dumps([fact_to_dict(f) for f in v.trace]))
    assert [fact_from_dict(d) for d in docs] == v.trace
    assumptions = {k: formula_from_json(json.loads(json.dumps(formula_to_json(f))))
                   for k, f in v.assumptions.items()}
    assert check_trace(docs, kb, assumptions).ok


def test_report_text(kbs):
    kb, v = verdict(kbs, "surgeon", "Surgery", "perm")
    assert str(check_trace(v.trace, kb, v.assumptions)) == f"certificate ok ({len(v.trace)} steps)"


# ------------- tampering -------------


def test_wrong_conclusion_is_rejected(kbs):
    kb, v = verdict(kbs, "falsepromise", "M", "imp")
    mp = next(f for f in v.trace if f.rule == "MP")
    bogus = normalize(parse_formula("HasTravelMoney(jan)", kb))
    report = check_trace(tampered(v, mp.id, formula=bogus), kb, v.assumptions)
    assert not report.ok
    assert report.errors[0][0] == mp.id


def test_forward_premise_is_rejected(kbs):
    kb, v = verdict(kbs, "neverhelp", "NeverHelp", "imp")
    f = v.trace[5]
    report = check_trace(tampered(v, f.id, premises=(len(v.trace) - 1,)), kb, v.assumptions)
    assert not report.ok


def test_unknown_axiom_is_rejected(kbs):
    kb, v = verdict(kbs, "surgeon", "Surgery", "perm")
    bogus = normalize(parse_formula("Harmed(karli)", kb))
    report = check_trace(tampered(v, 0, formula=bogus), kb, v.assumptions)
    assert not report.ok


def test_reused_witness_is_rejected(kbs):
    kb, v = verdict(kbs, "murder", "M", "imp")
    wit = next(f for f in v.trace if f.rule == "Exists-Witness" and f.id > 8)
    old = v.trace[8].detail["witness"]
    stale = Does(Const(old, "Agent"), wit.formula.action)
    report = check_trace(tampered(v, wit.id, formula=stale, detail={"witness": old}), kb, v.assumptions)
    assert not report.ok
    assert "fresh" in report.errors[0][1]


def test_willed_fact_cannot_be_moved_to_the_background(kbs):
    kb, v = verdict(kbs, "falsepromise", "M", "imp")
    willed = next(f for f in v.trace if f.rule == "MT")
    report = check_trace(tampered(v, willed.id, scope="background"), kb, v.assumptions)
    assert not report.ok


def test_unsupported_assumption_is_rejected(kbs):
    kb, v = verdict(kbs, "falsepromise", "M", "imp")
    report = check_trace(v.trace, kb, {})
    assert not report.ok


def test_false_refutation_claim_is_rejected(kbs):
    kb, v = verdict(kbs, "falsepromise", "M", "imp")
    report = check_refutation(v.trace, kb, v.assumptions, 5, 6)
    assert not report.ok
    assert not check_refutation(v.trace, kb, v.assumptions, 5, 10_000).ok


def test_unknown_rule_is_rejected(kbs):
    kb, v = verdict(kbs, "surgeon", "Surgery", "perm")
    report = check_trace(tampered(v, 6, rule="Magic"), kb, v.assumptions)
    assert [pos for pos, _ in report.errors] == [6]


def test_shuffled_ids_are_rejected(kbs):
    kb, v = verdict(kbs, "surgeon", "Surgery", "perm")
    trace = list(v.trace)
    trace[1], trace[2] = trace[2], trace[1]
    assert not check_trace(trace, kb, v.assumptions).ok


def test_trace_from_another_kb_is_rejected(kbs):
    _, v = verdict(kbs, "surgeon", "Surgery", "perm")
    other = parse_kb("sort Object\nsort Agent\nsort Action\n")
    assert not check_trace(v.trace, other, v.assumptions).ok
