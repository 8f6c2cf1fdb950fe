"""Deontic verdicts: permissibility by the universal-law test and its duals."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

from .dsl import KnowledgeBase, NecessitySchema, render_formula, render_maxim
from .engine import (
    ContradictionEvidence, Fact, ResourceLimits, Status, build_wul_context,
    check_gamma_consistency, saturate,
)
from .syntax import (
    DeonticOperator, Formula, Maxim, Not, SortHierarchy, all_terms, behavior_shape,
    instantiate, is_ground, normalize,
)
from .universal import UniversalizationRecord, universalize

log = logging.getLogger(__name__)


class DutyKind(str, Enum):
    PERFECT = "perfect"
    IMPERFECT = "imperfect"
    UNCLASSIFIED = "unclassified"


class Basis(str, Enum):
    CONTRADICTION = "contradiction"
    SATURATED = "saturated_no_contradiction"
    GAMMA_INCONSISTENT = "gamma_inconsistent"
    EXHAUSTED = "resource_exhausted"


@dataclass
class Verdict:
    op: DeonticOperator
    maxim: Maxim
    answer: bool
    basis: Basis
    evaluated_maxim: Maxim | None = None
    evidence: ContradictionEvidence | None = None
    duty: DutyKind | None = None
    duties: tuple[DutyKind, ...] = ()
    trace: list[Fact] = field(default_factory=list)
    assumptions: dict[str, Formula] = field(default_factory=dict)
    ul_record: UniversalizationRecord | None = None
    iterations: int = 0
    refused: bool = False
    unproven: bool = False
    note: str = ""

    @property
    def query(self) -> tuple[DeonticOperator, Maxim]:
        return self.op, self.maxim


def _reserved(kb: KnowledgeBase) -> set[str]:
    return set(kb.constants) | set(kb.functions) | set(kb.predicates)


def _is_schema_instance(chi: Formula, schema: NecessitySchema, sorts) -> bool:
    for t in {t for t in all_terms(chi) if is_ground(t)}:
        if sorts.is_subsort(t.sort, schema.var.sort) and normalize(schema.instantiate(t)) == chi:
            return True
    return False


def classify_duty(evidence: ContradictionEvidence, m: Maxim,
                  necessities: list[NecessitySchema], sorts=None,
                  trace: list[Fact] | None = None) -> DutyKind:
    """Sort a contradiction into conception (perfect) or will (imperfect).

    The pattern on the contradicted formula decides first, conception before
    will.  When ``trace`` is given and the pattern matches neither, a pair
    whose derivation rests on the maxim's own causal law is a refutation of
    that law and counts as a contradiction in conception; one resting on a
    necessity of the will counts as a contradiction in the will.
    """
    chi = normalize(evidence.positive)
    law = normalize(m.causal_law)
    if chi == law:
        return DutyKind.PERFECT
    sorts = sorts or SortHierarchy()
    if any(_is_schema_instance(chi, s, sorts) for s in necessities):
        return DutyKind.IMPERFECT
    if trace is not None:
        support = [trace[i] for i in set(evidence.trace_positive) | set(evidence.trace_negative)]
        if any(f.formula == law for f in support):
            return DutyKind.PERFECT
        if any(f.rule == "R4" for f in support):
            return DutyKind.IMPERFECT
    return DutyKind.UNCLASSIFIED


def evaluate_perm(kb: KnowledgeBase, m: Maxim, limits: ResourceLimits | None = None) -> Verdict:
    limits = limits or ResourceLimits()
    record = universalize(m, _reserved(kb), kb.sorts)
    gamma = check_gamma_consistency(kb, limits)
    if gamma.status is Status.CONTRADICTION:
        ev = gamma.evidence
        return Verdict(DeonticOperator.PERM, m, False, Basis.GAMMA_INCONSISTENT, m,
                       evidence=ev, trace=list(gamma.context.facts), ul_record=record,
                       iterations=gamma.iterations, refused=True,
                       note="knowledge base is inconsistent; refusing to evaluate "
                            f"({render_formula(ev.positive)} vs {render_formula(ev.negative)})")

    ctx = build_wul_context(kb, m, record, limits)
    result = saturate(ctx)
    common = dict(evaluated_maxim=m, trace=list(ctx.facts), assumptions=dict(ctx.assumptions),
                  ul_record=record, iterations=result.iterations)
    if result.status is Status.CONTRADICTION:
        necessities = kb.effective_necessities()
        kinds = [classify_duty(e, m, necessities, kb.sorts, ctx.facts) for e in result.all_evidence]
        duties = tuple(k for k in DutyKind if k in kinds)
        return Verdict(DeonticOperator.PERM, m, False, Basis.CONTRADICTION,
                       evidence=result.evidence, duty=kinds[0], duties=duties, **common)
    if result.status is Status.SATURATED:
        return Verdict(DeonticOperator.PERM, m, True, Basis.SATURATED, **common)
    log.warning("resource limits reached while evaluating %s; treating as not permissible",
                m.name or render_maxim(m))
    return Verdict(DeonticOperator.PERM, m, False, Basis.EXHAUSTED, unproven=True,
                   note="UNPROVEN: resource limits reached before saturation; "
                        "impermissible only by negation as failure", **common)


def negated_behavior(m: Maxim) -> Maxim:
    """The omission maxim, keeping the original binder names so it renders readably."""
    neg = normalize(Not(m.behavior))
    old_block, _, _ = behavior_shape(m.behavior)
    new_block, _, _ = behavior_shape(neg)
    if len(old_block) == len(new_block):
        body = neg
        for _ in new_block:
            body = body.body
        body = instantiate(body, {q.var: o.var for q, o in zip(new_block, old_block)})
        for q, o in zip(reversed(new_block), reversed(old_block)):
            body = type(q)(o.var, body)
        neg = body
    name = f"not-{m.name}" if m.name else ""
    return m.with_behavior(neg, name)


def evaluate(kb: KnowledgeBase, op: DeonticOperator | str, m: Maxim,
             limits: ResourceLimits | None = None) -> Verdict:
    """Evaluate ``op(m)``; Imp is the complement of Perm and Obl is Imp of the omission."""
    if isinstance(op, str):
        op = DeonticOperator.parse(op)
    target = negated_behavior(m) if op is DeonticOperator.OBL else m
    base = evaluate_perm(kb, target, limits)
    if op is DeonticOperator.PERM:
        return base
    base.op = op
    base.maxim = m
    base.evaluated_maxim = target
    base.answer = not base.answer
    return base


# ------------------------------------------------------------------ output


def evidence_to_json(ev: ContradictionEvidence) -> dict[str, Any]:
    return {
        "chi": render_formula(ev.positive),
        "negation": render_formula(ev.negative),
        "positive_id": ev.positive_id,
        "negative_id": ev.negative_id,
        "scope": ev.scope,
        "support": sorted(set(ev.trace_positive) | set(ev.trace_negative)),
    }


def verdict_to_json(v: Verdict, include_trace: bool = False) -> dict[str, Any]:
    from .serialize import fact_to_dict, formula_to_json

    doc: dict[str, Any] = {
        "query": {
            "op": v.op.value,
            "maxim": v.maxim.name,
            "formula": render_maxim(v.maxim),
        },
        "evaluated": render_maxim(v.evaluated_maxim or v.maxim),
        "answer": v.answer,
        "basis": v.basis.value,
        "duty": v.duty.value if v.duty else None,
        "duties": [d.value for d in v.duties],
        "evidence": evidence_to_json(v.evidence) if v.evidence else None,
        "ul": render_formula(v.ul_record.ul_formula) if v.ul_record else None,
        "iterations": v.iterations,
        "facts": len(v.trace),
        "refused": v.refused,
        "unproven": v.unproven,
        "note": v.note,
    }
    if include_trace:
        doc["assumptions"] = {k: formula_to_json(f) for k, f in v.assumptions.items()}
        doc["trace"] = [fact_to_dict(f) for f in v.trace]
    return doc
