"""Bounded forward-chaining saturation with per-fact provenance.

A :class:`DerivationContext` holds canonical facts in two kinds of scope: the
background (the knowledge base) and one world per willing agent.  Background
facts are visible inside every willed world; a conclusion lands in a willed
world as soon as one of its premises does, which is how closure of willing
under entailment is realised without nesting ``Wills`` syntactically.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable

from .dsl import KnowledgeBase, render_formula
from .matching import Matcher
from .syntax import (
    And, Bottom, Causes, Const, Eq, Exists, For, Forall, Formula, Iff, Implies,
    Maxim, Not, Or, Term, Top, Var, Wills, alpha_of, all_terms, forall_block,
    function_symbols, instantiate, is_ground, is_literal, negate, normalize,
    rename_functions, strip_foralls, term_depth,
)
from .universal import UniversalizationRecord

log = logging.getLogger(__name__)

BACKGROUND = "background"


def willed_scope(agent: Const) -> str:
    return f"willed-by({agent.name})"


@dataclass(frozen=True)
class ResourceLimits:
    max_facts: int = 10_000
    max_iterations: int = 200
    max_term_depth: int = 4

    def __post_init__(self) -> None:
        for name in ("max_facts", "max_iterations", "max_term_depth"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class Fact:
    id: int
    formula: Formula
    scope: str
    rule: str
    premises: tuple[int, ...] = ()
    detail: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def text(self) -> str:
        return render_formula(self.formula)


@dataclass(frozen=True)
class ContradictionEvidence:
    positive: Formula
    negative: Formula
    positive_id: int
    negative_id: int
    scope: str
    trace_positive: tuple[int, ...]
    trace_negative: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(set(self.trace_positive) | set(self.trace_negative))


class Status(str, Enum):
    SATURATED = "saturated_consistent"
    CONTRADICTION = "contradiction"
    EXHAUSTED = "resource_exhausted"


@dataclass
class SaturationResult:
    status: Status
    context: "DerivationContext"
    iterations: int
    evidence: ContradictionEvidence | None = None
    all_evidence: list[ContradictionEvidence] = field(default_factory=list)


class _Exhausted(Exception):
    pass


class DerivationContext:
    def __init__(self, kb: KnowledgeBase, limits: ResourceLimits | None = None):
        self.kb = kb
        self.limits = limits or ResourceLimits()
        self.facts: list[Fact] = []
        self.index: dict[Formula, dict[str, int]] = {}
        self.scopes: dict[str, Const | None] = {BACKGROUND: None}
        self.witnesses: dict[str, Const] = {}
        self.assumptions: dict[str, Formula] = {}
        self._reserved = set(kb.constants) | set(kb.functions) | set(kb.predicates)
        self._terms: dict[str, dict[Term, None]] = {BACKGROUND: {}}
        self._unary_done = 0
        self._pairs_done: set[tuple[int, int]] = set()
        self._ue_done: set[tuple] = set()
        self.matcher = Matcher(kb.sorts, frozenset(kb.constants))

    # ------------------------------------------------------------ bookkeeping
    def open_scope(self, agent: Const) -> str:
        scope = willed_scope(agent)
        self.scopes.setdefault(scope, agent)
        self._terms.setdefault(scope, {})
        return scope

    def visible(self, formula: Formula, scope: str) -> int | None:
        where = self.index.get(formula)
        if not where:
            return None
        if BACKGROUND in where:
            return where[BACKGROUND]
        return where.get(scope)

    def add(self, formula: Formula, scope: str, rule: str,
            premises: Iterable[int] = (), **detail) -> Fact | None:
        formula = normalize(formula)
        if isinstance(formula, Top):
            return None
        if self.visible(formula, scope) is not None:
            return None
        if len(self.facts) >= self.limits.max_facts:
            raise _Exhausted()
        fact = Fact(len(self.facts), formula, scope, rule, tuple(premises), detail)
        self.facts.append(fact)
        self.index.setdefault(formula, {})[scope] = fact.id
        for t in all_terms(formula):
            if is_ground(t) and term_depth(t) <= self.limits.max_term_depth:
                self._terms[scope].setdefault(t, None)
        return fact

    def combine(self, *facts: Fact) -> str | None:
        willed = {f.scope for f in facts if f.scope != BACKGROUND}
        if len(willed) > 1:
            return None
        return willed.pop() if willed else BACKGROUND

    def facts_in_view(self, scope: str, upto: int) -> list[Fact]:
        if scope == BACKGROUND:
            return [f for f in self.facts[:upto] if f.scope == BACKGROUND]
        return [f for f in self.facts[:upto] if f.scope in (BACKGROUND, scope)]

    def universe(self, scope: str) -> list[Term]:
        terms = dict(self._terms[BACKGROUND])
        if scope != BACKGROUND:
            terms.update(self._terms[scope])
        return list(terms)

    def ancestry(self, fact_id: int) -> tuple[int, ...]:
        seen: set[int] = set()
        stack = [fact_id]
        while stack:
            i = stack.pop()
            if i in seen:
                continue
            seen.add(i)
            stack.extend(self.facts[i].premises)
        return tuple(sorted(seen))

    def fresh_witness(self, sort: str) -> Const:
        for n in itertools.count(len(self.witnesses) + 1):
            name = f"w{n}"
            if name not in self._reserved and name not in self.witnesses:
                c = Const(name, sort)
                self.witnesses[name] = c
                return c
        raise AssertionError("unreachable")

    # ------------------------------------------------------------------ rules
    def _unary(self, f: Fact) -> None:
        block, matrix = strip_foralls(f.formula)
        scope = f.scope

        if isinstance(matrix, Causes):
            self.add(forall_block(block, Implies(matrix.cause, matrix.effect)), scope, "R1", (f.id,))
        elif isinstance(matrix, And):
            self.add(forall_block(block, matrix.left), scope, "And-Elim", (f.id,))
            self.add(forall_block(block, matrix.right), scope, "And-Elim", (f.id,))
        elif isinstance(matrix, Iff):
            self.add(forall_block(block, Implies(matrix.left, matrix.right)), scope, "Iff-Elim", (f.id,))
            self.add(forall_block(block, Implies(matrix.right, matrix.left)), scope, "Iff-Elim", (f.id,))

        match f.formula:
            case For(behavior, purpose):
                self.add(behavior, scope, "R5", (f.id,))
                self.add(Wills(alpha_of(behavior), purpose), scope, "R5", (f.id,))
                self.add(Causes(behavior, purpose), scope, "R6", (f.id,))
                agent = self.scopes.get(scope)
                if agent is not None:
                    for schema in self.kb.effective_necessities():
                        self.add(schema.instantiate(agent), scope, "R4", (f.id,), schema=schema.name)
            case Exists(v, body):
                w = self.fresh_witness(v.sort)
                self.add(instantiate(body, {v: w}), scope, "Exists-Witness", (f.id,), witness=w.name)
            case Eq(Const() as c, Const() as d) if c != d and c.name in self.kb.constants \
                    and d.name in self.kb.constants:
                self.add(Not(f.formula), scope, "UNA")
            case Not(Eq(l, r)) if l == r:
                self.add(Eq(l, r), scope, "Refl")

    def _instantiate_universal(self, f: Fact) -> None:
        block, matrix = strip_foralls(f.formula)
        if not block or not is_literal(matrix):
            return
        universe = self.universe(f.scope)
        choices = []
        for v in block:
            fitting = [t for t in universe if self.kb.sorts.is_subsort(t.sort, v.sort)]
            if not fitting:
                return
            choices.append(fitting)
        variants: list[tuple[Formula, dict]] = [(matrix, {})]
        refinements = self.kb.refinements()
        for g in sorted(function_symbols(matrix)):
            for sig in refinements.get(g, ()):
                variants.append((rename_functions(matrix, {g: (sig.name, sig.result)}),
                                 {"refine": {g: sig.name}}))
        for combo in itertools.product(*choices):
            binding = dict(zip(block, combo))
            for body, extra in variants:
                key = (f.id, combo, tuple(sorted(extra.get("refine", {}).items())))
                if key in self._ue_done:
                    continue
                self._ue_done.add(key)
                rule = "UE-Refine" if extra else "Forall-Elim"
                self.add(instantiate(body, binding), f.scope, rule, (f.id,),
                         bindings={v.name: t for v, t in binding.items()}, **extra)

    def _modus(self, imp: Fact, prem: Fact) -> None:
        scope = self.combine(imp, prem)
        if scope is None:
            return
        block, matrix = strip_foralls(imp.formula)
        if not isinstance(matrix, Implies):
            return
        pattern = [Var(f"?i{k}", v.sort) for k, v in enumerate(block)]
        opening = dict(zip(block, pattern))
        goals = (
            ("MP", matrix.left, lambda: matrix.right),
            ("MT", Not(matrix.right), lambda: Not(matrix.left)),
        )
        for rule, goal, conclusion in goals:
            opened = normalize(instantiate(goal, opening))
            if isinstance(opened, Bottom):
                continue
            for theta in self.matcher.solve(prem.formula, opened, pattern):
                back = {block[pattern.index(p)]: t for p, t in theta.items()}
                rest = [v for v in block if v not in back]
                inst_imp = imp
                if back:
                    inst_imp = self._get_or_add(
                        forall_block(rest, instantiate(matrix, back)), imp.scope, "Forall-Elim",
                        (imp.id,), bindings={v.name: t for v, t in back.items()})
                side_formula = normalize(forall_block(rest, instantiate(goal, back)))
                if side_formula == prem.formula:
                    side = prem
                else:
                    side = self._get_or_add(side_formula, prem.scope, _intro_rule(side_formula, prem.formula),
                                            (prem.id,))
                self.add(forall_block(rest, instantiate(conclusion(), back)), scope, rule,
                         (inst_imp.id, side.id))

    def _get_or_add(self, formula: Formula, scope: str, rule: str, premises, **detail) -> Fact:
        formula = normalize(formula)
        existing = self.visible(formula, scope)
        if existing is not None:
            return self.facts[existing]
        fact = self.add(formula, scope, rule, premises, **detail)
        assert fact is not None
        return fact

    def step(self) -> bool:
        """One saturation round over the facts present at its start."""
        before = len(self.facts)
        for f in self.facts[self._unary_done:before]:
            self._unary(f)
        self._unary_done = before

        for f in self.facts[:before]:
            self._instantiate_universal(f)

        implications = [f for f in self.facts[:before]
                        if isinstance(strip_foralls(f.formula)[1], Implies)]
        for imp in implications:
            for prem in self.facts[:before]:
                if prem.id == imp.id or (imp.id, prem.id) in self._pairs_done:
                    continue
                self._pairs_done.add((imp.id, prem.id))
                self._modus(imp, prem)
        return len(self.facts) > before

    # ---------------------------------------------------------- contradiction
    def contradictions(self) -> list[ContradictionEvidence]:
        found: dict[tuple[int, int], ContradictionEvidence] = {}
        for f in self.facts:
            if isinstance(f.formula, Bottom):
                found[(f.id, f.id)] = ContradictionEvidence(
                    Top(), f.formula, f.id, f.id, f.scope, (), self.ancestry(f.id))
                continue
            neg = negate(f.formula)
            for scope, gid in self.index.get(neg, {}).items():
                g = self.facts[gid]
                where = self.combine(f, g)
                if where is None:
                    continue
                pos, negf = _orient(f, g)
                key = (pos.id, negf.id)
                if key not in found:
                    found[key] = ContradictionEvidence(
                        pos.formula, negf.formula, pos.id, negf.id, where,
                        self.ancestry(pos.id), self.ancestry(negf.id))
        return sorted(found.values(), key=lambda e: (e.size, render_formula(e.positive),
                                                      e.positive_id, e.negative_id))

    def export(self) -> list[dict]:
        from .serialize import fact_to_dict

        return [fact_to_dict(f) for f in self.facts]


def _orient(f: Fact, g: Fact) -> tuple[Fact, Fact]:
    if isinstance(f.formula, Not):
        return g, f
    if isinstance(g.formula, Not):
        return f, g
    a, b = render_formula(f.formula), render_formula(g.formula)
    return (f, g) if (a, f.id) <= (b, g.id) else (g, f)


def _intro_rule(goal: Formula, premise: Formula) -> str:
    block, head = strip_foralls(goal)
    if isinstance(head, Exists):
        return "Exists-Intro"
    if isinstance(head, Or):
        return "Or-Intro"
    if isinstance(head, And):
        return "And-Intro"
    if isinstance(head, Eq) or isinstance(head, Not) and isinstance(head.body, Eq):
        return "Eq-Intro"
    return "Forall-Intro" if block else "Forall-Elim"


# ------------------------------------------------------------------- drivers


def detect_contradiction(ctx: DerivationContext) -> ContradictionEvidence | None:
    found = ctx.contradictions()
    return found[0] if found else None


def saturate(ctx: DerivationContext) -> SaturationResult:
    iterations = 0
    try:
        while True:
            found = ctx.contradictions()
            if found:
                return SaturationResult(Status.CONTRADICTION, ctx, iterations, found[0], found)
            if iterations >= ctx.limits.max_iterations:
                return SaturationResult(Status.EXHAUSTED, ctx, iterations)
            if not ctx.step():
                return SaturationResult(Status.SATURATED, ctx, iterations)
            iterations += 1
    except _Exhausted:
        log.info("fact limit %d reached after %d iterations", ctx.limits.max_facts, iterations)
        found = ctx.contradictions()
        if found:
            return SaturationResult(Status.CONTRADICTION, ctx, iterations, found[0], found)
        return SaturationResult(Status.EXHAUSTED, ctx, iterations)


def background_context(kb: KnowledgeBase, limits: ResourceLimits | None = None) -> DerivationContext:
    ctx = DerivationContext(kb, limits)
    for name, axiom in kb.axioms.items():
        ctx.add(axiom, BACKGROUND, "axiom", name=name)
    return ctx


def check_gamma_consistency(kb: KnowledgeBase, limits: ResourceLimits | None = None) -> SaturationResult:
    return saturate(background_context(kb, limits))


def build_wul_context(kb: KnowledgeBase, m: Maxim, ul: UniversalizationRecord,
                      limits: ResourceLimits | None = None) -> DerivationContext:
    """Background plus the agent's willing of the universal law and of the maxim."""
    ctx = background_context(kb, limits)
    scope = ctx.open_scope(m.agent)
    ctx.assumptions = {"universal_law": normalize(ul.ul_formula), "maxim": normalize(m.formula)}
    ctx.add(ul.ul_formula, scope, "assume-UL")
    maxim_fact = ctx._get_or_add(m.formula, scope, "assume-maxim", ())
    ctx._unary(maxim_fact)
    ctx._unary_done = 0
    return ctx
