"""Independent checker for derivation traces.

The checker re-validates every step of a trace against its premises without
reusing the engine's matcher: structural rules are recomputed directly, and
introduction steps are confirmed by a small brute-force prover that only
knows identity, conjunction, disjunction and the quantifier rules.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from itertools import count
from typing import Any, Iterable, Mapping

from .dsl import KnowledgeBase
from .syntax import (
    And, Causes, Const, Eq, Exists, For, Forall, Formula, Iff, Implies, Not, Or,
    Top, Wills, alpha_equivalent, alpha_of, all_terms, collect_constants,
    forall_block, instantiate, is_ground, negate, normalize, rename_functions, strip_foralls,
)

_SCOPE = re.compile(r"willed-by\((\w+)\)")
BACKGROUND = "background"
INTRO_RULES = {"Exists-Intro", "Or-Intro", "And-Intro", "Eq-Intro", "Forall-Intro", "Forall-Elim"}


@dataclass
class CheckReport:
    checked: int = 0
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def __str__(self) -> str:
        if self.ok:
            return f"certificate ok ({self.checked} steps)"
        lines = [f"certificate rejected ({len(self.errors)} errors)"]
        lines += [f"  fact {i}: {msg}" for i, msg in self.errors]
        return "\n".join(lines)


class _Reject(Exception):
    pass


# ----------------------------------------------------------- brute-force prover


class _Prover:
    """Tiny backward prover: does a single premise entail a goal?"""

    def __init__(self, kb: KnowledgeBase, max_depth: int = 10):
        self.kb = kb
        self.max_depth = max_depth
        self._eigens = count(1)

    def entails(self, premise: Formula, goal: Formula) -> bool:
        premise, goal = normalize(premise), normalize(goal)
        cands = {t for f in (premise, goal) for t in all_terms(f) if is_ground(t)}
        return self._prove(premise, goal, frozenset(cands), self.max_depth)

    def _fits(self, cands, sort):
        return sorted((t for t in cands if self.kb.sorts.is_subsort(t.sort, sort)), key=repr)

    def _prove(self, p: Formula, g: Formula, cands: frozenset, depth: int) -> bool:
        if depth < 0:
            return False
        if isinstance(g, Top) or alpha_equivalent(p, g):
            return True
        match g:
            case Forall(v, body):
                e = Const(f"!k{next(self._eigens)}", v.sort)
                return self._prove(p, _inst(body, v, e), cands | {e}, depth - 1)
            case And(l, r):
                return self._prove(p, l, cands, depth - 1) and self._prove(p, r, cands, depth - 1)
            case Eq(l, r) if l == r:
                return True
            case Not(Eq(Const() as c, Const() as d)) if c != d and \
                    c.name in self.kb.constants and d.name in self.kb.constants:
                return True
            case Or(l, r):
                if self._prove(p, l, cands, depth - 1) or self._prove(p, r, cands, depth - 1):
                    return True
            case Exists(v, body):
                if any(self._prove(p, _inst(body, v, t), cands, depth - 1)
                       for t in self._fits(cands, v.sort)):
                    return True
        match p:
            case Forall(v, body):
                return any(self._prove(_inst(body, v, t), g, cands, depth - 1)
                           for t in self._fits(cands, v.sort))
            case And(l, r):
                return self._prove(l, g, cands, depth - 1) or self._prove(r, g, cands, depth - 1)
        return False


def _inst(body: Formula, v, t) -> Formula:
    return normalize(instantiate(body, {v: t}))


# ------------------------------------------------------------------ checking


def _as_fact(item: Any):
    if isinstance(item, Mapping):
        from .serialize import fact_from_dict

        return fact_from_dict(item)
    return item


def _scope_agent(scope: str, kb: KnowledgeBase) -> Const | None:
    m = _SCOPE.fullmatch(scope)
    if not m:
        return None
    c = kb.constants.get(m.group(1))
    if c is None or not kb.sorts.is_subsort(c.sort, "Agent"):
        raise _Reject(f"scope {scope!r} names no declared agent")
    return c


def _expected_scope(premises: list) -> str:
    willed = {p.scope for p in premises if p.scope != BACKGROUND}
    if len(willed) > 1:
        raise _Reject("premises come from incompatible willed scopes")
    return willed.pop() if willed else BACKGROUND


def _instantiation(premise: Formula, bindings: dict, kb: KnowledgeBase,
                   refine: dict | None = None) -> Formula:
    block, matrix = strip_foralls(premise)
    by_name = {v.name: v for v in block}
    sub = {}
    for name, term in bindings.items():
        v = by_name.get(name)
        if v is None:
            raise _Reject(f"binding for {name!r} which is not in the quantifier block")
        if not is_ground(term):
            raise _Reject(f"binding {name} := non-ground term")
        if not kb.sorts.is_subsort(term.sort, v.sort):
            raise _Reject(f"binding {name} := term of sort {term.sort}, expected {v.sort}")
        sub[v] = term
    if refine:
        table = kb.refinements()
        renaming = {}
        for g, f in refine.items():
            sig = next((s for s in table.get(g, ()) if s.name == f), None)
            if sig is None:
                raise _Reject(f"{f} does not refine {g}")
            renaming[g] = (sig.name, sig.result)
        matrix = rename_functions(matrix, renaming)
    rest = [v for v in block if v not in sub]
    return normalize(forall_block(rest, instantiate(matrix, sub)))


def _check_step(fact, facts: list, kb: KnowledgeBase, assumptions: Mapping[str, Formula],
                prover: _Prover, seen_consts: set[str]) -> None:
    f = fact.formula
    if normalize(f) != f:
        raise _Reject("stored formula is not in normal form")
    for i in fact.premises:
        if not isinstance(i, int) or not 0 <= i < fact.id:
            raise _Reject(f"premise {i!r} does not precede the fact")
    prem = [facts[i] for i in fact.premises]
    rule = fact.rule

    if rule in ("axiom", "assume-UL", "assume-maxim", "UNA", "Refl"):
        if prem:
            raise _Reject(f"{rule} takes no premises")
        if rule == "axiom":
            name = fact.detail.get("name")
            if fact.scope != BACKGROUND or name not in kb.axioms:
                raise _Reject("axiom must be a named knowledge-base axiom in the background")
            if normalize(kb.axioms[name]) != f:
                raise _Reject(f"formula differs from axiom {name}")
        elif rule.startswith("assume-"):
            key = "universal_law" if rule == "assume-UL" else "maxim"
            if _scope_agent(fact.scope, kb) is None:
                raise _Reject("assumptions live in a willed scope")
            if key not in assumptions or normalize(assumptions[key]) != f:
                raise _Reject(f"formula is not the declared {key} assumption")
        elif rule == "UNA":
            ok = (isinstance(f, Not) and isinstance(f.body, Eq)
                  and all(isinstance(t, Const) and t.name in kb.constants
                          for t in (f.body.left, f.body.right))
                  and f.body.left != f.body.right)
            if not ok:
                raise _Reject("UNA concludes only c != d for distinct declared constants")
        elif not (isinstance(f, Eq) and f.left == f.right):
            raise _Reject("Refl concludes only t = t")
        return

    if not prem:
        raise _Reject(f"{rule} needs premises")
    if fact.scope != _expected_scope(prem):
        raise _Reject(f"scope {fact.scope} should be {_expected_scope(prem)}")
    p = prem[0].formula

    if rule == "R1":
        block, m = strip_foralls(p)
        if not isinstance(m, Causes) or normalize(forall_block(block, Implies(m.cause, m.effect))) != f:
            raise _Reject("R1 turns a causal law into its implication")
    elif rule == "And-Elim":
        block, m = strip_foralls(p)
        if not isinstance(m, And) or f not in (normalize(forall_block(block, m.left)),
                                               normalize(forall_block(block, m.right))):
            raise _Reject("And-Elim keeps one conjunct")
    elif rule == "Iff-Elim":
        block, m = strip_foralls(p)
        if not isinstance(m, Iff) or f not in (
                normalize(forall_block(block, Implies(m.left, m.right))),
                normalize(forall_block(block, Implies(m.right, m.left)))):
            raise _Reject("Iff-Elim keeps one direction")
    elif rule in ("R4", "R5", "R6"):
        if not isinstance(p, For):
            raise _Reject(f"{rule} applies to a For fact")
        if rule == "R5":
            allowed = {normalize(p.behavior), normalize(Wills(alpha_of(p.behavior), p.purpose))}
        elif rule == "R6":
            allowed = {normalize(Causes(p.behavior, p.purpose))}
        else:
            agent = _scope_agent(fact.scope, kb)
            schemas = {s.name: s for s in kb.effective_necessities()}
            schema = schemas.get(fact.detail.get("schema"))
            if agent is None or schema is None:
                raise _Reject("R4 needs a willed scope and a known necessity schema")
            allowed = {normalize(schema.instantiate(agent))}
        if f not in allowed:
            raise _Reject(f"{rule} conclusion does not follow from the For fact")
    elif rule == "Exists-Witness":
        if not isinstance(p, Exists):
            raise _Reject("Exists-Witness applies to an existential")
        name = fact.detail.get("witness")
        reserved = set(kb.constants) | set(kb.functions) | set(kb.predicates)
        if not isinstance(name, str) or name in reserved or name in seen_consts:
            raise _Reject(f"witness {name!r} is not fresh")
        if _inst(p.body, p.var, Const(name, p.var.sort)) != f:
            raise _Reject("conclusion is not the witnessed body")
    elif rule in ("Forall-Elim", "UE-Refine") and "bindings" in fact.detail:
        refine = fact.detail.get("refine") if rule == "UE-Refine" else None
        if rule == "UE-Refine" and not refine:
            raise _Reject("UE-Refine needs a refinement")
        if _instantiation(p, fact.detail["bindings"], kb, refine) != f:
            raise _Reject("conclusion is not the recorded instance")
    elif rule in ("MP", "MT"):
        if len(prem) != 2:
            raise _Reject(f"{rule} takes two premises")
        block, m = strip_foralls(p)
        if not isinstance(m, Implies):
            raise _Reject(f"first premise of {rule} is not an implication")
        if rule == "MP":
            side, concl = forall_block(block, m.left), forall_block(block, m.right)
        else:
            side, concl = forall_block(block, Not(m.right)), forall_block(block, Not(m.left))
        if normalize(side) != prem[1].formula:
            raise _Reject(f"second premise does not match the {rule} side condition")
        if normalize(concl) != f:
            raise _Reject(f"{rule} conclusion mismatch")
    elif rule in INTRO_RULES:
        if len(prem) != 1 or not prover.entails(p, f):
            raise _Reject(f"{rule} step is not a valid consequence of its premise")
    else:
        raise _Reject(f"unknown rule {rule!r}")


def check_trace(facts: Iterable[Any], kb: KnowledgeBase,
                assumptions: Mapping[str, Formula] | None = None) -> CheckReport:
    """Validate every step of a trace (Fact objects or their JSON dicts)."""
    items = [_as_fact(x) for x in facts]
    report = CheckReport()
    prover = _Prover(kb)
    seen_consts: set[str] = set()
    for pos, fact in enumerate(items):
        report.checked += 1
        try:
            if fact.id != pos:
                raise _Reject(f"fact ids must be sequential, got {fact.id} at position {pos}")
            _check_step(fact, items, kb, assumptions or {}, prover, seen_consts)
        except _Reject as e:
            report.errors.append((pos, str(e)))
        except (KeyError, TypeError, ValueError, AttributeError) as e:
            report.errors.append((pos, f"malformed step: {e}"))
        seen_consts |= {c.name for c in collect_constants(fact.formula)}
    return report


def check_refutation(facts: Iterable[Any], kb: KnowledgeBase, assumptions: Mapping[str, Formula],
                     positive_id: int, negative_id: int) -> CheckReport:
    """Check a trace plus the claim that two of its facts contradict each other."""
    items = [_as_fact(x) for x in facts]
    report = check_trace(items, kb, assumptions)
    try:
        pos, neg = items[positive_id], items[negative_id]
        if negate(pos.formula) != neg.formula:
            report.errors.append((negative_id, "not the negation of the positive fact"))
        _expected_scope([pos, neg])
    except IndexError:
        report.errors.append((-1, "contradiction refers to missing facts"))
    except _Reject as e:
        report.errors.append((negative_id, str(e)))
    return report
