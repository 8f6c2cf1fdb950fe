"""Turn an agent's maxim into its universal law."""

from __future__ import annotations

from dataclasses import dataclass, field

from .syntax import (
    Const, Forall, Formula, Implies, LogicError, Maxim, SortHierarchy, Var, Wills,
    behavior_shape, bound_names, constants_in_order, exists_block, forall_block,
    instantiate, substitute,
)


@dataclass(frozen=True)
class UniversalizationRecord:
    maxim: Maxim
    t_phi2: tuple[Const, ...]
    t_phi1: tuple[Const, ...]
    sigma: dict[Const, Var]
    ul_formula: Formula
    hoisted: tuple[Var, ...] = field(default=())

    @property
    def agent_var(self) -> Var:
        return self.sigma[self.maxim.agent]


def _group_by_sort(variables: list[Var]) -> list[Var]:
    order: dict[str, list[Var]] = {}
    for v in variables:
        order.setdefault(v.sort, []).append(v)
    return [v for group in order.values() for v in group]


class _Namer:
    """Sort-initial variable names: a1, a2 for Agent, j1 for Job, ..."""

    def __init__(self, taken: set[str]):
        self.taken = set(taken)
        self.prefix: dict[str, str] = {"Agent": "a"}
        self.counter: dict[str, int] = {}

    def prefix_for(self, sort: str) -> str:
        if sort not in self.prefix:
            used = set(self.prefix.values())
            lower = sort.lower()
            for n in range(1, len(lower) + 1):
                if lower[:n] not in used:
                    self.prefix[sort] = lower[:n]
                    break
            else:
                k = 2
                while f"{lower}{k}_" in used:
                    k += 1
                self.prefix[sort] = f"{lower}{k}_"
        return self.prefix[sort]

    def fresh(self, sort: str) -> Var:
        p = self.prefix_for(sort)
        while True:
            self.counter[p] = self.counter.get(p, 0) + 1
            name = f"{p}{self.counter[p]}"
            if name not in self.taken:
                self.taken.add(name)
                return Var(name, sort)


def _is_action(c: Const, sorts: SortHierarchy | None) -> bool:
    if sorts is not None and c.sort in sorts:
        return sorts.root(c.sort) == "Action"
    return c.sort == "Action"


def universalize(m: Maxim, reserved: set[str] | frozenset[str] = frozenset(),
                 sorts: SortHierarchy | None = None) -> UniversalizationRecord:
    """Compute the universal law of ``m``.

    ``reserved`` lists names the fresh variables must avoid (typically every
    symbol declared in the knowledge base).  Constants of an action sort name
    the act itself, like function symbols, and are never generalised.
    """
    try:
        block, negated, _ = behavior_shape(m.behavior)
    except LogicError:
        raise LogicError("maxim behaviour contains no Does node") from None

    t2: list[Const] = [m.agent]
    for c in constants_in_order(m.purpose):
        if c not in t2 and not _is_action(c, sorts):
            t2.append(c)
    t1 = [c for c in constants_in_order(m.behavior) if c not in t2 and not _is_action(c, sorts)]

    taken = set(reserved) | bound_names(m.behavior) | bound_names(m.purpose)
    taken |= {c.name for c in t1 + t2}
    namer = _Namer(taken)
    sigma: dict[Const, Var] = {}
    for c in t2 + t1:
        sigma[c] = namer.fresh(c.sort)

    purpose = substitute(m.purpose, sigma)
    behavior = substitute(m.behavior, sigma)
    agent_var = sigma[m.agent]
    universal = _group_by_sort([sigma[c] for c in t2])
    existential = _group_by_sort([sigma[c] for c in t1])

    hoisted: list[Var] = []
    if block and negated and not existential and all(isinstance(q, Forall) for q in block):
        renaming = {}
        for q in block:
            v = namer.fresh(q.var.sort)
            renaming[q.var] = v
            hoisted.append(v)
        body = behavior
        for _ in block:
            body = body.body
        behavior = instantiate(body, renaming)

    law = Implies(Wills(agent_var, purpose), exists_block(existential, behavior))
    ul = forall_block(universal + hoisted, law)
    return UniversalizationRecord(m, tuple(t2), tuple(t1), sigma, ul, tuple(hoisted))
