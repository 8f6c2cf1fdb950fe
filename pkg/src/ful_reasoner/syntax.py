"""Terms, formulas and maxims of the universal-law logic.

Everything here is an immutable value.  Sorts are referred to by name; the
subsort relation lives in :class:`SortHierarchy`, which the parser builds and
the engine consults when instantiating quantifiers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, Union

BASE_SORTS = ("Object", "Agent", "Action")


class LogicError(ValueError):
    """Raised when a core-language operation is applied outside its domain."""


class CaptureError(LogicError):
    pass


# --------------------------------------------------------------------------
# sorts


@dataclass
class SortHierarchy:
    parents: dict[str, str | None] = field(default_factory=dict)

    def declare(self, name: str, parent: str | None = None) -> None:
        if name in self.parents:
            raise LogicError(f"duplicate sort {name!r}")
        if parent is None:
            if name not in BASE_SORTS:
                raise LogicError(
                    f"sort {name!r} must refine one of {', '.join(BASE_SORTS)}"
                )
        elif parent not in self.parents:
            raise LogicError(f"unknown parent sort {parent!r}")
        self.parents[name] = parent

    def __contains__(self, name: str) -> bool:
        return name in self.parents

    def __iter__(self) -> Iterator[str]:
        return iter(self.parents)

    def __len__(self) -> int:
        return len(self.parents)

    def ancestors(self, name: str) -> list[str]:
        out = [name]
        while (parent := self.parents.get(out[-1])) is not None:
            out.append(parent)
        return out

    def root(self, name: str) -> str:
        return self.ancestors(name)[-1]

    def is_subsort(self, sub: str, sup: str) -> bool:
        return sup in self.ancestors(sub)


# --------------------------------------------------------------------------
# terms


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Const:
    name: str
    sort: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class App:
    fn: str
    args: tuple["Term", ...]
    sort: str

    def __str__(self) -> str:
        return f"{self.fn}({', '.join(map(str, self.args))})"


Term = Union[Var, Const, App]


def term_depth(t: Term) -> int:
    if isinstance(t, App):
        return 1 + max((term_depth(a) for a in t.args), default=0)
    return 0


def subterms(t: Term) -> Iterator[Term]:
    yield t
    if isinstance(t, App):
        for a in t.args:
            yield from subterms(a)


def term_vars(t: Term) -> Iterator[Var]:
    for s in subterms(t):
        if isinstance(s, Var):
            yield s


def is_ground(t: Term) -> bool:
    return not any(True for _ in term_vars(t))


# --------------------------------------------------------------------------
# formulas


class DeonticOperator(str, Enum):
    PERM = "Perm"
    IMP = "Imp"
    OBL = "Obl"

    @classmethod
    def parse(cls, text: str) -> "DeonticOperator":
        for op in cls:
            if op.value.lower() == text.lower():
                return op
        raise ValueError(f"unknown deontic operator {text!r}")


@dataclass(frozen=True, slots=True)
class Top:
    pass


@dataclass(frozen=True, slots=True)
class Bottom:
    pass


@dataclass(frozen=True, slots=True)
class Not:
    body: "Formula"


@dataclass(frozen=True, slots=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Iff:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True, slots=True)
class Forall:
    var: Var
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Exists:
    var: Var
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Eq:
    left: Term
    right: Term


@dataclass(frozen=True, slots=True)
class Atom:
    pred: str
    args: tuple[Term, ...] = ()


@dataclass(frozen=True, slots=True)
class Does:
    agent: Term
    action: Term


@dataclass(frozen=True, slots=True)
class Wills:
    agent: Term
    body: "Formula"


@dataclass(frozen=True, slots=True)
class Causes:
    cause: "Formula"
    effect: "Formula"


@dataclass(frozen=True, slots=True)
class For:
    behavior: "Formula"
    purpose: "Formula"


@dataclass(frozen=True, slots=True)
class Deontic:
    op: DeonticOperator
    maxim: "Formula"


Formula = Union[
    Top, Bottom, Not, And, Or, Implies, Iff, Forall, Exists, Eq, Atom,
    Does, Wills, Causes, For, Deontic,
]

BINARY = (And, Or, Implies, Iff)
QUANTIFIERS = (Forall, Exists)
LITERAL_HEADS = (Atom, Eq, Does, Wills, Causes, For, Deontic)


def conj(*parts: Formula) -> Formula:
    if not parts:
        return Top()
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def forall_block(variables: list[Var] | tuple[Var, ...], body: Formula) -> Formula:
    for v in reversed(variables):
        body = Forall(v, body)
    return body


def exists_block(variables: list[Var] | tuple[Var, ...], body: Formula) -> Formula:
    for v in reversed(variables):
        body = Exists(v, body)
    return body


def strip_foralls(f: Formula) -> tuple[list[Var], Formula]:
    block = []
    while isinstance(f, Forall):
        block.append(f.var)
        f = f.body
    return block, f


def is_literal(f: Formula) -> bool:
    if isinstance(f, Not):
        f = f.body
    return isinstance(f, LITERAL_HEADS)


# --------------------------------------------------------------------------
# generic traversal


def map_terms(f: Formula, fn: Callable[[Term], Term]) -> Formula:
    """Rebuild ``f`` applying ``fn`` to every top-level term position.

    Binder variables are left alone; ``fn`` is responsible for recursing into
    applications if it wants to.
    """
    match f:
        case Top() | Bottom():
            return f
        case Not(b):
            return Not(map_terms(b, fn))
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return type(f)(map_terms(l, fn), map_terms(r, fn))
        case Forall(v, b) | Exists(v, b):
            return type(f)(v, map_terms(b, fn))
        case Eq(l, r):
            return Eq(fn(l), fn(r))
        case Atom(p, args):
            return Atom(p, tuple(fn(a) for a in args))
        case Does(a, b):
            return Does(fn(a), fn(b))
        case Wills(a, b):
            return Wills(fn(a), map_terms(b, fn))
        case Causes(c, e):
            return Causes(map_terms(c, fn), map_terms(e, fn))
        case For(b, p):
            return For(map_terms(b, fn), map_terms(p, fn))
        case Deontic(op, m):
            return Deontic(op, map_terms(m, fn))
    raise TypeError(f"not a formula: {f!r}")


def children(f: Formula) -> tuple[Formula, ...]:
    match f:
        case Not(b) | Forall(_, b) | Exists(_, b) | Wills(_, b) | Deontic(_, b):
            return (b,)
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return (l, r)
        case Causes(c, e):
            return (c, e)
        case For(b, p):
            return (b, p)
    return ()


def direct_terms(f: Formula) -> tuple[Term, ...]:
    match f:
        case Eq(l, r):
            return (l, r)
        case Atom(_, args):
            return args
        case Does(a, b):
            return (a, b)
        case Wills(a, _):
            return (a,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from walk(c)


def all_terms(f: Formula) -> Iterator[Term]:
    """Every term occurrence in ``f`` (including nested subterms), left to right."""
    for node in walk(f):
        for t in direct_terms(node):
            yield from subterms(t)


def free_vars(f: Formula) -> set[Var]:
    match f:
        case Forall(v, b) | Exists(v, b):
            return free_vars(b) - {v}
    out = {v for t in direct_terms(f) for v in term_vars(t)}
    for c in children(f):
        out |= free_vars(c)
    return out


def is_closed(f: Formula) -> bool:
    return not free_vars(f)


def bound_names(f: Formula) -> set[str]:
    return {n.var.name for n in walk(f) if isinstance(n, QUANTIFIERS)}


def formula_size(f: Formula) -> int:
    return sum(1 for _ in walk(f))


# --------------------------------------------------------------------------
# constants and accessors


def constants_in_order(f: Formula) -> list[Const]:
    seen: dict[Const, None] = {}
    for t in all_terms(f):
        if isinstance(t, Const):
            seen.setdefault(t, None)
    return list(seen)


def collect_constants(f: Formula) -> set[Const]:
    return set(constants_in_order(f))


def _does_nodes(f: Formula) -> list[Does]:
    return [n for n in walk(f) if isinstance(n, Does)]


def _the_does(f: Formula) -> Does:
    nodes = _does_nodes(f)
    if len(nodes) != 1:
        raise LogicError(f"expected exactly one Does node, found {len(nodes)}")
    return nodes[0]


def alpha_of(f: Formula) -> Term:
    """Agent of the single ``Does`` node in ``f``."""
    return _the_does(f).agent


def beta_of(f: Formula) -> Term:
    """Action of the single ``Does`` node in ``f``."""
    return _the_does(f).action


# --------------------------------------------------------------------------
# substitution


def replace_in_term(t: Term, mapping: dict) -> Term:
    if t in mapping:
        return mapping[t]
    if isinstance(t, App):
        return App(t.fn, tuple(replace_in_term(a, mapping) for a in t.args), t.sort)
    return t


def substitute(f: Formula, sigma: dict[Const, Var]) -> Formula:
    """Replace constants by variables, refusing to let a binder capture them."""
    if not sigma:
        return f
    targets = {v.name for v in sigma.values()}
    captured = targets & bound_names(f)
    if captured:
        raise CaptureError(f"variable(s) {sorted(captured)} would be captured")
    return map_terms(f, lambda t: replace_in_term(t, sigma))


def instantiate(f: Formula, binding: dict[Var, Term]) -> Formula:
    """Replace free occurrences of variables.  Terms must not mention bound names."""
    if not binding:
        return f
    match f:
        case Forall(v, b) | Exists(v, b):
            inner = {k: t for k, t in binding.items() if k != v}
            return type(f)(v, instantiate(b, inner))
        case Eq() | Atom() | Does():
            return map_terms(f, lambda t: replace_in_term(t, binding))
        case Wills(a, b):
            return Wills(replace_in_term(a, binding), instantiate(b, binding))
    parts = children(f)
    if not parts:
        return f
    rebuilt = tuple(instantiate(c, binding) for c in parts)
    match f:
        case Deontic(op, _):
            return Deontic(op, rebuilt[0])
        case Not():
            return Not(rebuilt[0])
    return type(f)(*rebuilt)


def rename_functions(f: Formula, mapping: dict[str, tuple[str, str]]) -> Formula:
    """Swap function symbols: ``mapping[g] = (f, result_sort)``."""

    def go(t: Term) -> Term:
        if isinstance(t, App):
            args = tuple(go(a) for a in t.args)
            if t.fn in mapping:
                fn, sort = mapping[t.fn]
                return App(fn, args, sort)
            return App(t.fn, args, t.sort)
        return t

    return map_terms(f, go)


def function_symbols(f: Formula) -> set[str]:
    return {t.fn for t in all_terms(f) if isinstance(t, App)}


# --------------------------------------------------------------------------
# normal form


def _nnf(f: Formula, neg: bool) -> Formula:
    match f:
        case Top():
            return Bottom() if neg else f
        case Bottom():
            return Top() if neg else f
        case Not(b):
            return _nnf(b, not neg)
        case And(l, r):
            cls = Or if neg else And
            return cls(_nnf(l, neg), _nnf(r, neg))
        case Or(l, r):
            cls = And if neg else Or
            return cls(_nnf(l, neg), _nnf(r, neg))
        case Implies(l, r):
            if neg:
                return And(_nnf(l, False), _nnf(r, True))
            return Implies(_nnf(l, False), _nnf(r, False))
        case Iff(l, r):
            return Iff(_nnf(l, False), _nnf(r, neg))
        case Forall(v, b):
            return Exists(v, _nnf(b, True)) if neg else Forall(v, _nnf(b, False))
        case Exists(v, b):
            return Forall(v, _nnf(b, True)) if neg else Exists(v, _nnf(b, False))
        case Wills(a, b):
            out = Wills(a, _nnf(b, False))
        case Causes(c, e):
            out = Causes(_nnf(c, False), _nnf(e, False))
        case For(b, p):
            out = For(_nnf(b, False), _nnf(p, False))
        case Deontic(op, m):
            out = Deontic(op, _nnf(m, False))
        case Eq() | Atom() | Does():
            out = f
        case _:
            raise TypeError(f"not a formula: {f!r}")
    return Not(out) if neg else out


def _drop_vacuous(f: Formula) -> Formula:
    match f:
        case Forall(v, b) | Exists(v, b):
            b = _drop_vacuous(b)
            return type(f)(v, b) if v in free_vars(b) else b
    parts = children(f)
    if not parts:
        return f
    rebuilt = tuple(_drop_vacuous(c) for c in parts)
    match f:
        case Not():
            return Not(rebuilt[0])
        case Wills(a, _):
            return Wills(a, rebuilt[0])
        case Deontic(op, _):
            return Deontic(op, rebuilt[0])
    return type(f)(*rebuilt)


def canonical_var_name(depth: int) -> str:
    return f"_{depth}"


def _rename_bound(f: Formula, env: dict[Var, Var], depth: int) -> Formula:
    match f:
        case Forall(v, b) | Exists(v, b):
            nv = Var(canonical_var_name(depth + 1), v.sort)
            return type(f)(nv, _rename_bound(b, {**env, v: nv}, depth + 1))
        case Eq() | Atom() | Does():
            return map_terms(f, lambda t: replace_in_term(t, env)) if env else f
        case Wills(a, b):
            return Wills(replace_in_term(a, env), _rename_bound(b, env, depth))
    parts = children(f)
    if not parts:
        return f
    rebuilt = tuple(_rename_bound(c, env, depth) for c in parts)
    match f:
        case Not():
            return Not(rebuilt[0])
        case Deontic(op, _):
            return Deontic(op, rebuilt[0])
    return type(f)(*rebuilt)


def normalize(f: Formula) -> Formula:
    """Canonical form used for storage and comparison.

    Negation is pushed down to literals (never across Wills/Causes/For),
    vacuous quantifiers are dropped, and bound variables get positional names.
    """
    return _rename_bound(_drop_vacuous(_nnf(f, False)), {}, 0)


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    return normalize(f) == normalize(g)


def negate(f: Formula) -> Formula:
    return normalize(Not(f))


# --------------------------------------------------------------------------
# maxims


@dataclass(frozen=True, slots=True)
class Maxim:
    agent: Const
    behavior: Formula
    purpose: Formula
    name: str = ""

    @property
    def formula(self) -> For:
        return For(self.behavior, self.purpose)

    @property
    def causal_law(self) -> Causes:
        return Causes(self.behavior, self.purpose)

    def with_behavior(self, behavior: Formula, name: str | None = None) -> "Maxim":
        return Maxim(self.agent, behavior, self.purpose, self.name if name is None else name)


def behavior_shape(behavior: Formula) -> tuple[list[Forall | Exists], bool, Does]:
    """Split a maxim behaviour into (quantifier block, negated?, does node)."""
    block: list[Forall | Exists] = []
    while isinstance(behavior, QUANTIFIERS):
        block.append(behavior)
        behavior = behavior.body
    negated = False
    if isinstance(behavior, Not):
        negated, behavior = True, behavior.body
    if not isinstance(behavior, Does):
        raise LogicError("maxim behaviour must be a possibly quantified/negated Does")
    return block, negated, behavior


def maxim_from_for(f: For, name: str = "") -> Maxim:
    behavior_shape(f.behavior)
    agent = alpha_of(f.behavior)
    if not isinstance(agent, Const):
        raise LogicError("the acting agent of a maxim must be a constant")
    for node in walk(f.purpose):
        if isinstance(node, (For, Wills, Deontic)):
            raise LogicError("maxim purpose must be first-order")
    return Maxim(agent, f.behavior, f.purpose, name)
