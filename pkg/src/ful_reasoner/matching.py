"""Goal-directed matching of a single stored fact against a goal formula.

The engine uses this to discharge the side premise of modus ponens/tollens
when the implication is universally quantified: the implication's variables
are opened as *pattern* variables, and we search for bindings under which
some fact entails the antecedent (MP) or the negated consequent (MT).

Variable naming conventions inside this module:

``?i<n>``  implication variables (outermost; may bind only ground terms)
``?x<n>``  existential variables of the goal
``?p<n>``  universal variables of the premise
``!e<n>``  eigenvariables for universal goals (rigid)
``_<n>``   canonical bound variables of still-closed binders
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count
from typing import Iterator

from .syntax import (
    And, App, Atom, Bottom, Causes, Const, Deontic, Does, Eq, Exists, For,
    Forall, Formula, Iff, Implies, Not, Or, SortHierarchy, Term, Top, Var, Wills,
    instantiate, subterms,
)

Bindings = dict[str, Term]

MAX_SOLUTIONS = 64


def _kind(v: Var) -> str:
    return v.name[0]


def _eigen_index(v: Var) -> int:
    return int(v.name[2:])


@dataclass
class Matcher:
    sorts: SortHierarchy
    declared: frozenset[str]

    def __post_init__(self) -> None:
        self._ids = count(1)

    # ------------------------------------------------------------------ terms
    def walk(self, t: Term, b: Bindings) -> Term:
        while isinstance(t, Var) and t.name in b:
            t = b[t.name]
        return t

    def resolve(self, t: Term, b: Bindings) -> Term:
        t = self.walk(t, b)
        if isinstance(t, App):
            return App(t.fn, tuple(self.resolve(a, b) for a in t.args), t.sort)
        return t

    def _eigens(self, t: Term) -> list[int]:
        return [_eigen_index(s) for s in subterms(t) if isinstance(s, Var) and _kind(s) == "!"]

    def _bind(self, v: Var, t: Term, b: Bindings, limits: dict[str, int]) -> Bindings | None:
        t = self.resolve(t, b)
        if not self.sorts.is_subsort(t.sort, v.sort):
            return None
        for s in subterms(t):
            if isinstance(s, Var):
                if s.name == v.name or _kind(s) == "_":
                    return None
        eig = self._eigens(t)
        if v.name.startswith("?i") and eig:
            return None
        if v.name.startswith("?x") and any(e > limits.get(v.name, 0) for e in eig):
            return None
        out = dict(b)
        out[v.name] = t
        return out

    def unify_terms(self, s: Term, t: Term, b: Bindings, pairs: tuple, limits) -> Bindings | None:
        s, t = self.walk(s, b), self.walk(t, b)
        s_bound = isinstance(s, Var) and _kind(s) == "_"
        t_bound = isinstance(t, Var) and _kind(t) == "_"
        if s_bound or t_bound:
            for left, right in reversed(pairs):
                if left == s or right == t:
                    return b if (left == s and right == t) else None
            return None
        if s == t:
            return b
        if isinstance(t, Var) and t.name.startswith("?p") and isinstance(s, Var) and _kind(s) == "?":
            s, t = t, s
        if isinstance(s, Var) and _kind(s) == "?":
            out = self._bind(s, t, b, limits)
            if out is not None:
                return out
        if isinstance(t, Var) and _kind(t) == "?":
            return self._bind(t, s, b, limits)
        if isinstance(s, App) and isinstance(t, App) and s.fn == t.fn and len(s.args) == len(t.args):
            for x, y in zip(s.args, t.args):
                b = self.unify_terms(x, y, b, pairs, limits)
                if b is None:
                    return None
            return b
        return None

    def _unify_seq(self, xs, ys, b, pairs, limits) -> Bindings | None:
        if len(xs) != len(ys):
            return None
        for x, y in zip(xs, ys):
            b = self.unify_terms(x, y, b, pairs, limits)
            if b is None:
                return None
        return b

    # --------------------------------------------------------------- formulas
    def unify(self, f: Formula, g: Formula, b: Bindings, pairs: tuple = (), limits=None) -> Bindings | None:
        limits = limits if limits is not None else {}
        if type(f) is not type(g):
            return None
        match f:
            case Top() | Bottom():
                return b
            case Not(x):
                return self.unify(x, g.body, b, pairs, limits)
            case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
                b = self.unify(l, g.left, b, pairs, limits)
                return None if b is None else self.unify(r, g.right, b, pairs, limits)
            case Forall(v, body) | Exists(v, body):
                if v.sort != g.var.sort:
                    return None
                return self.unify(body, g.body, b, pairs + ((v, g.var),), limits)
            case Eq(l, r):
                return self._unify_seq((l, r), (g.left, g.right), b, pairs, limits)
            case Atom(p, args):
                if p != g.pred:
                    return None
                return self._unify_seq(args, g.args, b, pairs, limits)
            case Does(a, act):
                return self._unify_seq((a, act), (g.agent, g.action), b, pairs, limits)
            case Wills(a, body):
                b = self.unify_terms(a, g.agent, b, pairs, limits)
                return None if b is None else self.unify(body, g.body, b, pairs, limits)
            case Causes(c, e):
                b = self.unify(c, g.cause, b, pairs, limits)
                return None if b is None else self.unify(e, g.effect, b, pairs, limits)
            case For(bh, p):
                b = self.unify(bh, g.behavior, b, pairs, limits)
                return None if b is None else self.unify(p, g.purpose, b, pairs, limits)
            case Deontic(op, m):
                return self.unify(m, g.maxim, b, pairs, limits) if op == g.op else None
        return None

    # ------------------------------------------------------------- entailment
    def fresh(self, prefix: str, sort: str) -> Var:
        return Var(f"{prefix}{next(self._ids)}", sort)

    def entails(self, premise: Formula, goal: Formula, b: Bindings,
                limits: dict[str, int], eigens: int) -> Iterator[Bindings]:
        """Yield bindings under which ``premise`` entails ``goal``."""
        match goal:
            case Forall(v, body):
                e = Var(f"!e{eigens + 1}", v.sort)
                yield from self.entails(premise, instantiate(body, {v: e}), b, limits, eigens + 1)
                return
            case And(l, r):
                for b1 in self.entails(premise, l, b, limits, eigens):
                    yield from self.entails(premise, r, b1, limits, eigens)
                return
            case Not(Eq(l, r)):
                l2, r2 = self.resolve(l, b), self.resolve(r, b)
                if (isinstance(l2, Const) and isinstance(r2, Const) and l2.name != r2.name
                        and l2.name in self.declared and r2.name in self.declared):
                    yield b
            case Eq(l, r):
                out = self.unify_terms(l, r, b, (), limits)
                if out is not None:
                    yield out
        out = self.unify(premise, goal, b, (), limits)
        if out is not None:
            yield out
        match goal:
            case Or(l, r):
                yield from self.entails(premise, l, b, limits, eigens)
                yield from self.entails(premise, r, b, limits, eigens)
            case Exists(v, body):
                x = self.fresh("?x", v.sort)
                inner = dict(limits)
                inner[x.name] = eigens
                yield from self.entails(premise, instantiate(body, {v: x}), b, inner, eigens)
        match premise:
            case Forall(v, body):
                z = self.fresh("?p", v.sort)
                yield from self.entails(instantiate(body, {v: z}), goal, b, limits, eigens)
            case And(l, r):
                yield from self.entails(l, goal, b, limits, eigens)
                yield from self.entails(r, goal, b, limits, eigens)

    def solve(self, premise: Formula, goal: Formula, pattern: list[Var]) -> list[dict[Var, Term]]:
        """Ground bindings for ``pattern`` (``?i`` vars) that make ``premise`` entail ``goal``.

        Unbound pattern variables stay generic and are omitted from the result.
        """
        results: list[dict[Var, Term]] = []
        seen = set()
        produced = 0
        for b in self.entails(premise, goal, {}, {}, 0):
            produced += 1
            if produced > MAX_SOLUTIONS * 4:
                break
            theta: dict[Var, Term] = {}
            generic: set[str] = set()
            ok = True
            for v in pattern:
                t = self.resolve(v, b)
                if isinstance(t, Var):
                    if _kind(t) != "?" or t.name in generic:
                        ok = False
                        break
                    generic.add(t.name)
                    continue
                if any(isinstance(s, Var) for s in subterms(t)):
                    ok = False
                    break
                theta[v] = t
            if not ok:
                continue
            key = tuple(sorted((v.name, repr(t)) for v, t in theta.items()))
            if key in seen:
                continue
            seen.add(key)
            results.append(theta)
            if len(results) >= MAX_SOLUTIONS:
                break
        return results
