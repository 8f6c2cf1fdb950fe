"""Reader and writer for ``.full`` knowledge-base files.

A file is a sequence of declarations::

    sort Agent
    sort Promise < Action
    const karli, jan : Agent
    func promise(Agent) : Promise
    func falsePromise(Agent) : FalsePromise refines promise
    pred HasTravelMoney(Agent)
    necessity Life(a:Agent): Alive(a)
    axiom B1: exists a1:Agent. a1 != karli and Wills(a1, HasTravelMoney(a1))
    maxim M: For(Does(karli, falsePromise(jan)), HasTravelMoney(karli))

Formulas use ``not``, ``and``, ``or``, ``->``, ``<->`` (tightest first),
``forall x:S.`` / ``exists x:S.`` whose scope runs as far right as possible,
``=``/``!=``, ``true``/``false`` and the operators ``Does``, ``Wills``,
``Causes``, ``For``, ``Perm``, ``Imp``, ``Obl``.  ``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .syntax import (
    And, App, Atom, Bottom, Causes, Const, Deontic, DeonticOperator, Does, Eq,
    Exists, For, Forall, Formula, Iff, Implies, LogicError, Maxim, Not, Or,
    SortHierarchy, Term, Top, Var, Wills, behavior_shape, free_vars,
    instantiate, maxim_from_for, walk,
)


class FullSyntaxError(Exception):
    """A located diagnostic for malformed or ill-sorted input."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


@dataclass(frozen=True)
class FunctionSig:
    name: str
    params: tuple[str, ...]
    result: str
    refines: str | None = None


@dataclass(frozen=True)
class PredicateSig:
    name: str
    params: tuple[str, ...]


@dataclass(frozen=True)
class NecessitySchema:
    """A fact any agent must will in order to will anything (``Alive(a)``)."""

    name: str
    var: Var
    consequent: Formula

    def instantiate(self, agent: Term) -> Formula:
        return instantiate(self.consequent, {self.var: agent})


@dataclass
class KnowledgeBase:
    sorts: SortHierarchy = field(default_factory=SortHierarchy)
    constants: dict[str, Const] = field(default_factory=dict)
    functions: dict[str, FunctionSig] = field(default_factory=dict)
    predicates: dict[str, PredicateSig] = field(default_factory=dict)
    axioms: dict[str, Formula] = field(default_factory=dict)
    necessities: dict[str, NecessitySchema] = field(default_factory=dict)
    maxims: dict[str, Maxim] = field(default_factory=dict)

    def maxim(self, name: str) -> Maxim:
        try:
            return self.maxims[name]
        except KeyError:
            raise KeyError(f"no maxim named {name!r}") from None

    def refinements(self) -> dict[str, list[FunctionSig]]:
        """Map each function symbol to the symbols that refine it."""
        out: dict[str, list[FunctionSig]] = {}
        for sig in self.functions.values():
            if sig.refines:
                out.setdefault(sig.refines, []).append(sig)
        return out

    def effective_necessities(self) -> list[NecessitySchema]:
        """Declared schemas, plus being alive when ``Alive(Agent)`` is declared."""
        out = list(self.necessities.values())
        alive = self.predicates.get("Alive")
        if alive and alive.params == ("Agent",) and not any(
            isinstance(n.consequent, Atom) and n.consequent.pred == "Alive" for n in out
        ):
            v = Var("a", "Agent")
            out.insert(0, NecessitySchema("Alive", v, Atom("Alive", (v,))))
        return out

    def same_structure(self, other: "KnowledgeBase") -> bool:
        return (
            self.sorts.parents == other.sorts.parents
            and self.constants == other.constants
            and self.functions == other.functions
            and self.predicates == other.predicates
            and self.axioms == other.axioms
            and self.necessities == other.necessities
            and self.maxims == other.maxims
        )


# --------------------------------------------------------------------------
# lexer

KEYWORDS = {
    "sort", "const", "func", "pred", "axiom", "necessity", "maxim", "refines",
    "forall", "exists", "not", "and", "or", "true", "false",
    "Does", "Wills", "Causes", "For", "Perm", "Imp", "Obl",
}
DECL_KEYWORDS = {"sort", "const", "func", "pred", "axiom", "necessity", "maxim"}

_UNICODE = {"¬": "not", "∧": "and", "∨": "or", "→": "->", "↔": "<->",
            "∀": "forall", "∃": "exists", "⊤": "true", "⊥": "false",
            "≠": "!=", "⊑": "<"}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><->|->|!=|[(),.:=<])
  | (?P<uni>[¬∧∨→↔∀∃⊤⊥≠⊑])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # ident, kw, op, eof
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        col = pos - line_start + 1
        if not m:
            raise FullSyntaxError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        if kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind == "op":
            tokens.append(Token("op", text, line, col))
        elif kind == "uni":
            mapped = _UNICODE[text]
            tokens.append(Token("kw" if mapped in KEYWORDS else "op", mapped, line, col))
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = pos + text.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


# --------------------------------------------------------------------------
# parser


class _Parser:
    def __init__(self, source: str, kb: KnowledgeBase | None = None):
        self.toks = tokenize(source)
        self.i = 0
        self.kb = kb if kb is not None else KnowledgeBase()

    # token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, message: str, tok: Token | None = None) -> FullSyntaxError:
        tok = tok or self.tok
        return FullSyntaxError(message, tok.line, tok.col)

    def at(self, text: str) -> bool:
        return self.tok.kind in ("kw", "op") and self.tok.text == text

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {shown!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind != "ident":
            shown = self.tok.text or "end of input"
            raise self.error(f"expected {what}, found {shown!r}")
        tok = self.tok
        self.i += 1
        return tok

    # declarations
    def parse_file(self) -> KnowledgeBase:
        while self.tok.kind != "eof":
            tok = self.tok
            if tok.kind != "kw" or tok.text not in DECL_KEYWORDS:
                raise self.error(f"expected a declaration, found {tok.text!r}")
            self.i += 1
            getattr(self, f"_decl_{tok.text}")(tok)
        return self.kb

    def _check_fresh(self, tok: Token) -> None:
        name = tok.text
        if name.startswith("_"):
            raise self.error(f"names starting with '_' are reserved: {name!r}", tok)
        kb = self.kb
        if name in kb.constants or name in kb.functions or name in kb.predicates:
            raise self.error(f"duplicate name {name!r}", tok)

    def sort_name(self) -> str:
        tok = self.ident("sort name")
        if tok.text not in self.kb.sorts:
            raise self.error(f"undeclared sort {tok.text!r}", tok)
        return tok.text

    def _decl_sort(self, kw: Token) -> None:
        tok = self.ident("sort name")
        parent = None
        if self.accept("<"):
            parent = self.sort_name()
        try:
            self.kb.sorts.declare(tok.text, parent)
        except LogicError as e:
            raise self.error(str(e), tok) from None

    def _decl_const(self, kw: Token) -> None:
        names = [self.ident("constant name")]
        while self.accept(","):
            names.append(self.ident("constant name"))
        self.expect(":")
        sort = self.sort_name()
        for tok in names:
            self._check_fresh(tok)
            self.kb.constants[tok.text] = Const(tok.text, sort)

    def _param_sorts(self) -> tuple[str, ...]:
        params: list[str] = []
        if self.accept("("):
            if not self.at(")"):
                params.append(self.sort_name())
                while self.accept(","):
                    params.append(self.sort_name())
            self.expect(")")
        return tuple(params)

    def _decl_func(self, kw: Token) -> None:
        tok = self.ident("function name")
        self._check_fresh(tok)
        params = self._param_sorts()
        self.expect(":")
        result = self.sort_name()
        refines = None
        if self.accept("refines"):
            target_tok = self.ident("function name")
            target = self.kb.functions.get(target_tok.text)
            if target is None:
                raise self.error(f"undeclared function {target_tok.text!r}", target_tok)
            if len(target.params) != len(params):
                raise self.error(
                    f"invalid refines: {tok.text!r} takes {len(params)} argument(s), "
                    f"{target.name!r} takes {len(target.params)}", target_tok)
            if not self.kb.sorts.is_subsort(result, target.result):
                raise self.error(
                    f"invalid refines: result sort {result!r} is not a subsort of "
                    f"{target.result!r}", target_tok)
            refines = target.name
        self.kb.functions[tok.text] = FunctionSig(tok.text, params, result, refines)

    def _decl_pred(self, kw: Token) -> None:
        tok = self.ident("predicate name")
        self._check_fresh(tok)
        self.kb.predicates[tok.text] = PredicateSig(tok.text, self._param_sorts())

    def _named(self, table: dict, what: str) -> Token:
        tok = self.ident(f"{what} name")
        if tok.text in table:
            raise self.error(f"duplicate {what} {tok.text!r}", tok)
        return tok

    def _decl_axiom(self, kw: Token) -> None:
        tok = self._named(self.kb.axioms, "axiom")
        self.expect(":")
        self.kb.axioms[tok.text] = self.formula({})

    def _decl_necessity(self, kw: Token) -> None:
        tok = self._named(self.kb.necessities, "necessity")
        self.expect("(")
        vtok = self.ident("variable name")
        self.expect(":")
        sort_tok = self.tok
        sort = self.sort_name()
        if not self.kb.sorts.is_subsort(sort, "Agent"):
            raise self.error("necessity variable must be of sort Agent", sort_tok)
        self.expect(")")
        self.expect(":")
        v = Var(vtok.text, sort)
        body = self.formula({vtok.text: v})
        self.kb.necessities[tok.text] = NecessitySchema(tok.text, v, body)

    def _decl_maxim(self, kw: Token) -> None:
        tok = self._named(self.kb.maxims, "maxim")
        self.expect(":")
        start = self.tok
        f = self.formula({})
        if not isinstance(f, For):
            raise self.error("a maxim must be a For(behaviour, purpose) formula", start)
        try:
            self.kb.maxims[tok.text] = maxim_from_for(f, tok.text)
        except LogicError as e:
            raise self.error(str(e), start) from None

    # formulas; env maps variable names in scope to Vars
    def formula(self, env: dict[str, Var]) -> Formula:
        return self.iff(env)

    def iff(self, env) -> Formula:
        left = self.implies(env)
        while self.accept("<->"):
            left = Iff(left, self.implies(env))
        return left

    def implies(self, env) -> Formula:
        left = self.disj(env)
        if self.accept("->"):
            return Implies(left, self.implies(env))
        return left

    def disj(self, env) -> Formula:
        left = self.conj(env)
        while self.accept("or"):
            left = Or(left, self.conj(env))
        return left

    def conj(self, env) -> Formula:
        left = self.unary(env)
        while self.accept("and"):
            left = And(left, self.unary(env))
        return left

    def unary(self, env) -> Formula:
        tok = self.tok
        if self.accept("not"):
            return Not(self.unary(env))
        if tok.text in ("forall", "exists") and tok.kind == "kw":
            self.i += 1
            return self.quantified(tok.text, env)
        return self.primary(env)

    def quantified(self, which: str, env) -> Formula:
        binders: list[Var] = []
        pending: list[Token] = []
        while True:
            pending.append(self.ident("variable name"))
            if self.accept(":"):
                sort = self.sort_name()
                for vt in pending:
                    if vt.text in self.kb.constants or vt.text in self.kb.functions \
                            or vt.text in self.kb.predicates:
                        raise self.error(f"variable {vt.text!r} shadows a declared symbol", vt)
                    binders.append(Var(vt.text, sort))
                pending = []
                if not self.accept(","):
                    break
            else:
                self.expect(",")
        self.expect(".")
        inner = dict(env)
        for v in binders:
            inner[v.name] = v
        body = self.formula(inner)
        cls = Forall if which == "forall" else Exists
        for v in reversed(binders):
            body = cls(v, body)
        return body

    def primary(self, env) -> Formula:
        tok = self.tok
        if self.accept("("):
            f = self.formula(env)
            self.expect(")")
            return f
        if self.accept("true"):
            return Top()
        if self.accept("false"):
            return Bottom()
        if tok.kind == "kw" and tok.text in ("Does", "Wills", "Causes", "For", "Perm", "Imp", "Obl"):
            self.i += 1
            return getattr(self, f"_op_{tok.text.lower()}")(tok, env)
        if tok.kind == "ident" and tok.text in self.kb.predicates and tok.text not in env:
            self.i += 1
            return self.atom(tok, env)
        left = self.term(env)
        op = self.tok
        if self.accept("="):
            right = self.term(env)
            self.check_comparable(left, right, op)
            return Eq(left, right)
        if self.accept("!="):
            right = self.term(env)
            self.check_comparable(left, right, op)
            return Not(Eq(left, right))
        raise self.error(f"expected '=' or '!=' after term, found {op.text or 'end of input'!r}", op)

    def check_comparable(self, a: Term, b: Term, tok: Token) -> None:
        sorts = self.kb.sorts
        if sorts.root(a.sort) != sorts.root(b.sort):
            raise self.error(f"sort mismatch: cannot compare {a.sort} with {b.sort}", tok)

    def atom(self, tok: Token, env) -> Formula:
        sig = self.kb.predicates[tok.text]
        args, toks = self.args(env) if self.at("(") else ((), [])
        self.check_args(tok, sig.params, args, toks)
        return Atom(sig.name, args)

    def args(self, env) -> tuple[tuple[Term, ...], list[Token]]:
        self.expect("(")
        out: list[Term] = []
        arg_toks: list[Token] = []
        if not self.at(")"):
            arg_toks.append(self.tok)
            out.append(self.term(env))
            while self.accept(","):
                arg_toks.append(self.tok)
                out.append(self.term(env))
        self.expect(")")
        return tuple(out), arg_toks

    def check_args(self, tok: Token, params: tuple[str, ...], args: tuple[Term, ...],
                   arg_toks: list[Token]) -> None:
        if len(params) != len(args):
            raise self.error(
                f"{tok.text!r} expects {len(params)} argument(s), got {len(args)}", tok)
        for i, (p, a) in enumerate(zip(params, args)):
            if not self.kb.sorts.is_subsort(a.sort, p):
                raise self.error(
                    f"sort mismatch: argument {i + 1} of {tok.text!r} has sort {a.sort}, "
                    f"expected {p}", arg_toks[i])

    def term(self, env) -> Term:
        tok = self.ident("term")
        name = tok.text
        if name in env:
            if self.at("("):
                raise self.error(f"variable {name!r} cannot be applied", tok)
            return env[name]
        if name in self.kb.functions:
            sig = self.kb.functions[name]
            args, toks = self.args(env)
            self.check_args(tok, sig.params, args, toks)
            return App(name, args, sig.result)
        if name in self.kb.constants:
            return self.kb.constants[name]
        if name in self.kb.predicates:
            raise self.error(f"predicate {name!r} used as a term", tok)
        if self.at("("):
            raise self.error(f"undeclared function or predicate {name!r}", tok)
        raise self.error(f"unbound variable {name!r}", tok)

    def expect_sort(self, t: Term, sort: str, tok: Token) -> None:
        if not self.kb.sorts.is_subsort(t.sort, sort):
            raise self.error(f"sort mismatch: expected {sort}, got {t.sort}", tok)

    def _op_does(self, tok, env) -> Formula:
        self.expect("(")
        atok = self.tok
        agent = self.term(env)
        self.expect_sort(agent, "Agent", atok)
        self.expect(",")
        btok = self.tok
        action = self.term(env)
        self.expect_sort(action, "Action", btok)
        self.expect(")")
        return Does(agent, action)

    def _op_wills(self, tok, env) -> Formula:
        self.expect("(")
        atok = self.tok
        agent = self.term(env)
        self.expect_sort(agent, "Agent", atok)
        self.expect(",")
        body = self.formula(env)
        self.expect(")")
        return Wills(agent, body)

    def _op_causes(self, tok, env) -> Formula:
        self.expect("(")
        ctok = self.tok
        cause = self.formula(env)
        inner = cause.body if isinstance(cause, Not) else cause
        if not isinstance(inner, Does):
            raise self.error("the first argument of Causes must be [not] Does(...)", ctok)
        self.expect(",")
        effect = self.formula(env)
        self.expect(")")
        return Causes(cause, effect)

    def _op_for(self, tok, env) -> Formula:
        self.expect("(")
        btok = self.tok
        behavior = self.formula(env)
        try:
            behavior_shape(behavior)
        except LogicError as e:
            raise self.error(str(e), btok) from None
        self.expect(",")
        ptok = self.tok
        purpose = self.formula(env)
        for node in walk(purpose):
            if isinstance(node, (For, Wills, Deontic)):
                raise self.error("the purpose of For must be first-order", ptok)
        self.expect(")")
        return For(behavior, purpose)

    def _deontic(self, op: DeonticOperator, env) -> Formula:
        self.expect("(")
        mtok = self.tok
        m = self.formula(env)
        if not isinstance(m, For):
            raise self.error(f"{op.value} takes a For(...) formula", mtok)
        self.expect(")")
        return Deontic(op, m)

    def _op_perm(self, tok, env):
        return self._deontic(DeonticOperator.PERM, env)

    def _op_imp(self, tok, env):
        return self._deontic(DeonticOperator.IMP, env)

    def _op_obl(self, tok, env):
        return self._deontic(DeonticOperator.OBL, env)


def parse_kb(source: str) -> KnowledgeBase:
    """Parse a whole ``.full`` document.  Raises :class:`FullSyntaxError`."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as e:
            raise FullSyntaxError(f"invalid UTF-8: {e.reason}", 1, e.start + 1) from None
    try:
        return _Parser(source).parse_file()
    except RecursionError:
        raise FullSyntaxError("formula nested too deeply", 1, 1) from None


def parse_formula(source: str, kb: KnowledgeBase, env: dict[str, Var] | None = None) -> Formula:
    """Parse one formula against the signature of ``kb``."""
    p = _Parser(source, kb)
    try:
        f = p.formula(dict(env or {}))
    except RecursionError:
        raise FullSyntaxError("formula nested too deeply", 1, 1) from None
    if p.tok.kind != "eof":
        raise p.error(f"unexpected {p.tok.text!r} after formula")
    return f


def parse_maxim(source: str, kb: KnowledgeBase, name: str = "") -> Maxim:
    f = parse_formula(source, kb)
    if not isinstance(f, For):
        raise FullSyntaxError("a maxim must be a For(behaviour, purpose) formula", 1, 1)
    try:
        return maxim_from_for(f, name)
    except LogicError as e:
        raise FullSyntaxError(str(e), 1, 1) from None


# --------------------------------------------------------------------------
# rendering

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4}
_OPS = {Iff: "<->", Implies: "->", Or: "or", And: "and"}


def render_term(t: Term) -> str:
    if isinstance(t, App):
        return f"{t.fn}({', '.join(render_term(a) for a in t.args)})"
    return t.name


def _open_right(f: Formula) -> bool:
    """True when ``f`` printed bare would swallow whatever follows it."""
    while True:
        if isinstance(f, (Forall, Exists)):
            return True
        if isinstance(f, Not):
            f = f.body
        elif type(f) in _PREC:
            f = f.right
        else:
            return False


def _render(f: Formula) -> str:
    match f:
        case Top():
            return "true"
        case Bottom():
            return "false"
        case Not(Eq(l, r)):
            return f"{render_term(l)} != {render_term(r)}"
        case Not(b):
            inner = _render(b)
            if type(b) in _PREC:
                inner = f"({inner})"
            return f"not {inner}"
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            prec = _PREC[type(f)]
            ls, rs = _render(l), _render(r)
            right_assoc = isinstance(f, Implies)
            lp = _PREC.get(type(l), 99)
            rp = _PREC.get(type(r), 99)
            if lp < prec or (lp == prec and right_assoc) or _open_right(l):
                ls = f"({ls})"
            if rp < prec or (rp == prec and not right_assoc):
                rs = f"({rs})"
            return f"{ls} {_OPS[type(f)]} {rs}"
        case Forall(v, b) | Exists(v, b):
            word = "forall" if isinstance(f, Forall) else "exists"
            return f"{word} {v.name}:{v.sort}. {_render(b)}"
        case Eq(l, r):
            return f"{render_term(l)} = {render_term(r)}"
        case Atom(p, args):
            if not args:
                return p
            return f"{p}({', '.join(render_term(a) for a in args)})"
        case Does(a, b):
            return f"Does({render_term(a)}, {render_term(b)})"
        case Wills(a, b):
            return f"Wills({render_term(a)}, {_render(b)})"
        case Causes(c, e):
            return f"Causes({_render(c)}, {_render(e)})"
        case For(b, p):
            return f"For({_render(b)}, {_render(p)})"
        case Deontic(op, m):
            return f"{op.value}({_render(m)})"
    raise TypeError(f"not a formula: {f!r}")


def render_formula(f: Formula) -> str:
    return _render(f)


def render_maxim(m: Maxim) -> str:
    return _render(m.formula)


def render_kb(kb: KnowledgeBase) -> str:
    lines: list[str] = []
    for name, parent in kb.sorts.parents.items():
        lines.append(f"sort {name}" + (f" < {parent}" if parent else ""))
    for c in kb.constants.values():
        lines.append(f"const {c.name} : {c.sort}")
    for sig in kb.functions.values():
        line = f"func {sig.name}({', '.join(sig.params)}) : {sig.result}"
        if sig.refines:
            line += f" refines {sig.refines}"
        lines.append(line)
    for sig in kb.predicates.values():
        params = f"({', '.join(sig.params)})" if sig.params else ""
        lines.append(f"pred {sig.name}{params}")
    for n in kb.necessities.values():
        lines.append(f"necessity {n.name}({n.var.name}:{n.var.sort}): {_render(n.consequent)}")
    for name, f in kb.axioms.items():
        lines.append(f"axiom {name}: {_render(f)}")
    for name, m in kb.maxims.items():
        lines.append(f"maxim {name}: {render_maxim(m)}")
    return "\n".join(lines) + "\n"


def render(value) -> str:
    if isinstance(value, KnowledgeBase):
        return render_kb(value)
    if isinstance(value, Maxim):
        return render_maxim(value)
    return render_formula(value)


def check_closed(kb: KnowledgeBase) -> None:
    for name, f in kb.axioms.items():
        if free_vars(f):
            raise LogicError(f"axiom {name} is not closed")
