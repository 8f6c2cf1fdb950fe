"""JSON encodings for formulas, derivation traces and verdicts."""

from __future__ import annotations

from typing import Any

from .dsl import render_formula
from .syntax import (
    And, App, Atom, Bottom, Causes, Const, Deontic, DeonticOperator, Does, Eq,
    Exists, For, Forall, Formula, Iff, Implies, Not, Or, Term, Top, Var, Wills,
)

_BINARY = {"and": And, "or": Or, "implies": Implies, "iff": Iff}
_BINARY_NAMES = {v: k for k, v in _BINARY.items()}


def term_to_json(t: Term) -> dict[str, Any]:
    if isinstance(t, Var):
        return {"var": t.name, "sort": t.sort}
    if isinstance(t, Const):
        return {"const": t.name, "sort": t.sort}
    return {"fn": t.fn, "args": [term_to_json(a) for a in t.args], "sort": t.sort}


def term_from_json(d: dict[str, Any]) -> Term:
    if "var" in d:
        return Var(d["var"], d["sort"])
    if "const" in d:
        return Const(d["const"], d["sort"])
    return App(d["fn"], tuple(term_from_json(a) for a in d["args"]), d["sort"])


def formula_to_json(f: Formula) -> dict[str, Any]:
    match f:
        case Top():
            return {"op": "true"}
        case Bottom():
            return {"op": "false"}
        case Not(b):
            return {"op": "not", "body": formula_to_json(b)}
        case And(l, r) | Or(l, r) | Implies(l, r) | Iff(l, r):
            return {"op": _BINARY_NAMES[type(f)], "left": formula_to_json(l),
                    "right": formula_to_json(r)}
        case Forall(v, b) | Exists(v, b):
            return {"op": "forall" if isinstance(f, Forall) else "exists",
                    "var": term_to_json(v), "body": formula_to_json(b)}
        case Eq(l, r):
            return {"op": "eq", "left": term_to_json(l), "right": term_to_json(r)}
        case Atom(p, args):
            return {"op": "atom", "pred": p, "args": [term_to_json(a) for a in args]}
        case Does(a, b):
            return {"op": "does", "agent": term_to_json(a), "action": term_to_json(b)}
        case Wills(a, b):
            return {"op": "wills", "agent": term_to_json(a), "body": formula_to_json(b)}
        case Causes(c, e):
            return {"op": "causes", "cause": formula_to_json(c), "effect": formula_to_json(e)}
        case For(b, p):
            return {"op": "for", "behavior": formula_to_json(b), "purpose": formula_to_json(p)}
        case Deontic(op, m):
            return {"op": "deontic", "operator": op.value, "maxim": formula_to_json(m)}
    raise TypeError(f"not a formula: {f!r}")


def formula_from_json(d: dict[str, Any]) -> Formula:
    op = d["op"]
    if op == "true":
        return Top()
    if op == "false":
        return Bottom()
    if op == "not":
        return Not(formula_from_json(d["body"]))
    if op in _BINARY:
        return _BINARY[op](formula_from_json(d["left"]), formula_from_json(d["right"]))
    if op in ("forall", "exists"):
        cls = Forall if op == "forall" else Exists
        return cls(term_from_json(d["var"]), formula_from_json(d["body"]))
    if op == "eq":
        return Eq(term_from_json(d["left"]), term_from_json(d["right"]))
    if op == "atom":
        return Atom(d["pred"], tuple(term_from_json(a) for a in d["args"]))
    if op == "does":
        return Does(term_from_json(d["agent"]), term_from_json(d["action"]))
    if op == "wills":
        return Wills(term_from_json(d["agent"]), formula_from_json(d["body"]))
    if op == "causes":
        return Causes(formula_from_json(d["cause"]), formula_from_json(d["effect"]))
    if op == "for":
        return For(formula_from_json(d["behavior"]), formula_from_json(d["purpose"]))
    if op == "deontic":
        return Deontic(DeonticOperator(d["operator"]), formula_from_json(d["maxim"]))
    raise ValueError(f"unknown formula op {op!r}")


def _detail_to_json(detail: dict) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for k, v in detail.items():
        if k == "bindings":
            out[k] = {name: term_to_json(t) for name, t in v.items()}
        else:
            out[k] = v
    return out


def _detail_from_json(detail: dict) -> dict:
    out = dict(detail)
    if "bindings" in out:
        out["bindings"] = {name: term_from_json(t) for name, t in out["bindings"].items()}
    return out


def fact_to_dict(fact) -> dict[str, Any]:
    return {
        "id": fact.id,
        "scope": fact.scope,
        "text": render_formula(fact.formula),
        "formula": formula_to_json(fact.formula),
        "rule": fact.rule,
        "premises": list(fact.premises),
        "detail": _detail_to_json(fact.detail),
    }


def fact_from_dict(d: dict[str, Any]):
    from .engine import Fact

    return Fact(d["id"], formula_from_json(d["formula"]), d["scope"], d["rule"],
                tuple(d["premises"]), _detail_from_json(d.get("detail", {})))
