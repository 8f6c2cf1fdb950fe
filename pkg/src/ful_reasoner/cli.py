"""Command-line driver: ``full check|universalize|eval|batch|replay``.

Exit codes are a stable contract: 0 for a true answer (or success), 1 for a
false answer, 2 for diagnostics and refusals.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Sequence, TextIO

from .certificate import check_refutation, check_trace
from .dsl import FullSyntaxError, KnowledgeBase, parse_kb, render_formula, render_maxim
from .engine import ResourceLimits, Status, check_gamma_consistency
from .evaluator import Basis, Verdict, evaluate, verdict_to_json
from .serialize import formula_from_json, formula_to_json
from .syntax import DeonticOperator, LogicError
from .universal import universalize

EXIT_TRUE, EXIT_FALSE, EXIT_DIAGNOSTIC = 0, 1, 2


class CliError(Exception):
    pass


# ----------------------------------------------------------------- helpers


def resolve_kb_path(path: str) -> Path | resources.abc.Traversable:
    """Find a KB file; ``examples/NAME.full`` falls back to the bundled examples."""
    p = Path(path)
    if p.exists():
        return p
    if p.parent.name == "examples" and p.suffix == ".full":
        bundled = resources.files("ful_reasoner") / "kbs" / p.name
        if bundled.is_file():
            return bundled
    raise CliError(f"{path}: no such file")


def load_kb(path: str) -> KnowledgeBase:
    source = resolve_kb_path(path)
    try:
        data = source.read_bytes()
    except OSError as e:
        raise CliError(f"{path}: {e.strerror or e}") from None
    try:
        return parse_kb(data)
    except FullSyntaxError as e:
        raise CliError(f"{path}:{e}") from None


def limits_from(args: argparse.Namespace) -> ResourceLimits:
    try:
        return ResourceLimits(args.max_facts, args.max_iterations, args.max_term_depth)
    except ValueError as e:
        raise CliError(str(e)) from None


def reserved_names(kb: KnowledgeBase) -> set[str]:
    return set(kb.constants) | set(kb.functions) | set(kb.predicates)


class Style:
    """ANSI styling controlled by ``FULL_COLOR`` (auto, always, never)."""

    def __init__(self, stream: TextIO):
        mode = os.environ.get("FULL_COLOR", "auto").lower()
        if mode == "always":
            self.on = True
        elif mode == "never":
            self.on = False
        else:
            self.on = hasattr(stream, "isatty") and stream.isatty() and "NO_COLOR" not in os.environ

    def _wrap(self, code: str, text: str) -> str:
        return f"\x1b[{code}m{text}\x1b[0m" if self.on else text

    def good(self, text: str) -> str:
        return self._wrap("32", text)

    def bad(self, text: str) -> str:
        return self._wrap("31", text)

    def dim(self, text: str) -> str:
        return self._wrap("2", text)

    def bold(self, text: str) -> str:
        return self._wrap("1", text)


# ----------------------------------------------------------------- output


def format_verdict(v: Verdict, style: Style, trace: bool = False) -> str:
    answer = "true" if v.answer else "false"
    head = f"{v.op.value}({v.maxim.name or 'maxim'}) = "
    lines = [style.bold(head) + (style.good(answer) if v.answer else style.bad(answer))]
    if v.refused:
        lines.append(style.bad("REFUSED: " + v.note))
    if v.unproven:
        lines.append(style.bad(v.note))
    lines.append(f"basis: {v.basis.value}")
    if v.evaluated_maxim is not None and v.evaluated_maxim != v.maxim:
        lines.append(f"evaluated: {render_maxim(v.evaluated_maxim)}")
    if v.evidence is not None and v.basis is Basis.CONTRADICTION:
        ev = v.evidence
        lines.append(f"chi: {render_formula(ev.positive)}  [fact {ev.positive_id}]")
        lines.append(f"contradicted by: {render_formula(ev.negative)}  [fact {ev.negative_id}] in {ev.scope}")
    if v.duty is not None:
        extra = ""
        if len(v.duties) > 1:
            extra = " (also: " + ", ".join(d.value for d in v.duties if d is not v.duty) + ")"
        lines.append(f"duty: {v.duty.value}{extra}")
    if v.ul_record is not None:
        lines.append(f"universal law: {render_formula(v.ul_record.ul_formula)}")
    lines.append(style.dim(f"facts: {len(v.trace)}  iterations: {v.iterations}"))
    if trace:
        lines.append("trace:")
        for f in v.trace:
            prem = ",".join(map(str, f.premises))
            lines.append(style.dim(f"  {f.id:>4} [{f.scope}] {f.rule}({prem})  ") + f.text)
    return "\n".join(lines)


def verdict_exit(v: Verdict) -> int:
    if v.refused:
        return EXIT_DIAGNOSTIC
    return EXIT_TRUE if v.answer else EXIT_FALSE


# ----------------------------------------------------------------- commands


def cmd_check(args, out: TextIO, style: Style) -> int:
    kb = load_kb(args.kb)
    result = check_gamma_consistency(kb, limits_from(args))
    n = len(kb.axioms)
    if args.format == "json":
        doc = {"status": result.status.value, "axioms": n, "iterations": result.iterations}
        if result.evidence:
            doc["evidence"] = [render_formula(result.evidence.positive),
                               render_formula(result.evidence.negative)]
        print(json.dumps(doc, indent=2), file=out)
    elif result.status is Status.SATURATED:
        print(style.good(f"consistent ({n} axioms)"), file=out)
    elif result.status is Status.CONTRADICTION:
        ev = result.evidence
        print(style.bad(f"inconsistent ({n} axioms): {render_formula(ev.positive)} "
                        f"contradicts {render_formula(ev.negative)}"), file=out)
    else:
        print(style.bad(f"undetermined ({n} axioms): resource limits reached"), file=out)
    return {Status.SATURATED: EXIT_TRUE, Status.CONTRADICTION: EXIT_FALSE}.get(
        result.status, EXIT_DIAGNOSTIC)


def _maxim(kb: KnowledgeBase, name: str):
    try:
        return kb.maxim(name)
    except KeyError:
        known = ", ".join(sorted(kb.maxims)) or "none"
        raise CliError(f"unknown maxim {name!r} (known: {known})") from None


def cmd_universalize(args, out: TextIO, style: Style) -> int:
    kb = load_kb(args.kb)
    rec = universalize(_maxim(kb, args.maxim), reserved_names(kb), kb.sorts)
    sigma = {c.name: v.name for c, v in rec.sigma.items()}
    if args.format == "json":
        doc = {
            "maxim": args.maxim,
            "t_phi2": [c.name for c in rec.t_phi2],
            "t_phi1": [c.name for c in rec.t_phi1],
            "sigma": sigma,
            "ul": render_formula(rec.ul_formula),
            "formula": formula_to_json(rec.ul_formula),
        }
        print(json.dumps(doc, indent=2), file=out)
    else:
        print(style.bold("UL: ") + render_formula(rec.ul_formula), file=out)
        print(f"T(phi2): {', '.join(c.name for c in rec.t_phi2)}", file=out)
        print(f"T(phi1): {', '.join(c.name for c in rec.t_phi1) or '-'}", file=out)
        print("sigma: " + ", ".join(f"{k} -> {v}" for k, v in sigma.items()), file=out)
    return EXIT_TRUE


def cmd_eval(args, out: TextIO, style: Style) -> int:
    kb = load_kb(args.kb)
    m = _maxim(kb, args.maxim)
    v = evaluate(kb, args.op, m, limits_from(args))
    if args.format == "json":
        print(json.dumps(verdict_to_json(v, include_trace=args.trace), indent=2), file=out)
    else:
        print(format_verdict(v, style, args.trace), file=out)
    return verdict_exit(v)


def cmd_batch(args, out: TextIO, style: Style) -> int:
    kb = load_kb(args.kb)
    limits = limits_from(args)
    jobs = [(name, op) for name in sorted(kb.maxims) for op in args.ops]
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        verdicts = list(pool.map(lambda job: evaluate(kb, job[1], kb.maxims[job[0]], limits), jobs))
    if args.format == "json":
        print(json.dumps({"kb": args.kb, "verdicts": [verdict_to_json(v) for v in verdicts]},
                         indent=2), file=out)
    else:
        rows = [("maxim", "op", "answer", "basis", "duty")]
        for (name, op), v in zip(jobs, verdicts):
            flag = " (unproven)" if v.unproven else " (refused)" if v.refused else ""
            rows.append((name, op.value, str(v.answer).lower() + flag, v.basis.value,
                         v.duty.value if v.duty else "-"))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        for k, row in enumerate(rows):
            line = "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
            print(style.bold(line) if k == 0 else line, file=out)
    return EXIT_DIAGNOSTIC if any(v.refused for v in verdicts) else EXIT_TRUE


def cmd_replay(args, out: TextIO, style: Style) -> int:
    kb = load_kb(args.kb)
    try:
        doc = json.loads(Path(args.trace_file).read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise CliError(f"{args.trace_file}: {e}") from None
    if not isinstance(doc, dict) or "trace" not in doc:
        raise CliError(f"{args.trace_file}: no trace (run eval with --format json --trace)")
    assumptions = {k: formula_from_json(f) for k, f in doc.get("assumptions", {}).items()}
    ev = doc.get("evidence")
    if ev and doc.get("basis") == "contradiction":
        report = check_refutation(doc["trace"], kb, assumptions, ev["positive_id"], ev["negative_id"])
    else:
        report = check_trace(doc["trace"], kb, assumptions)
    print(style.good(str(report)) if report.ok else style.bad(str(report)), file=out)
    return EXIT_TRUE if report.ok else EXIT_FALSE


# ----------------------------------------------------------------- parsing


def _ops(text: str) -> list[DeonticOperator]:
    try:
        return [DeonticOperator.parse(t.strip()) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _op(text: str) -> DeonticOperator:
    try:
        return DeonticOperator.parse(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def build_parser() -> argparse.ArgumentParser:
    defaults = ResourceLimits()
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kb", required=True, help="knowledge base (.full file)")
    common.add_argument("--format", choices=("human", "json"), default="human")
    common.add_argument("--max-facts", type=int, default=defaults.max_facts)
    common.add_argument("--max-iterations", type=int, default=defaults.max_iterations)
    common.add_argument("--max-term-depth", type=int, default=defaults.max_term_depth)

    parser = argparse.ArgumentParser(prog="full", description="Universal-law maxim evaluation.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="check the knowledge base for consistency")
    p = sub.add_parser("universalize", parents=[common], help="print a maxim's universal law")
    p.add_argument("--maxim", required=True)
    p = sub.add_parser("eval", parents=[common], help="evaluate a deontic query")
    p.add_argument("--maxim", required=True)
    p.add_argument("--op", type=_op, default=DeonticOperator.PERM, help="perm, imp or obl")
    p.add_argument("--trace", action="store_true", help="include the derivation trace")
    p = sub.add_parser("batch", parents=[common], help="evaluate every maxim")
    p.add_argument("--ops", type=_ops, default=list(DeonticOperator), help="comma-separated operators")
    p.add_argument("--jobs", type=int, default=4)
    p = sub.add_parser("replay", parents=[common], help="re-check a JSON trace from eval --trace")
    p.add_argument("trace_file")
    return parser


COMMANDS = {
    "check": cmd_check,
    "universalize": cmd_universalize,
    "eval": cmd_eval,
    "batch": cmd_batch,
    "replay": cmd_replay,
}


def main(argv: Sequence[str] | None = None, out: TextIO | None = None,
         err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_DIAGNOSTIC if e.code else EXIT_TRUE
    try:
        return COMMANDS[args.command](args, out, Style(out))
    except CliError as e:
        print(f"full: error: {e}", file=err)
    except (LogicError, ValueError) as e:
        print(f"full: error: {e}", file=err)
    return EXIT_DIAGNOSTIC


if __name__ == "__main__":
    sys.exit(main())
