"""Command-line interface: ``ctxlogic check|reduce|bench|eval``.

Exit codes: 0 the claim holds, 1 it is refuted, 2 unknown, 3 error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import adapters
from .check import KINDS, METHODS, CheckConfig, check, expected_outcome
from .corpus import SUITES, Entry, suite
from .errors import BlowupLimit, CtxLogicError, LogicError, ModelFormatError, ResourceLimit
from .formula import Logic, Not, context_vars
from .kripke import KripkeStructure, Lasso, evaluate, lasso_positions, parse_model
from .ltl import ENGINES
from .parser import guess_logic, parse_formula, print_formula
from .prop import eval_prop, tseitin
from .reduction import DEFAULT_NODE_BUDGET, reduce
from .report import error_to_json, instantiation_to_json, model_to_text, verdict_to_json
from .search import SearchBudget
from .verdict import Verdict

EXIT_HOLDS, EXIT_REFUTED, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3

_LOGICS = [l.value for l in Logic]


def _logic_arg(value: str | None) -> Logic | None:
    return None if value is None else Logic.parse(value)


def _resolve_logic(texts: list[str], given: Logic | None) -> Logic:
    """The logic to use: ``--logic`` if given, else inferred from the operators."""
    if given is not None:
        return given
    found = {guess_logic(t) for t in texts}
    temporal = found - {Logic.PROP}
    if not temporal:
        raise LogicError(
            "the input is purely propositional, so it reads differently in every logic; pass --logic"
        )
    if len(temporal) > 1:
        raise LogicError("the formulas use operators of different logics")
    return temporal.pop()


def _config(args) -> CheckConfig:
    search = SearchBudget(
        max_depth=args.search_depth,
        max_states=args.search_states,
        max_candidates=args.search_candidates,
        time_s=args.time_limit,
    )
    return CheckConfig(
        method=args.method,
        monotonic=not args.non_monotonic,
        budget=args.budget,
        single_query=args.single_query,
        time_limit=args.time_limit,
        ltl_engine=args.ltl_engine,
        search=search,
    )


def _exit_code(kind: str, v: Verdict) -> int:
    if v.outcome == "unknown":
        return EXIT_UNKNOWN
    return EXIT_HOLDS if v.outcome == expected_outcome(kind) else EXIT_REFUTED


def _print_text_verdict(v: Verdict) -> None:
    print(v.outcome)
    if v.detail:
        print(f"# {v.detail}")
    if v.instantiation:
        print("# instantiation")
        for name, text in instantiation_to_json(v.instantiation).items():
            print(f"{name} := {text}")
    if v.model is not None:
        print("# witness" if v.outcome == "satisfiable" else "# counterexample")
        sys.stdout.write(model_to_text(v.model))


# -- commands --------------------------------------------------------------------


def cmd_check(args) -> int:
    texts = [args.lhs] + ([args.rhs] if args.rhs is not None else [])
    if args.kind in ("equiv", "implies") and args.rhs is None:
        raise LogicError(f"{args.kind} needs two formulas")
    if args.kind in ("valid", "sat") and args.rhs is not None:
        raise LogicError(f"{args.kind} takes a single formula")
    logic = _resolve_logic(texts, _logic_arg(args.logic))
    monotonic = not args.non_monotonic
    lhs = parse_formula(args.lhs, logic, monotonic=monotonic)
    rhs = None if args.rhs is None else parse_formula(args.rhs, logic, monotonic=monotonic)
    if logic is Logic.MU and args.method != "search":
        raise LogicError("the mu-calculus has no decision backend here; use --method search")
    v = check(args.kind, lhs, rhs, logic, _config(args))
    if args.json:
        print(json.dumps(verdict_to_json(v, command="check", kind=args.kind, logic=logic.value), indent=2))
    else:
        _print_text_verdict(v)
    return _exit_code(args.kind, v)


def cmd_reduce(args) -> int:
    logic = _resolve_logic([args.formula], _logic_arg(args.logic))
    phi = parse_formula(args.formula, logic, monotonic=not args.non_monotonic)
    out = reduce(
        phi,
        logic,
        method=args.method,
        mode=args.mode,
        monotonic=not args.non_monotonic,
        budget=args.budget,
    )
    emit = args.emit
    if emit == "native":
        text = print_formula(out)
    elif emit == "ltl":
        text = adapters.emit_ltl_text(out)
    elif emit == "ctl":
        text = adapters.emit_ctl_text(out, encode_weak=args.encode_weak)
    else:
        if logic is not Logic.PROP:
            raise LogicError("DIMACS output is only available for propositional formulas")
        # a SAT solver decides validity through the negation
        target = out if args.mode == "satisfiability" else Not(out)
        text = adapters.emit_dimacs(tseitin(target)).rstrip("\n")
    if args.json:
        print(json.dumps({"schema": 1, "command": "reduce", "logic": logic.value,
                          "method": args.method, "mode": args.mode, "emit": emit,
                          "formula": text}, indent=2))
    else:
        print(text)
    return EXIT_HOLDS


def _bench_one(entry: Entry, method: str, args) -> dict:
    cfg = CheckConfig(
        method=method, time_limit=args.time_limit, budget=args.budget, ltl_engine=args.ltl_engine
    )
    start = time.perf_counter()
    row = {"id": entry.id, "method": method, "kind": entry.kind, "expect": entry.expect}
    try:
        lhs, rhs = entry.formulas()
        v = check(entry.kind, lhs, rhs, entry.logic, cfg)
    except (ResourceLimit, BlowupLimit) as exc:
        row.update(outcome="unknown", status="unknown", error=error_to_json(exc)["error"])
    else:
        holds = v.outcome == expected_outcome(entry.kind)
        if v.outcome == "unknown":
            status = "unknown"
        else:
            status = "ok" if holds == entry.should_hold else "mismatch"
        row.update(verdict_to_json(v))
        del row["schema"]
        row["status"] = status
    row["seconds"] = round(time.perf_counter() - start, 3)
    return row


def cmd_bench(args) -> int:
    entries = suite(args.suite, args.n)
    methods = METHODS[:2] if args.method == "both" else (args.method,)
    jobs = [(e, m) for e in entries for m in methods]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            futures = [pool.submit(_bench_one, e, m, args) for e, m in jobs]
            rows = [f.result() for f in futures]
    else:
        rows = []
        for e, m in jobs:
            rows.append(_bench_one(e, m, args))
            if not args.json:
                _print_row(rows[-1])
    counts = {s: sum(r["status"] == s for r in rows) for s in ("ok", "mismatch", "unknown")}
    if args.json:
        print(json.dumps({"schema": 1, "command": "bench", "suite": args.suite,
                          "summary": counts, "entries": rows}, indent=2))
    else:
        if args.jobs > 1:
            for r in rows:
                _print_row(r)
        print(f"{args.suite}: {counts['ok']} ok, {counts['mismatch']} mismatch, {counts['unknown']} unknown")
    if counts["mismatch"]:
        return EXIT_REFUTED
    if counts["unknown"]:
        return EXIT_UNKNOWN
    return EXIT_HOLDS


def _print_row(r: dict) -> None:
    print(f"{r['id']:<18} {r['method']:<10} {r['expect']:<6} {r['outcome']:<16} {r['status']:<9} {r['seconds']:.2f}s")


def _read_valuation(text: str) -> dict[str, bool]:
    """``atom true|false`` per line (``1``/``0`` accepted); ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[1].lower() not in ("true", "false", "1", "0"):
            raise ModelFormatError("expected 'atom true|false'", lineno)
        values[parts[0]] = parts[1].lower() in ("true", "1")
    return values


def cmd_eval(args) -> int:
    with open(args.model) as fh:
        text = fh.read()
    logic = _resolve_logic([args.formula], _logic_arg(args.logic))
    phi = parse_formula(args.formula, logic, allow_reserved=True)
    if context_vars(phi):
        raise LogicError("eval needs an ordinary formula; reduce it first")
    report: dict = {"schema": 1, "command": "eval", "logic": logic.value}
    if logic is Logic.PROP:
        value = eval_prop(phi, _read_valuation(text))
        report["value"] = value
        lines = ["true" if value else "false"]
        code = EXIT_HOLDS if value else EXIT_REFUTED
    else:
        model = parse_model(text)
        if logic is Logic.LTL:
            if not isinstance(model, Lasso):
                raise ModelFormatError("LTL formulas are evaluated on a lasso (stem/cycle)")
            values = lasso_positions(model, phi)
            report["positions"] = values
            lines = [f"position {i}: {'true' if b else 'false'}" for i, b in enumerate(values)]
            code = EXIT_HOLDS if values[0] else EXIT_REFUTED
        else:
            if not isinstance(model, KripkeStructure):
                raise ModelFormatError("branching-time formulas are evaluated on a Kripke structure")
            sat = evaluate(model, phi)
            report["states"] = sorted(sat)
            report["init_holds"] = model.init <= sat
            lines = [f"state {s}: {'true' if s in sat else 'false'}" for s in model.states]
            lines.append(f"initial states {'satisfy' if model.init <= sat else 'violate'} the formula")
            code = EXIT_HOLDS if model.init <= sat else EXIT_REFUTED
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print("\n".join(lines))
    return code


# -- argument parsing ---------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--logic", choices=_LOGICS, help="logic of the formulas (inferred when omitted)")
    p.add_argument("--non-monotonic", action="store_true",
                   help="allow holes under negation (PROP/LTL/CTL only)")
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET,
                   help="node budget of the canonical reduction")
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctxlogic", description="Decide claims about formulas with context variables."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide validity, satisfiability, equivalence or implication")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("lhs")
    p.add_argument("rhs", nargs="?")
    _add_common(p)
    p.add_argument("--method", choices=METHODS, default="equivalid")
    p.add_argument("--single-query", action="store_true",
                   help="decide equiv as one biconditional instead of two implications")
    p.add_argument("--time-limit", type=float, help="seconds per backend call or search")
    p.add_argument("--ltl-engine", choices=ENGINES, default="symbolic",
                   help="BDD fixpoint or explicit automaton for LTL")
    p.add_argument("--search-depth", type=int, default=3)
    p.add_argument("--search-states", type=int, default=4)
    p.add_argument("--search-candidates", type=int, default=10_000)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("reduce", help="print the ordinary formula a claim reduces to")
    p.add_argument("formula")
    _add_common(p)
    p.add_argument("--method", choices=METHODS[:2], default="equivalid")
    p.add_argument("--mode", choices=("validity", "satisfiability"), default="validity")
    p.add_argument("--emit", choices=("native", "ltl", "ctl", "dimacs"), default="native")
    p.add_argument("--encode-weak", action="store_true",
                   help="rewrite weak until for the CTL dialect")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("bench", help="run a bundled benchmark suite")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--n", type=int, help="size of the stress family (default: all small sizes)")
    p.add_argument("--method", choices=("both",) + METHODS[:2], default="both")
    p.add_argument("--jobs", type=int, default=1, help="entries checked in parallel")
    p.add_argument("--time-limit", type=float, help="seconds per backend call")
    p.add_argument("--ltl-engine", choices=ENGINES, default="symbolic")
    p.add_argument("--budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("eval", help="evaluate an ordinary formula on a model file")
    p.add_argument("formula")
    p.add_argument("--model", required=True, help="Kripke structure, lasso or valuation file")
    p.add_argument("--logic", choices=_LOGICS)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    sys.setrecursionlimit(max(sys.getrecursionlimit(), 20_000))
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CtxLogicError, ValueError, OSError) as exc:
        if getattr(args, "json", False):
            print(json.dumps(error_to_json(exc), indent=2))
        else:
            print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
