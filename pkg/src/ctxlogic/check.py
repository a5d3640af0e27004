"""Deciding contextual claims: reduction to an ordinary formula, then a backend."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .ctl import ctl_sat, ctl_valid
from .errors import LogicError
from .formula import Formula, Implies, Logic, Not, size
from .ltl import ltl_sat, ltl_valid
from .prop import prop_sat, prop_valid
from .reduction import DEFAULT_NODE_BUDGET, build_query, common_logic, reduce
from .search import SearchBudget, refute
from .verdict import Verdict

METHODS = ("equivalid", "canonical", "search")
KINDS = ("valid", "sat", "equiv", "implies")

_VALID = {Logic.PROP: prop_valid, Logic.LTL: ltl_valid, Logic.CTL: ctl_valid}
_SAT = {Logic.PROP: prop_sat, Logic.LTL: ltl_sat, Logic.CTL: ctl_sat}


@dataclass
class CheckConfig:
    method: str = "equivalid"
    monotonic: bool = True
    budget: int = DEFAULT_NODE_BUDGET
    single_query: bool = False
    time_limit: float | None = None  # seconds per backend call (LTL/CTL)
    ltl_engine: str = "symbolic"
    search: SearchBudget = field(default_factory=SearchBudget)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")


def expected_outcome(kind: str) -> str:
    """The outcome that means the claim holds."""
    return {"valid": "valid", "sat": "satisfiable", "equiv": "equivalent", "implies": "lhs_implies_rhs"}[kind]


def _backend(logic: Logic, table: dict, cfg: CheckConfig):
    if logic not in table:
        raise LogicError(
            f"no decision procedure for {logic.value}; use the search method or emit the reduction"
        )
    fn = table[logic]
    if logic is Logic.PROP:
        return fn
    if logic is Logic.LTL:
        return lambda phi: fn(phi, time_limit=cfg.time_limit, engine=cfg.ltl_engine)
    return lambda phi: fn(phi, time_limit=cfg.time_limit)


def check_valid(phi: Formula, logic: Logic, cfg: CheckConfig) -> Verdict:
    """Contextual validity of ``phi``: ``valid``, ``not_valid`` or (search) ``unknown``."""
    start = time.perf_counter()
    if cfg.method == "search":
        v = refute(phi, logic, cfg.search)
        if v.outcome == "refuted":
            v.outcome = "not_valid"
        return v
    backend = _backend(logic, _VALID, cfg)
    ordinary = reduce(phi, logic, method=cfg.method, monotonic=cfg.monotonic, budget=cfg.budget)
    reduced_at = time.perf_counter()
    v = backend(ordinary)
    v.method = cfg.method
    v.stats = {**v.stats, "reduced_size": size(ordinary), "reduce_seconds": reduced_at - start}
    return v


def check_sat(phi: Formula, logic: Logic, cfg: CheckConfig) -> Verdict:
    """Contextual satisfiability: some instantiation makes ``phi`` satisfiable."""
    start = time.perf_counter()
    if cfg.method == "search":
        # a state falsifying !phi satisfies phi
        v = refute(Not(phi), logic, cfg.search)
        if v.outcome == "refuted":
            v.outcome = "satisfiable"
        return v
    backend = _backend(logic, _SAT, cfg)
    ordinary = reduce(
        phi, logic, method=cfg.method, mode="satisfiability", monotonic=cfg.monotonic, budget=cfg.budget
    )
    reduced_at = time.perf_counter()
    v = backend(ordinary)
    v.method = cfg.method
    v.stats = {**v.stats, "reduced_size": size(ordinary), "reduce_seconds": reduced_at - start}
    return v


def check(
    kind: str,
    lhs: Formula,
    rhs: Formula | None = None,
    logic: Logic | None = None,
    cfg: CheckConfig | None = None,
) -> Verdict:
    """Decide a claim; ``equiv`` yields the four-way comparison of both sides."""
    cfg = cfg or CheckConfig()
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}")
    logic = common_logic(*(f for f in (lhs, rhs) if f is not None), logic=logic)
    if kind == "valid":
        return check_valid(build_query("valid", lhs, rhs), logic, cfg)
    if kind == "sat":
        return check_sat(build_query("sat", lhs, rhs), logic, cfg)
    if kind == "implies":
        v = check_valid(build_query("implies", lhs, rhs), logic, cfg)
        if v.outcome == "valid":
            v.outcome = "lhs_implies_rhs"
        return v
    if cfg.single_query:
        v = check_valid(build_query("equiv", lhs, rhs), logic, cfg)
        if v.outcome == "valid":
            v.outcome = "equivalent"
        return v
    fwd = check_valid(Implies(lhs, rhs), logic, cfg)
    bwd = check_valid(Implies(rhs, lhs), logic, cfg)
    return combine(fwd, bwd)


def combine(fwd: Verdict, bwd: Verdict) -> Verdict:
    """Four-way outcome from the verdicts of ``lhs -> rhs`` and ``rhs -> lhs``."""
    stats = {"lhs_implies_rhs": fwd.stats, "rhs_implies_lhs": bwd.stats}
    if "unknown" in (fwd.outcome, bwd.outcome):
        refuted = fwd if fwd.outcome == "not_valid" else bwd if bwd.outcome == "not_valid" else None
        if refuted is not None:
            # one direction fails: equivalence is refuted even if the other is open
            return Verdict(
                "refuted",
                method=refuted.method,
                backend=refuted.backend,
                model=refuted.model,
                instantiation=refuted.instantiation,
                stats=stats,
                detail="lhs does not imply rhs" if refuted is fwd else "rhs does not imply lhs",
            )
        return Verdict("unknown", method=fwd.method, backend=fwd.backend, stats=stats, detail=fwd.detail)
    a, b = fwd.outcome == "valid", bwd.outcome == "valid"
    outcome = {
        (True, True): "equivalent",
        (True, False): "lhs_implies_rhs",
        (False, True): "rhs_implies_lhs",
        (False, False): "incomparable",
    }[(a, b)]
    witness = bwd if a else fwd
    return Verdict(
        outcome,
        method=fwd.method,
        backend=fwd.backend,
        model=None if a and b else witness.model,
        instantiation=None if a and b else witness.instantiation,
        stats=stats,
        detail="" if a and b else ("counterexample to rhs -> lhs" if a else "counterexample to lhs -> rhs"),
    )
