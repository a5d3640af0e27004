"""Bundled benchmark entries: rewrite rules, their mutations, remarks and the
two families of nested stress formulas."""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .formula import (
    FALSE,
    TRUE,
    And,
    Apply,
    Atom,
    Finally,
    Formula,
    Globally,
    Logic,
    Op,
    Or,
    Until,
    WeakUntil,
)
from .parser import parse_formula, print_formula

SUITES = ("rules", "mutated", "stress1", "stress2", "remarks")


@dataclass(frozen=True)
class Entry:
    """One benchmark claim.

    ``kind`` is ``equiv``, ``implies`` or ``valid``; ``expect`` is ``holds``
    or ``fails`` (``equivalent`` is accepted as a synonym of ``holds``).
    """

    id: str
    logic: Logic
    kind: str
    lhs: str
    rhs: str | None
    expect: str

    @property
    def should_hold(self) -> bool:
        return self.expect in ("holds", "equivalent", "valid")

    def formulas(self) -> tuple[Formula, Formula | None]:
        lhs = parse_formula(self.lhs, self.logic)
        rhs = None if self.rhs is None else parse_formula(self.rhs, self.logic)
        return lhs, rhs


def load_suite(name: str) -> list[Entry]:
    if name not in ("rules", "mutated", "remarks"):
        raise ValueError(f"no bundled data file for suite {name!r}")
    text = resources.files("ctxlogic").joinpath("data", f"{name}.json").read_text()
    data = json.loads(text)
    default_logic = data.get("logic")
    out = []
    for e in data["entries"]:
        out.append(
            Entry(
                e["id"],
                Logic.parse(e.get("logic", default_logic)),
                e.get("kind", "equiv"),
                e["lhs"],
                e.get("rhs"),
                e["expect"],
            )
        )
    return out


# -- rewriting used to build the right-hand sides of the stress families ------


def _rule_weak(node: Formula) -> Formula | None:
    """c[a U b] W g  ->  (GF b & c[a W b] W g) | c[a U b] U (g | G c[false])"""
    if node.op is not Op.W:
        return None
    left, g = node.args
    if left.op is not Op.APPLY or left.args[0].op is not Op.U:
        return None
    c = left.name
    a, b = left.args[0].args
    return Or(
        And(Globally(Finally(b)), WeakUntil(Apply(c, WeakUntil(a, b)), g)),
        Until(Apply(c, Until(a, b)), Or(g, Globally(Apply(c, FALSE)))),
    )


def _rule_until(node: Formula) -> Formula | None:
    """h U c[a W b]  ->  h U c[a U b] | (FG a & (h & F c[true]) W c[a W b])"""
    if node.op is not Op.U:
        return None
    h, right = node.args
    if right.op is not Op.APPLY or right.args[0].op is not Op.W:
        return None
    c = right.name
    a, b = right.args[0].args
    return Or(
        Until(h, Apply(c, Until(a, b))),
        And(
            Finally(Globally(a)),
            WeakUntil(And(h, Finally(Apply(c, TRUE))), right),
        ),
    )


def _rule_limit(node: Formula) -> Formula | None:
    """c[GF p] -> (GF p & c[true]) | c[false], and likewise for FG."""
    if node.op is not Op.APPLY:
        return None
    arg = node.args[0]
    if not (
        (arg.op is Op.G and arg.args[0].op is Op.F)
        or (arg.op is Op.F and arg.args[0].op is Op.G)
    ):
        return None
    c = node.name
    return Or(And(arg, Apply(c, TRUE)), Apply(c, FALSE))


def rewrite_top_down(phi: Formula, rules) -> Formula:
    """Apply the first matching rule at each node, then recurse into the result's
    children (the rewritten node itself is not matched again)."""
    memo: dict[Formula, Formula] = {}

    def go(node: Formula) -> Formula:
        hit = memo.get(node)
        if hit is not None:
            return hit
        out = node
        for rule in rules:
            r = rule(node)
            if r is not None:
                out = r
                break
        if out.args:
            out = out.with_args(tuple(go(a) for a in out.args))
        memo[node] = out
        return out

    return go(phi)


def stress1(n: int) -> Entry:
    """``c1[a1 U c2[a2 W c3[a3 U ... a_{n+1}]]] W g`` against its normal form.

    The operators alternate U, W, U, ... from the outside in.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    inner: Formula = Atom(f"a{n + 1}")
    for k in range(n, 0, -1):
        op = Until if k % 2 == 1 else WeakUntil
        inner = op(Atom(f"a{k}"), inner)
        if k > 1:
            inner = Apply(f"c{k}", inner)
    lhs = WeakUntil(Apply("c1", inner), Atom("g"))
    rhs = rewrite_top_down(lhs, (_rule_weak, _rule_until))
    return Entry(f"stress1-{n}", Logic.LTL, "equiv", print_formula(lhs), print_formula(rhs), "holds")


def stress2(n: int) -> Entry:
    """``c[FG c[GF c[FG ... c[p]]]]`` (n nested limit operators) against the
    formula obtained by extracting every GF/FG from the context."""
    if n < 1:
        raise ValueError("n must be at least 1")
    f: Formula = Apply("c", Atom("p"))
    for k in range(n, 0, -1):
        limit = Finally(Globally(f)) if k % 2 == 1 else Globally(Finally(f))
        f = Apply("c", limit)
    rhs = rewrite_top_down(f, (_rule_limit,))
    return Entry(f"stress2-{n}", Logic.LTL, "equiv", print_formula(f), print_formula(rhs), "holds")


def suite(name: str, n: int | None = None) -> list[Entry]:
    """Entries of a suite; stress suites take ``n`` (default: all small sizes)."""
    if name == "stress1":
        return [stress1(k) for k in ([n] if n else [1, 2])]
    if name == "stress2":
        return [stress2(k) for k in ([n] if n else [1, 2, 3])]
    return load_suite(name)
