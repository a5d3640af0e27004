"""Seeded random formulas, contexts and models for the property tests.

Everything here takes an explicit ``random.Random`` so that fixed-count
trials are reproducible; ``strategies`` wraps the same generators for
hypothesis.
"""

from __future__ import annotations

import random
from collections import deque

from hypothesis import strategies as st

from ctxlogic.formula import (
    FALSE,
    HOLE,
    TRUE,
    And,
    Apply,
    Atom,
    Formula,
    Logic,
    NegAtom,
    Op,
    Or,
    Var,
    subformulas,
)

ATOMS = ("p", "q", "r", "s", "t")

UNARY = {
    Logic.PROP: (),
    Logic.LTL: (Op.X, Op.G, Op.F),
    Logic.CTL: (Op.AX, Op.EX, Op.AG, Op.AF, Op.EG, Op.EF),
    Logic.MU: (Op.DIA, Op.BOX),
}
BINARY = {
    Logic.PROP: (Op.AND, Op.OR),
    Logic.LTL: (Op.AND, Op.OR, Op.U, Op.W),
    Logic.CTL: (Op.AND, Op.OR, Op.AU, Op.AW, Op.EU, Op.EW),
    Logic.MU: (Op.AND, Op.OR),
}


class _Gen:
    def __init__(self, rng, logic, atoms, cvars=(), max_apps=0, holes=False, binders=True):
        self.rng = rng
        self.logic = logic
        self.atoms = atoms
        self.cvars = cvars
        self.apps_left = max_apps
        self.holes = holes
        self.binders = binders and logic is Logic.MU
        self.nvars = 0

    def leaf(self, scope):
        r = self.rng
        choices = ["atom", "natom", "const"]
        if self.holes:
            choices += ["hole", "hole"]
        if scope:
            choices += ["var", "var"]
        kind = r.choice(choices)
        if kind == "atom":
            return Atom(r.choice(self.atoms))
        if kind == "natom":
            return NegAtom(r.choice(self.atoms))
        if kind == "hole":
            return HOLE
        if kind == "var":
            return Var(r.choice(scope))
        return r.choice((TRUE, FALSE))

    def go(self, depth, scope=()):
        r = self.rng
        if depth <= 0 or r.random() < 0.2:
            return self.leaf(scope)
        kinds = ["bin", "bin"]
        if UNARY[self.logic]:
            kinds += ["un", "un"]
        if self.cvars and self.apps_left > 0:
            kinds += ["app", "app"]
        if self.binders:
            kinds.append("fix")
        kind = r.choice(kinds)
        if kind == "un":
            return Formula(r.choice(UNARY[self.logic]), (self.go(depth - 1, scope),))
        if kind == "bin":
            op = r.choice(BINARY[self.logic])
            return Formula(op, (self.go(depth - 1, scope), self.go(depth - 1, scope)))
        if kind == "app":
            self.apps_left -= 1
            return Apply(r.choice(self.cvars), self.go(depth - 1, scope))
        x = f"X{self.nvars}"
        self.nvars += 1
        return Formula(r.choice((Op.MU, Op.NU)), (self.go(depth - 1, scope + (x,)),), x)


def random_formula(
    rng: random.Random,
    logic: Logic,
    depth: int = 4,
    atoms=ATOMS[:3],
    *,
    cvars=(),
    max_apps: int = 0,
    scope=(),
    binders: bool = True,
) -> Formula:
    """A random NNF formula; fixpoint variables (MU) occur only positively.

    With ``cvars`` it contains at most ``max_apps`` context applications;
    variables in ``scope`` may occur free.
    """
    return _Gen(rng, logic, atoms, cvars, max_apps, binders=binders).go(depth, tuple(scope))


def random_context(
    rng: random.Random, logic: Logic, depth: int = 3, atoms=ATOMS[:3], scope=()
) -> Formula:
    """A random monotone context with at least one hole."""
    while True:
        ctx = _Gen(rng, logic, atoms, holes=True).go(depth, tuple(scope))
        if any(n.op is Op.HOLE for n in subformulas(ctx)):
            return ctx


def random_instantiation(rng, logic, cvars, depth=3, atoms=ATOMS[:3]) -> dict[str, Formula]:
    return {c: random_context(rng, logic, depth, atoms) for c in cvars}


def weaken(rng: random.Random, phi: Formula, logic: Logic) -> Formula:
    """A formula implied by ``phi``: one subterm ``f`` becomes ``f | g``.

    Every position of an NNF formula is monotone, including arguments of
    monotone contexts, so the implication is contextually valid.
    """
    nodes = [n for n in subformulas(phi) if n.op is not Op.VAR]
    target = rng.choice(nodes)
    extra = random_formula(rng, logic, 2, atoms=sorted({"p", "q"}))
    done = [False]

    def go(node):
        if node == target and not done[0]:
            done[0] = True
            return Or(node, extra)
        if not node.args:
            return node
        return node.with_args(tuple(go(a) for a in node.args))

    return go(phi)


def strengthen(rng: random.Random, phi: Formula, logic: Logic) -> Formula:
    """A formula implying ``phi``: one subterm ``f`` becomes ``f & g``."""
    nodes = [n for n in subformulas(phi) if n.op is not Op.VAR]
    target = rng.choice(nodes)
    extra = random_formula(rng, logic, 2, atoms=("p", "q"))
    done = [False]

    def go(node):
        if node == target and not done[0]:
            done[0] = True
            return And(node, extra)
        if not node.args:
            return node
        return node.with_args(tuple(go(a) for a in node.args))

    return go(phi)


def reachable_from(k, s) -> set[int]:
    """States reachable from ``s`` in zero or more steps (plain BFS)."""
    seen = {s}
    work = deque([s])
    while work:
        u = work.popleft()
        for t in k.succ[u]:
            if t not in seen:
                seen.add(t)
                work.append(t)
    return seen


def gamma(k, states) -> frozenset[int]:
    """States all of whose reachable states lie in ``states``."""
    states = set(states)
    return frozenset(s for s in k.states if reachable_from(k, s) <= states)


# -- hypothesis wrappers -------------------------------------------------------


@st.composite
def formulas(draw, logic: Logic, depth: int = 4, cvars=(), max_apps: int = 0, atoms=ATOMS[:3]):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_formula(random.Random(seed), logic, depth, atoms, cvars=cvars, max_apps=max_apps)


@st.composite
def contexts(draw, logic: Logic, depth: int = 3, atoms=ATOMS[:3]):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_context(random.Random(seed), logic, depth, atoms)
