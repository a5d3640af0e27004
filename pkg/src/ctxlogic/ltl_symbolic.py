"""Symbolic LTL satisfiability over BDDs.

The tableau has one boolean variable per atom and one per *next
obligation*: for ``X g`` the obligation ``g`` at the next position, for
``g U h`` and ``g W h`` the formula itself at the next position.  A state
is a valuation of these variables; the transition relation forces every
obligation to be met by the successor, and each ``g U h`` contributes the
fairness condition "infinitely often, ``g U h`` is not pending or ``h``
holds".  The formula is satisfiable iff some state satisfying it lies in
the greatest fixpoint of fair states (computed inside the states reachable
from it); a witness lasso is then read off by layered image computations.

Complements the explicit automaton in :mod:`ctxlogic.ltl`, whose size
explodes on conjunctions of many independent response obligations.
"""

from __future__ import annotations

import time

from .errors import LogicError, TimeBudget
from .formula import Formula, Op, subformulas
from .kripke import Lasso

try:  # CUDD bindings when available, otherwise the pure-Python manager
    from dd.cudd import BDD, and_exists
except ImportError:  # pragma: no cover
    from dd.autoref import BDD

    def and_exists(u, v, qvars):
        return u.bdd.exist(qvars, u & v)

_TEMPORAL = (Op.X, Op.U, Op.W)


class SymbolicTableau:
    def __init__(self, phi: Formula, deadline: float | None = None):
        self.phi = phi
        self.deadline = deadline
        subs = list(subformulas(phi))
        self.atoms = sorted({f.name for f in subs if f.op in (Op.ATOM, Op.NATOM)})
        self.obligations = [f for f in subs if f.op in _TEMPORAL]
        self.bdd = BDD()
        names = [f"a{i}" for i in range(len(self.atoms))] + [
            f"x{i}" for i in range(len(self.obligations))
        ]
        self.cur = names
        self.nxt = [n + "'" for n in names]
        for c, n in zip(self.cur, self.nxt):
            self.bdd.declare(c, n)
        self.to_next = dict(zip(self.cur, self.nxt))
        self.to_cur = dict(zip(self.nxt, self.cur))
        self.atom_var = {a: f"a{i}" for i, a in enumerate(self.atoms)}
        self.obl_var = {f: f"x{i}" for i, f in enumerate(self.obligations)}
        self.memo: dict[Formula, object] = {}
        b = self.bdd
        trans = b.true
        for f in self.obligations:
            body = f.args[0] if f.op is Op.X else f
            trans &= b.apply("<=>", b.var(self.obl_var[f]), self._next(self.sat(body)))
        self.trans = trans
        self.fair = [
            ~self.sat(f) | self.sat(f.args[1]) for f in self.obligations if f.op is Op.U
        ] or [b.true]

    def sat(self, f: Formula):
        """BDD of the states where ``f`` holds at the current position."""
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        b = self.bdd
        op = f.op
        if op is Op.TRUE:
            out = b.true
        elif op is Op.FALSE:
            out = b.false
        elif op is Op.ATOM:
            out = b.var(self.atom_var[f.name])
        elif op is Op.NATOM:
            out = ~b.var(self.atom_var[f.name])
        elif op is Op.AND:
            out = self.sat(f.args[0]) & self.sat(f.args[1])
        elif op is Op.OR:
            out = self.sat(f.args[0]) | self.sat(f.args[1])
        elif op is Op.X:
            out = b.var(self.obl_var[f])
        elif op in (Op.U, Op.W):
            out = self.sat(f.args[1]) | (self.sat(f.args[0]) & b.var(self.obl_var[f]))
        else:
            raise LogicError(f"unexpected operator {op.value} in symbolic LTL tableau")
        self.memo[f] = out
        return out

    def _next(self, u):
        return self.bdd.let(self.to_next, u) if self.to_next else u

    def _tick(self) -> None:
        if self.deadline is not None and time.perf_counter() > self.deadline:
            raise TimeBudget("symbolic LTL fixpoint ran out of time")

    def pre(self, u):
        """States with some successor in ``u``."""
        return and_exists(self.trans, self._next(u), self.nxt)

    def post(self, u):
        """Successors of the states in ``u``."""
        if not self.cur:
            return u
        return self.bdd.let(self.to_cur, and_exists(self.trans, u, self.cur))

    def until(self, a, b):
        """E[a U b]."""
        z = b
        while True:
            self._tick()
            new = z | (a & self.pre(z))
            if new == z:
                return z
            z = new

    def reachable(self, init):
        z = init
        while True:
            self._tick()
            new = z | self.post(z)
            if new == z:
                return z
            z = new

    def fair_states(self, within=None):
        """Greatest fixpoint (inside ``within``) of states with a path meeting
        every fairness set infinitely often."""
        z = self.bdd.true if within is None else within
        while True:
            self._tick()
            new = z
            for f in self.fair:
                new &= self.pre(self.until(z, z & f))
            if new == z:
                return z
            z = new

    # -- witness --------------------------------------------------------------

    def pick(self, u) -> dict:
        return self.bdd.pick(u, care_vars=self.cur)

    def cube(self, assignment: dict):
        return self.bdd.cube(assignment)

    def path(self, start: dict, target, within, min_steps: int = 0) -> list[dict]:
        """Shortest state path from ``start`` into ``target`` inside ``within``.

        With ``min_steps`` = 1 the path takes at least one transition.
        """
        layers = [self.cube(start)]
        if min_steps == 0 and layers[0] & target != self.bdd.false:
            return [start]
        seen = layers[0] if min_steps == 0 else self.bdd.false
        while True:
            self._tick()
            frontier = self.post(layers[-1]) & within & ~seen
            if frontier == self.bdd.false:
                return []
            layers.append(frontier)
            seen |= frontier
            hit = frontier & target
            if hit != self.bdd.false:
                break
        states = [self.pick(hit)]
        for layer in reversed(layers[:-1]):
            pred = self.pre(self.cube(states[-1])) & layer
            states.append(self.pick(pred))
        states.reverse()
        return states

    def witness(self, init, fair) -> Lasso:
        current = self.pick(init & fair)
        stem: list[dict] = []
        while True:
            start = current
            loop = [start]
            for f in self.fair:
                seg = self.path(loop[-1], fair & f, fair, min_steps=1)
                loop.extend(seg[1:])
            back = self.path(loop[-1], self.cube(start), fair, min_steps=1)
            if back:
                loop.extend(back[1:-1])
                break
            # the start lies before the fair component: move the loop deeper
            stem.extend(loop[:-1])
            current = loop[-1]
        letter = lambda s: frozenset(a for a in self.atoms if s[self.atom_var[a]])  # noqa: E731
        return Lasso(tuple(letter(s) for s in stem), tuple(letter(s) for s in loop))


def symbolic_satisfiable(phi: Formula, time_limit: float | None = None) -> tuple[Lasso | None, dict]:
    """Witness lasso for an NNF formula over U/W/X (``None`` if unsatisfiable) and stats."""
    deadline = None if time_limit is None else time.perf_counter() + time_limit
    tab = SymbolicTableau(phi, deadline)
    init = tab.sat(phi)
    # restricting to reachable states keeps the fixpoint iterations short
    fair = tab.fair_states(tab.reachable(init))
    init &= fair
    stats = {
        "bdd_vars": len(tab.cur) * 2,
        "obligations": len(tab.obligations),
        "bdd_nodes": len(tab.bdd),
    }
    if init == tab.bdd.false:
        return None, stats
    return tab.witness(init, fair), stats
