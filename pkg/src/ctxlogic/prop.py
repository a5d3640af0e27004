"""Propositional backend: evaluation, Tseitin encoding and a CDCL SAT solver."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping

from .errors import LogicError, ResourceLimit
from .formula import Formula, Not, Op, subformulas
from .verdict import Verdict

DEFAULT_CONFLICT_BUDGET = 1_000_000


def eval_prop(phi: Formula, beta: Mapping[str, bool]) -> bool:
    """Truth value of an ordinary propositional formula; missing atoms are false."""
    memo: dict[Formula, bool] = {}

    def go(node: Formula) -> bool:
        hit = memo.get(node)
        if hit is not None:
            return hit
        op = node.op
        a = node.args
        if op is Op.TRUE:
            out = True
        elif op is Op.FALSE:
            out = False
        elif op is Op.ATOM:
            out = bool(beta.get(node.name, False))
        elif op is Op.NATOM:
            out = not beta.get(node.name, False)
        elif op is Op.NOT:
            out = not go(a[0])
        elif op is Op.AND:
            out = go(a[0]) and go(a[1])
        elif op is Op.OR:
            out = go(a[0]) or go(a[1])
        elif op is Op.IMPLIES:
            out = (not go(a[0])) or go(a[1])
        elif op is Op.IFF:
            out = go(a[0]) == go(a[1])
        else:
            raise LogicError(f"operator {op.value} is not propositional")
        memo[node] = out
        return out

    return go(phi)


@dataclass
class Cnf:
    clauses: list[tuple[int, ...]]
    num_vars: int
    atom_map: dict[str, int] = field(default_factory=dict)


def tseitin(phi: Formula) -> Cnf:
    """Equisatisfiable CNF with one variable per distinct connective node.

    Atoms get the lowest indices in order of first occurrence, so a model's
    restriction to them is read off directly.
    """
    atom_map: dict[str, int] = {}
    for node in subformulas(phi):
        if node.op in (Op.ATOM, Op.NATOM) and node.name not in atom_map:
            atom_map[node.name] = len(atom_map) + 1
    n = len(atom_map)
    clauses: list[tuple[int, ...]] = []
    lit_of: dict[Formula, int] = {}
    true_var = 0

    def new_var() -> int:
        nonlocal n
        n += 1
        return n

    def lit(node: Formula) -> int:
        nonlocal true_var
        hit = lit_of.get(node)
        if hit is not None:
            return hit
        op = node.op
        if op is Op.ATOM:
            out = atom_map[node.name]
        elif op is Op.NATOM:
            out = -atom_map[node.name]
        elif op in (Op.TRUE, Op.FALSE):
            if not true_var:
                true_var = new_var()
                clauses.append((true_var,))
            out = true_var if op is Op.TRUE else -true_var
        elif op is Op.NOT:
            out = -lit(node.args[0])
        elif op in (Op.AND, Op.OR, Op.IMPLIES, Op.IFF):
            a = lit(node.args[0])
            b = lit(node.args[1])
            x = new_var()
            if op is Op.IMPLIES:
                op, a = Op.OR, -a
            if op is Op.AND:
                clauses.extend([(-x, a), (-x, b), (x, -a, -b)])
            elif op is Op.OR:
                clauses.extend([(-x, a, b), (x, -a), (x, -b)])
            else:
                clauses.extend([(-x, -a, b), (-x, a, -b), (x, a, b), (x, -a, -b)])
            out = x
        else:
            raise LogicError(f"operator {op.value} is not propositional")
        lit_of[node] = out
        return out

    _iterative_lits(phi, lit)
    clauses.append((lit(phi),))
    return Cnf(clauses, n, atom_map)


def _iterative_lits(phi: Formula, lit) -> None:
    """Assign literals bottom-up without deep recursion."""
    order = list(subformulas(phi))
    for node in reversed(order):
        lit(node)


class Solver:
    """CDCL with two watched literals and first-UIP clause learning.

    Branching is deterministic: the lowest unassigned variable, set false.
    """

    def __init__(self, cnf: Cnf, conflict_budget: int = DEFAULT_CONFLICT_BUDGET):
        self.n = cnf.num_vars
        self.budget = conflict_budget
        self.value = [0] * (self.n + 1)
        self.level = [0] * (self.n + 1)
        self.reason: list[list[int] | None] = [None] * (self.n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.watches: dict[int, list[list[int]]] = {}
        self.units: list[int] = []
        self.empty = False
        self.conflicts = 0
        self.decisions = 0
        for clause in cnf.clauses:
            self.add_clause(list(dict.fromkeys(clause)))

    def add_clause(self, c: list[int]) -> None:
        if any(-l in c for l in c):
            return
        if not c:
            self.empty = True
        elif len(c) == 1:
            self.units.append(c[0])
        else:
            self.watches.setdefault(c[0], []).append(c)
            self.watches.setdefault(c[1], []).append(c)

    def lit_value(self, l: int) -> int:
        v = self.value[abs(l)]
        return v if l > 0 else -v

    def assign(self, l: int, reason: list[int] | None) -> None:
        v = abs(l)
        self.value[v] = 1 if l > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(l)

    def propagate(self) -> list[int] | None:
        while self.qhead < len(self.trail):
            l = self.trail[self.qhead]
            self.qhead += 1
            false_lit = -l
            ws = self.watches.get(false_lit, [])
            i = 0
            keep = []
            conflict = None
            while i < len(ws):
                c = ws[i]
                i += 1
                if c[0] == false_lit:
                    c[0], c[1] = c[1], c[0]
                if self.lit_value(c[0]) == 1:
                    keep.append(c)
                    continue
                for k in range(2, len(c)):
                    if self.lit_value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(c[1], []).append(c)
                        break
                else:
                    keep.append(c)
                    if self.lit_value(c[0]) == -1:
                        conflict = c
                        keep.extend(ws[i:])
                        break
                    self.assign(c[0], c)
            self.watches[false_lit] = keep
            if conflict is not None:
                return conflict
        return None

    def analyze(self, conflict: list[int]) -> tuple[list[int], int]:
        current = len(self.trail_lim)
        seen = set()
        learnt: list[int] = []
        counter = 0
        p = None
        idx = len(self.trail) - 1
        clause = conflict
        while True:
            for q in clause:
                if p is not None and q == p:
                    continue
                v = abs(q)
                if v in seen or self.level[v] == 0:
                    continue
                seen.add(v)
                if self.level[v] == current:
                    counter += 1
                else:
                    learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            counter -= 1
            if counter == 0:
                break
            clause = self.reason[abs(p)]
        learnt.insert(0, -p)
        if len(learnt) == 1:
            return learnt, 0
        # second watch: the literal with the highest level among the rest
        best = max(range(1, len(learnt)), key=lambda j: self.level[abs(learnt[j])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        start = self.trail_lim[lvl]
        for l in self.trail[start:]:
            v = abs(l)
            self.value[v] = 0
            self.reason[v] = None
        del self.trail[start:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def solve(self) -> dict[int, bool] | None:
        if self.empty:
            return None
        for u in self.units:
            val = self.lit_value(u)
            if val == -1:
                return None
            if val == 0:
                self.assign(u, None)
        next_var = 1
        while True:
            conflict = self.propagate()
            if conflict is not None:
                self.conflicts += 1
                if not self.trail_lim:
                    return None
                if self.conflicts > self.budget:
                    raise ResourceLimit(f"SAT conflict budget of {self.budget} exhausted")
                learnt, lvl = self.analyze(conflict)
                self.backtrack(lvl)
                next_var = 1
                if len(learnt) == 1:
                    self.assign(learnt[0], None)
                else:
                    self.watches.setdefault(learnt[0], []).append(learnt)
                    self.watches.setdefault(learnt[1], []).append(learnt)
                    self.assign(learnt[0], learnt)
                continue
            while next_var <= self.n and self.value[next_var] != 0:
                next_var += 1
            if next_var > self.n:
                return {v: self.value[v] == 1 for v in range(1, self.n + 1)}
            self.decisions += 1
            self.trail_lim.append(len(self.trail))
            self.assign(-next_var, None)


def sat(cnf: Cnf, conflict_budget: int = DEFAULT_CONFLICT_BUDGET) -> dict[int, bool] | None:
    """A satisfying assignment (variable -> bool) or ``None`` when unsatisfiable."""
    return Solver(cnf, conflict_budget).solve()


def prop_sat(phi: Formula, conflict_budget: int = DEFAULT_CONFLICT_BUDGET) -> Verdict:
    start = time.perf_counter()
    cnf = tseitin(phi)
    solver = Solver(cnf, conflict_budget)
    model = solver.solve()
    stats = {
        "vars": cnf.num_vars,
        "clauses": len(cnf.clauses),
        "conflicts": solver.conflicts,
        "seconds": time.perf_counter() - start,
    }
    if model is None:
        return Verdict("unsatisfiable", backend="cdcl", stats=stats)
    beta = {a: model[v] for a, v in cnf.atom_map.items()}
    return Verdict("satisfiable", backend="cdcl", model=beta, stats=stats)


def prop_valid(phi: Formula, conflict_budget: int = DEFAULT_CONFLICT_BUDGET) -> Verdict:
    """Valid iff the negation is unsatisfiable; otherwise a falsifying valuation."""
    v = prop_sat(Not(phi), conflict_budget)
    if v.outcome == "unsatisfiable":
        return Verdict("valid", backend="cdcl", stats=v.stats)
    return Verdict("not_valid", backend="cdcl", model=v.model, stats=v.stats)
