"""LTL satisfiability and validity through generalized Büchi automata.

The automaton is built on the fly by tableau expansion: a state is the set
of obligations for the current position, and expanding it yields *covers*
``(literals, next obligations, postponed untils)``.  Acceptance is on
transitions, one set per until subformula: a transition is accepting for
``a U b`` unless it postponed that until.  Disjunctions whose left side is
purely propositional are split into disjoint branches (``a`` or ``!a & b``)
so that independent propositional choices do not multiply the number of
covers.

The default engine for :func:`ltl_sat` is the BDD fixpoint of
:mod:`ctxlogic.ltl_symbolic`; the explicit automaton stays available for
cross-checking and for small formulas.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass

from .errors import LogicError, ResourceLimit, TimeBudget
from .formula import FALSE, TRUE, Formula, Not, Op, subformulas, to_nnf
from .kripke import Lasso, eval_lasso_direct
from .verdict import Verdict

DEFAULT_STATE_CAP = 200_000

_TEMPORAL = frozenset({Op.X, Op.U, Op.W, Op.G, Op.F})


def simplify(phi: Formula) -> Formula:
    """Normalise an NNF formula: G/F become W/U, constants are folded, and
    subformulas whose truth value is the same at every position of a word
    (``G F a``, ``F G a`` and their Boolean combinations) are pulled out of
    the temporal operators above them."""
    return _Simplifier().go(phi)


def _is_f(f: Formula) -> bool:
    return f.op is Op.U and f.args[0] is TRUE


def _is_g(f: Formula) -> bool:
    return f.op is Op.W and f.args[1] is FALSE


def _flatten(op: Op, f: Formula, out: list) -> None:
    if f.op is op:
        _flatten(op, f.args[0], out)
        _flatten(op, f.args[1], out)
    else:
        out.append(f)


class _Simplifier:
    def __init__(self):
        self.memo: dict[Formula, Formula] = {}
        self.ev: dict[Formula, bool] = {}
        self.un: dict[Formula, bool] = {}

    # A formula is *eventual* if it holds at i iff it holds at some j >= i,
    # *universal* if it holds at i iff it holds at every j >= i, and
    # *suspendable* if both; a suspendable formula is constant along a word.

    def eventual(self, f: Formula) -> bool:
        hit = self.ev.get(f)
        if hit is None:
            op = f.op
            if op in (Op.TRUE, Op.FALSE):
                hit = True
            elif op is Op.U:
                hit = f.args[0] is TRUE or self.eventual(f.args[1])
            elif op in (Op.AND, Op.OR):
                hit = self.eventual(f.args[0]) and self.eventual(f.args[1])
            elif op is Op.X:
                hit = self.eventual(f.args[0])
            elif op is Op.W:
                hit = _is_g(f) and self.eventual(f.args[0])
            else:
                hit = False
            self.ev[f] = hit
        return hit

    def universal(self, f: Formula) -> bool:
        hit = self.un.get(f)
        if hit is None:
            op = f.op
            if op in (Op.TRUE, Op.FALSE):
                hit = True
            elif op is Op.W:
                hit = f.args[1] is FALSE or (
                    self.universal(f.args[0]) and self.universal(f.args[1])
                )
            elif op in (Op.AND, Op.OR):
                hit = self.universal(f.args[0]) and self.universal(f.args[1])
            elif op is Op.X:
                hit = self.universal(f.args[0])
            elif op is Op.U:
                hit = _is_f(f) and self.universal(f.args[1])
            else:
                hit = False
            self.un[f] = hit
        return hit

    def suspendable(self, f: Formula) -> bool:
        return self.eventual(f) and self.universal(f)

    def go(self, node: Formula) -> Formula:
        hit = self.memo.get(node)
        if hit is None:
            hit = self.simp(node)
            self.memo[node] = hit
        return hit

    def split(self, op: Op, f: Formula) -> tuple[list, list]:
        parts: list[Formula] = []
        _flatten(op, f, parts)
        sus = [g for g in parts if self.suspendable(g)]
        rest = [g for g in parts if not self.suspendable(g)]
        return sus, rest

    def junction(self, op: Op, parts: list) -> Formula:
        unit, zero = (TRUE, FALSE) if op is Op.AND else (FALSE, TRUE)
        out: Formula = unit
        for g in reversed(parts):
            out = self.go(Formula(op, (g, out))) if out is not unit else g
        return out

    def simp(self, node: Formula) -> Formula:
        op = node.op
        if op is Op.G:
            return self.go(Formula(Op.W, (node.args[0], FALSE)))
        if op is Op.F:
            return self.go(Formula(Op.U, (TRUE, node.args[0])))
        if not node.args:
            return node
        args = tuple(self.go(a) for a in node.args)
        if op is Op.AND:
            return self.binary_and(*args)
        if op is Op.OR:
            return self.binary_or(*args)
        if op is Op.X:
            a = args[0]
            if self.suspendable(a):
                return a
            return node.with_args(args)
        if op in (Op.U, Op.W):
            return self.until(op, *args)
        return node.with_args(args)

    def binary_and(self, a: Formula, b: Formula) -> Formula:
        if a is FALSE or b is FALSE or _complementary(a, b):
            return FALSE
        if a is TRUE or a == b:
            return b
        if b is TRUE:
            return a
        return Formula(Op.AND, (a, b))

    def binary_or(self, a: Formula, b: Formula) -> Formula:
        if a is TRUE or b is TRUE or _complementary(a, b):
            return TRUE
        if a is FALSE or a == b:
            return b
        if b is FALSE:
            return a
        return Formula(Op.OR, (a, b))

    def until(self, op: Op, a: Formula, b: Formula) -> Formula:
        if b is TRUE:
            return TRUE
        if a is FALSE or a == b:
            return b
        if op is Op.U:
            if b is FALSE:
                return FALSE
            if self.eventual(b):
                return b
            # a U (b | s) == (a U b) | s and a U (b & s) == (a U b) & s
            for junction in (Op.OR, Op.AND):
                if b.op is junction:
                    sus, rest = self.split(junction, b)
                    if sus and rest:
                        inner = self.go(Formula(Op.U, (a, self.junction(junction, rest))))
                        return self.junction(junction, [inner] + sus)
            return Formula(Op.U, (a, b))
        if a is TRUE:
            return TRUE
        if b is FALSE:
            if self.universal(a):
                return a
            # G (a & s) == G a & s and G (a | s) == G a | s
            for junction in (Op.AND, Op.OR):
                if a.op is junction:
                    sus, rest = self.split(junction, a)
                    if sus and rest:
                        inner = self.go(Formula(Op.W, (self.junction(junction, rest), FALSE)))
                        return self.junction(junction, [inner] + sus)
            return Formula(Op.W, (a, b))
        if self.suspendable(b):
            # a W s == s | G a
            return self.junction(Op.OR, [self.go(Formula(Op.W, (a, FALSE))), b])
        if b.op is Op.OR:
            sus, rest = self.split(Op.OR, b)
            if sus and rest:
                inner = self.go(Formula(Op.W, (a, self.junction(Op.OR, rest))))
                return self.junction(Op.OR, [inner] + sus)
        return Formula(Op.W, (a, b))


def _complementary(a: Formula, b: Formula) -> bool:
    return (
        a.op in (Op.ATOM, Op.NATOM)
        and b.op in (Op.ATOM, Op.NATOM)
        and a.name == b.name
        and a.op is not b.op
    )


def _negate_literal(lit: Formula) -> Formula:
    return Formula(Op.NATOM if lit.op is Op.ATOM else Op.ATOM, (), lit.name)


def ltl_closure(phi: Formula) -> set[Formula]:
    """Subformulas of the normalised formula plus ``X u`` for every U/W node."""
    phi = simplify(to_nnf(phi))
    out = set()
    for f in subformulas(phi):
        out.add(f)
        if f.op in (Op.U, Op.W):
            out.add(Formula(Op.X, (f,)))
    return out


# A cover: literals that must hold now, obligations for the next position,
# and the bitmask of untils postponed by this choice.
Cover = tuple[frozenset, frozenset, int]
_EMPTY: Cover = (frozenset(), frozenset(), 0)


def _consistent(lits: frozenset) -> bool:
    return not any(_negate_literal(l) in lits for l in lits if l.op is Op.ATOM)


def _product(xs: list[Cover], ys: list[Cover]) -> list[Cover]:
    out = []
    for l1, n1, p1 in xs:
        for l2, n2, p2 in ys:
            lits = l1 | l2
            if len(lits) > len(l1) and not _consistent(lits):
                continue
            out.append((lits, n1 | n2, p1 | p2))
    return _prune(out)


def _prune(covers: list[Cover]) -> list[Cover]:
    """Drop duplicate covers and covers dominated by a less demanding one."""
    uniq = list(dict.fromkeys(covers))
    if len(uniq) < 2:
        return uniq
    uniq.sort(key=lambda c: (len(c[0]) + len(c[1]), bin(c[2]).count("1")))
    kept: list[Cover] = []
    for c in uniq:
        lits, nxt, post = c
        if any(
            k[0] <= lits and k[1] <= nxt and not (k[2] & ~post) for k in kept
        ):
            continue
        kept.append(c)
    return kept


@dataclass
class Gba:
    """Transition-based generalized Büchi automaton.

    ``edges[s]`` lists ``(letter, target, accepting_mask)`` where ``letter``
    is a consistent set of literals.  ``untils[i]`` is the formula owning
    acceptance bit ``i``.
    """

    states: list[frozenset]
    edges: list[list[tuple[frozenset, int, int]]]
    init: int
    untils: list[Formula]
    formula: Formula

    @property
    def full_mask(self) -> int:
        return (1 << len(self.untils)) - 1


class _Builder:
    def __init__(self, phi: Formula, cap: int, deadline: float | None = None):
        self.phi = phi
        self.cap = cap
        self.deadline = deadline
        self.untils = [f for f in subformulas(phi) if f.op is Op.U]
        self.bit = {f: 1 << i for i, f in enumerate(self.untils)}
        self.memo: dict[Formula, list[Cover]] = {}
        self.order: dict[Formula, int] = {f: i for i, f in enumerate(subformulas(phi))}

    def expand(self, f: Formula) -> list[Cover]:
        hit = self.memo.get(f)
        if hit is not None:
            return hit
        out = self._expand(f)
        self.memo[f] = out
        return out

    def _expand(self, f: Formula) -> list[Cover]:
        op = f.op
        if op is Op.TRUE:
            return [_EMPTY]
        if op is Op.FALSE:
            return []
        if op in (Op.ATOM, Op.NATOM):
            return [(frozenset({f}), frozenset(), 0)]
        if op is Op.AND:
            return _product(self.expand(f.args[0]), self.expand(f.args[1]))
        if op is Op.OR:
            a, b = f.args
            if _is_prop(b) and not _is_prop(a):
                a, b = b, a
            first = self.expand(a)
            second = self.expand(b)
            if _is_prop(a):
                second = _product(second, self.expand(self.neg(a)))
            return _prune(first + second)
        if op is Op.X:
            return [(frozenset(), frozenset({f.args[0]}), 0)]
        if op in (Op.U, Op.W):
            a, b = f.args
            now = self.expand(b)
            later = _product(
                self.expand(a), [(frozenset(), frozenset({f}), self.bit.get(f, 0))]
            )
            if _is_prop(b):
                later = _product(later, self.expand(self.neg(b)))
            return _prune(now + later)
        raise LogicError(f"unexpected operator {op.value} in LTL expansion")

    def neg(self, a: Formula) -> Formula:
        return simplify(to_nnf(Not(a)))

    def expand_state(self, state: frozenset) -> list[Cover]:
        covers = [_EMPTY]
        for f in sorted(state, key=lambda g: self.order.get(g, len(self.order))):
            covers = _product(covers, self.expand(f))
            if not covers:
                break
        return covers

    def build(self) -> Gba:
        init = frozenset({self.phi})
        index = {init: 0}
        states = [init]
        edges: list[list[tuple[frozenset, int, int]]] = []
        full = (1 << len(self.untils)) - 1
        queue = deque([init])
        while queue:
            state = queue.popleft()
            if self.deadline is not None and time.perf_counter() > self.deadline:
                raise TimeBudget(f"LTL automaton construction ran out of time at {len(states)} states")
            out = []
            seen_edges = set()
            for lits, nxt, post in self.expand_state(state):
                target = index.get(nxt)
                if target is None:
                    if len(states) >= self.cap:
                        raise ResourceLimit(f"LTL automaton exceeded {self.cap} states")
                    target = len(states)
                    index[nxt] = target
                    states.append(nxt)
                    queue.append(nxt)
                acc = full & ~post
                key = (lits, target, acc)
                if key not in seen_edges:
                    seen_edges.add(key)
                    out.append(key)
            edges.append(out)
        return Gba(states, edges, 0, self.untils, self.phi)


def _is_prop(f: Formula) -> bool:
    return not any(n.op in _TEMPORAL for n in subformulas(f))


def ltl_to_gba(
    phi: Formula, state_cap: int = DEFAULT_STATE_CAP, time_limit: float | None = None
) -> Gba:
    """Automaton accepting exactly the models of ``phi`` (any LTL query formula)."""
    nnf = simplify(to_nnf(phi))
    deadline = None if time_limit is None else time.perf_counter() + time_limit
    return _Builder(nnf, state_cap, deadline).build()


def _sccs(gba: Gba) -> list[list[int]]:
    from .kripke import _tarjan

    return _tarjan(range(len(gba.states)), lambda s: [t for _, t, _ in gba.edges[s]])


def gba_empty(gba: Gba) -> Lasso | None:
    """``None`` if the language is empty, else an accepted lasso."""
    full = gba.full_mask
    for comp in _sccs(gba):
        members = set(comp)
        acc = 0
        internal = False
        for s in comp:
            for _, t, a in gba.edges[s]:
                if t in members:
                    internal = True
                    acc |= a
        if internal and acc == full:
            return _witness(gba, members)
    return None


def _bfs(gba: Gba, sources: list[int], goal, allowed=None):
    """Shortest edge path from ``sources`` to a state/edge accepted by ``goal``.

    ``goal(state, edge)`` is checked on every traversed edge; returns the list
    of edges ``(state, letter, target, acc)`` or ``None``.
    """
    parent: dict[int, tuple | None] = {s: None for s in sources}
    queue = deque(sources)
    while queue:
        s = queue.popleft()
        for letter, t, a in gba.edges[s]:
            if allowed is not None and t not in allowed:
                continue
            edge = (s, letter, t, a)
            if goal(edge):
                path = [edge]
                cur = s
                while parent[cur] is not None:
                    path.append(parent[cur])
                    cur = parent[cur][0]
                path.reverse()
                return path
            if t not in parent:
                parent[t] = edge
                queue.append(t)
    return None


def _witness(gba: Gba, scc: set[int]) -> Lasso:
    entry_path = []
    if gba.init in scc:
        entry = gba.init
    else:
        entry_path = _bfs(gba, [gba.init], lambda e: e[2] in scc)
        entry = entry_path[-1][2]
    cycle = []
    cur = entry
    missing = gba.full_mask
    while True:
        if missing:
            bit = missing & -missing
            seg = _bfs(gba, [cur], lambda e, bit=bit: bool(e[3] & bit), scc)
        else:
            seg = _bfs(gba, [cur], lambda e: e[2] == entry, scc)
        # a path found inside the SCC always exists by strong connectivity
        for e in seg:
            missing &= ~e[3]
        cycle.extend(seg)
        cur = seg[-1][2]
        if not missing and cur == entry:
            break
    letter = lambda e: frozenset(l.name for l in e[1] if l.op is Op.ATOM)
    return Lasso(tuple(letter(e) for e in entry_path), tuple(letter(e) for e in cycle))


ENGINES = ("symbolic", "explicit")


def ltl_sat(
    phi: Formula,
    state_cap: int = DEFAULT_STATE_CAP,
    time_limit: float | None = None,
    engine: str = "symbolic",
) -> Verdict:
    """Satisfiability with a replay-checked witness lasso.

    ``engine`` selects the BDD fixpoint (``symbolic``, robust on large
    conjunctions of obligations) or the explicit automaton (``explicit``,
    whose ``state_cap`` applies).
    """
    start = time.perf_counter()
    if engine == "symbolic":
        from .ltl_symbolic import symbolic_satisfiable

        lasso, stats = symbolic_satisfiable(simplify(to_nnf(phi)), time_limit)
        backend = "bdd"
    elif engine == "explicit":
        gba = ltl_to_gba(phi, state_cap, time_limit)
        lasso = gba_empty(gba)
        stats = {"states": len(gba.states), "edges": sum(len(e) for e in gba.edges)}
        backend = "gba"
    else:
        raise ValueError(f"unknown LTL engine {engine!r}")
    stats["seconds"] = time.perf_counter() - start
    if lasso is None:
        return Verdict("unsatisfiable", backend=backend, stats=stats)
    if not eval_lasso_direct(lasso, phi):
        raise AssertionError("witness lasso does not satisfy the formula")
    return Verdict("satisfiable", backend=backend, model=lasso, stats=stats)


def ltl_valid(
    phi: Formula,
    state_cap: int = DEFAULT_STATE_CAP,
    time_limit: float | None = None,
    engine: str = "symbolic",
) -> Verdict:
    """Valid iff the negation has no model; otherwise a falsifying lasso."""
    v = ltl_sat(Not(phi), state_cap, time_limit, engine)
    if v.outcome == "unsatisfiable":
        return Verdict("valid", backend=v.backend, stats=v.stats)
    return Verdict("not_valid", backend=v.backend, model=v.model, stats=v.stats)
