"""CTL satisfiability and validity by tableau construction and pruning.

A *prestate* is a set of formulas that must hold at a node; expanding it
yields *states* ``(literals, AX demands, EX demands, fulfilled)`` where
``fulfilled`` records the eventualities (``A(a U b)`` / ``E(a U b)``) whose
right side was chosen at that state.  Every state has one successor
prestate per EX demand (each together with all AX demands), or a single
one built from the AX demands alone.

States are deleted while some successor prestate has no surviving state or
some pending eventuality cannot be fulfilled within the survivors.  A model
is read off the survivors by unwinding with a round-robin focus on one
eventuality at a time, following decreasing fulfilment ranks.
"""

from __future__ import annotations

import time
from collections import deque

from .errors import LogicError, ResourceLimit, TimeBudget
from .formula import FALSE, TRUE, Formula, Not, Op, subformulas, to_nnf
from .kripke import KripkeStructure, eval_ctl_direct
from .verdict import Verdict

DEFAULT_STATE_CAP = 2**18

_TEMPORAL = frozenset(
    {Op.AX, Op.EX, Op.AG, Op.AF, Op.EG, Op.EF, Op.AU, Op.AW, Op.EU, Op.EW}
)

# (literals, AX demands, EX demands, fulfilled eventualities)
State = tuple[frozenset, frozenset, frozenset, frozenset]
_EMPTY: State = (frozenset(), frozenset(), frozenset(), frozenset())


def simplify(phi: Formula) -> Formula:
    """Rewrite an NNF CTL formula over AX/EX/AU/AW/EU/EW and fold constants."""
    memo: dict[Formula, Formula] = {}

    def go(node: Formula) -> Formula:
        hit = memo.get(node)
        if hit is None:
            hit = _simp(node)
            memo[node] = hit
        return hit

    def _simp(node: Formula) -> Formula:
        op = node.op
        if op is Op.AG:
            return go(Formula(Op.AW, (node.args[0], FALSE)))
        if op is Op.EG:
            return go(Formula(Op.EW, (node.args[0], FALSE)))
        if op is Op.AF:
            return go(Formula(Op.AU, (TRUE, node.args[0])))
        if op is Op.EF:
            return go(Formula(Op.EU, (TRUE, node.args[0])))
        if not node.args:
            return node
        args = tuple(go(a) for a in node.args)
        if op is Op.AND:
            a, b = args
            if a is FALSE or b is FALSE or _complementary(a, b):
                return FALSE
            if a is TRUE or a == b:
                return b
            if b is TRUE:
                return a
        elif op is Op.OR:
            a, b = args
            if a is TRUE or b is TRUE or _complementary(a, b):
                return TRUE
            if a is FALSE or a == b:
                return b
            if b is FALSE:
                return a
        elif op in (Op.AX, Op.EX):
            if args[0] is TRUE or args[0] is FALSE:
                return args[0]
        elif op in (Op.AU, Op.AW, Op.EU, Op.EW):
            a, b = args
            if b is TRUE:
                return TRUE
            if a is FALSE or a == b:
                return b
            if op in (Op.AU, Op.EU) and b is FALSE:
                return FALSE
            if op in (Op.AW, Op.EW) and a is TRUE:
                return TRUE
        return node.with_args(args)

    return go(phi)


def _complementary(a: Formula, b: Formula) -> bool:
    return (
        a.op in (Op.ATOM, Op.NATOM)
        and b.op in (Op.ATOM, Op.NATOM)
        and a.name == b.name
        and a.op is not b.op
    )


def _is_prop(f: Formula) -> bool:
    return not any(n.op in _TEMPORAL for n in subformulas(f))


def _consistent(lits: frozenset) -> bool:
    return not any(
        Formula(Op.NATOM, (), l.name) in lits for l in lits if l.op is Op.ATOM
    )


def _product(xs: list[State], ys: list[State]) -> list[State]:
    out = []
    for l1, a1, e1, f1 in xs:
        for l2, a2, e2, f2 in ys:
            lits = l1 | l2
            if len(lits) > len(l1) and not _consistent(lits):
                continue
            out.append((lits, a1 | a2, e1 | e2, f1 | f2))
    return _prune(out)


def _prune(states: list[State]) -> list[State]:
    """Drop duplicates and states that demand more than another alternative."""
    uniq = list(dict.fromkeys(states))
    if len(uniq) < 2:
        return uniq
    uniq.sort(key=lambda s: (len(s[0]) + len(s[1]) + len(s[2]), -len(s[3])))
    kept: list[State] = []
    for s in uniq:
        lits, ax, ex, ful = s
        if any(
            k[0] <= lits and k[1] <= ax and k[2] <= ex and k[3] >= ful for k in kept
        ):
            continue
        kept.append(s)
    return kept


class _Tableau:
    def __init__(self, phi: Formula, cap: int, deadline: float | None = None):
        self.phi = phi
        self.cap = cap
        self.deadline = deadline
        self.memo: dict[Formula, list[State]] = {}
        self.order = {f: i for i, f in enumerate(subformulas(phi))}
        self.events = [f for f in subformulas(phi) if f.op in (Op.AU, Op.EU)]
        self.states: list[State] = []
        self.state_index: dict[State, int] = {}
        self.prestates: list[frozenset] = []
        self.pre_index: dict[frozenset, int] = {}
        self.pre_states: list[list[int]] = []  # prestate -> its states
        self.succ: list[list[int]] = []  # state -> successor prestates

    # -- expansion -------------------------------------------------------------

    def neg(self, f: Formula) -> Formula:
        return simplify(to_nnf(Not(f)))

    def expand(self, f: Formula) -> list[State]:
        hit = self.memo.get(f)
        if hit is None:
            hit = self._expand(f)
            self.memo[f] = hit
        return hit

    def _expand(self, f: Formula) -> list[State]:
        op = f.op
        if op is Op.TRUE:
            return [_EMPTY]
        if op is Op.FALSE:
            return []
        if op in (Op.ATOM, Op.NATOM):
            return [(frozenset({f}), frozenset(), frozenset(), frozenset())]
        if op is Op.AND:
            return _product(self.expand(f.args[0]), self.expand(f.args[1]))
        if op is Op.OR:
            a, b = f.args
            if _is_prop(b) and not _is_prop(a):
                a, b = b, a
            second = self.expand(b)
            if _is_prop(a):
                second = _product(second, self.expand(self.neg(a)))
            return _prune(self.expand(a) + second)
        if op is Op.AX:
            return [(frozenset(), frozenset({f.args[0]}), frozenset(), frozenset())]
        if op is Op.EX:
            return [(frozenset(), frozenset(), frozenset({f.args[0]}), frozenset())]
        if op in (Op.AU, Op.AW, Op.EU, Op.EW):
            a, b = f.args
            now = self.expand(b)
            if op in (Op.AU, Op.EU):
                now = [(l, x, e, ful | {f}) for l, x, e, ful in now]
            if op in (Op.AU, Op.AW):
                step = (frozenset(), frozenset({f}), frozenset(), frozenset())
            else:
                step = (frozenset(), frozenset(), frozenset({f}), frozenset())
            later = _product(self.expand(a), [step])
            if _is_prop(b):
                later = _product(later, self.expand(self.neg(b)))
            return _prune(now + later)
        raise LogicError(f"unexpected operator {op.value} in CTL expansion")

    def expand_prestate(self, pre: frozenset) -> list[State]:
        out = [_EMPTY]
        for f in sorted(pre, key=lambda g: self.order.get(g, len(self.order))):
            out = _product(out, self.expand(f))
            if not out:
                break
        return out

    # -- graph -----------------------------------------------------------------

    def prestate(self, pre: frozenset, queue: deque) -> int:
        i = self.pre_index.get(pre)
        if i is None:
            i = len(self.prestates)
            self.pre_index[pre] = i
            self.prestates.append(pre)
            self.pre_states.append([])
            queue.append(i)
        return i

    def build(self) -> int:
        queue: deque[int] = deque()
        root = self.prestate(frozenset({self.phi}), queue)
        while queue:
            p = queue.popleft()
            if self.deadline is not None and time.perf_counter() > self.deadline:
                raise TimeBudget(f"CTL tableau ran out of time at {len(self.states)} states")
            for st in self.expand_prestate(self.prestates[p]):
                s = self.state_index.get(st)
                if s is None:
                    if len(self.states) >= self.cap:
                        raise ResourceLimit(f"CTL tableau exceeded {self.cap} states")
                    s = len(self.states)
                    self.state_index[st] = s
                    self.states.append(st)
                    _, ax, ex, _ = st
                    if ex:
                        succ = [self.prestate(ax | {g}, queue) for g in sorted(ex, key=self._key)]
                    else:
                        succ = [self.prestate(ax, queue)]
                    self.succ.append(succ)
                self.pre_states[p].append(s)
        return root

    def _key(self, f: Formula) -> int:
        return self.order.get(f, len(self.order))

    # -- pruning -----------------------------------------------------------------

    def is_pending(self, s: int, f: Formula) -> bool:
        """``f`` is postponed at ``s``: AU to every successor, EU to a chosen one."""
        _, ax, ex, ful = self.states[s]
        return f not in ful and f in (ax if f.op is Op.AU else ex)

    def pending(self, s: int) -> list[Formula]:
        return [f for f in self.events if self.is_pending(s, f)]

    def ranks(self, live: set[int]) -> dict[tuple[int, Formula], int]:
        """Least number of steps to fulfil each pending eventuality, if any."""
        rank: dict[tuple[int, Formula], int] = {}
        todo = [(s, f) for s in live for f in self.pending(s)]

        def r(t: int, f: Formula) -> int | None:
            if not self.is_pending(t, f):
                return 0
            return rank.get((t, f))

        k = 0
        while todo:
            k += 1
            found = []
            rest = []
            for s, f in todo:
                if self._ready(s, f, live, r, k):
                    found.append((s, f))
                else:
                    rest.append((s, f))
            if not found:
                break
            for key in found:
                rank[key] = k
            todo = rest
        return rank

    def _ready(self, s: int, f: Formula, live: set[int], r, k: int) -> bool:
        def ok(p: int) -> bool:
            for t in self.pre_states[p]:
                if t in live:
                    v = r(t, f)
                    if v is not None and v < k:
                        return True
            return False

        if f.op is Op.AU:
            return all(ok(p) for p in self.succ[s])
        return ok(self._eu_prestate(s, f))

    def _eu_prestate(self, s: int, f: Formula) -> int:
        _, ax, _, _ = self.states[s]
        return self.pre_index[ax | {f}]

    def prune(self) -> tuple[set[int], dict]:
        live = set(range(len(self.states)))
        while True:
            changed = True
            while changed:
                changed = False
                alive_pre = [any(t in live for t in ts) for ts in self.pre_states]
                for s in list(live):
                    if not all(alive_pre[p] for p in self.succ[s]):
                        live.discard(s)
                        changed = True
            rank = self.ranks(live)
            bad = {s for s in live if any((s, f) not in rank for f in self.pending(s))}
            if not bad:
                return live, rank
            live -= bad

    # -- model -------------------------------------------------------------------

    def model(self, root: int, live: set[int], rank: dict) -> tuple[KripkeStructure, int]:
        m = max(len(self.events), 1)

        def r(t: int, f: Formula) -> int:
            if not self.is_pending(t, f):
                return 0
            return rank[(t, f)]

        def pick(p: int, f: Formula | None) -> int:
            cands = [t for t in self.pre_states[p] if t in live]
            if f is None:
                return cands[0]
            return min(cands, key=lambda t: r(t, f))

        start = next(t for t in self.pre_states[root] if t in live)
        index = {(start, 0): 0}
        nodes = [(start, 0)]
        edges: list[tuple[int, int]] = []
        queue = deque([0])
        while queue:
            i = queue.popleft()
            s, focus = nodes[i]
            f = self.events[focus] if self.events else None
            focused = f is not None and f in self.pending(s)
            targets = []
            for p in self.succ[s]:
                follow = None
                if focused and (f.op is Op.AU or p == self._eu_prestate(s, f)):
                    follow = f
                t = pick(p, follow)
                nf = focus if follow is not None and r(t, f) > 0 else (focus + 1) % m
                targets.append((t, nf))
            for key in targets:
                j = index.get(key)
                if j is None:
                    j = len(nodes)
                    index[key] = j
                    nodes.append(key)
                    queue.append(j)
                edges.append((i, j))
        labels = [
            frozenset(l.name for l in self.states[s][0] if l.op is Op.ATOM) for s, _ in nodes
        ]
        return KripkeStructure.build(len(nodes), edges, labels, init=(0,)), 0


def ctl_sat(
    phi: Formula, state_cap: int = DEFAULT_STATE_CAP, time_limit: float | None = None
) -> Verdict:
    """Satisfiability of a CTL query formula, with a replay-checked model."""
    start = time.perf_counter()
    nnf = simplify(to_nnf(phi))
    deadline = None if time_limit is None else start + time_limit
    tab = _Tableau(nnf, state_cap, deadline)
    root = tab.build()
    live, rank = tab.prune()
    stats = {
        "states": len(tab.states),
        "prestates": len(tab.prestates),
        "surviving": len(live),
    }
    if not any(t in live for t in tab.pre_states[root]):
        stats["seconds"] = time.perf_counter() - start
        return Verdict("unsatisfiable", backend="tableau", stats=stats)
    k, s0 = tab.model(root, live, rank)
    stats["seconds"] = time.perf_counter() - start
    if s0 not in eval_ctl_direct(k, phi):
        raise AssertionError("extracted model does not satisfy the formula")
    return Verdict("satisfiable", backend="tableau", model=k, stats=stats)


def ctl_valid(
    phi: Formula, state_cap: int = DEFAULT_STATE_CAP, time_limit: float | None = None
) -> Verdict:
    """Valid iff the negation is unsatisfiable; otherwise a countermodel."""
    v = ctl_sat(Not(phi), state_cap, time_limit)
    if v.outcome == "unsatisfiable":
        return Verdict("valid", backend="tableau", stats=v.stats)
    return Verdict("not_valid", backend="tableau", model=v.model, stats=v.stats)
