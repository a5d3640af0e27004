"""Finite Kripke structures, lassos and the evaluators defined over them.

``mc_eval`` is the fixpoint model checker for the mu-calculus; the direct
CTL labeling algorithm and the positional lasso evaluator for LTL are
independent implementations used to cross-check the translations into the
mu-calculus.  State sets are Python ints used as bitsets internally and
``frozenset`` in the public results.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Iterator, Mapping, Sequence

from .errors import ModelFormatError, UnboundVariable
from .formula import BINDERS, Formula, Op, binders, free_vars, subformulas

Valuation = Mapping[str, frozenset[int]]


@dataclass(frozen=True)
class KripkeStructure:
    """States are ``0 .. n-1``; ``succ[s]`` lists the successors of ``s``."""

    succ: tuple[tuple[int, ...], ...]
    init: frozenset[int]
    labels: tuple[frozenset[str], ...]

    def __post_init__(self):
        n = len(self.succ)
        if len(self.labels) != n:
            raise ValueError("one label set per state is required")
        for s, targets in enumerate(self.succ):
            if not targets:
                raise ValueError(f"state {s} has no successor (transition relation must be total)")
            if any(not 0 <= t < n for t in targets):
                raise ValueError(f"state {s} has a successor out of range")
        if any(not 0 <= s < n for s in self.init):
            raise ValueError("initial state out of range")

    @classmethod
    def build(
        cls,
        n: int,
        edges: Sequence[tuple[int, int]],
        labels: Mapping[int, Sequence[str]] | Sequence[Sequence[str]],
        init: Sequence[int] = (0,),
    ) -> KripkeStructure:
        succ: list[list[int]] = [[] for _ in range(n)]
        for a, b in edges:
            if b not in succ[a]:
                succ[a].append(b)
        if isinstance(labels, Mapping):
            lab = [frozenset(labels.get(s, ())) for s in range(n)]
        else:
            lab = [frozenset(x) for x in labels]
        return cls(tuple(tuple(sorted(t)) for t in succ), frozenset(init), tuple(lab))

    @property
    def n(self) -> int:
        return len(self.succ)

    @property
    def states(self) -> range:
        return range(len(self.succ))

    def atoms(self) -> set[str]:
        return set().union(*self.labels) if self.labels else set()

    def with_labels(self, extra: Mapping[str, frozenset[int]]) -> KripkeStructure:
        """Extension of the structure where atom ``p`` holds exactly on ``extra[p]``."""
        labels = []
        for s, lab in enumerate(self.labels):
            lab = {p for p in lab if p not in extra}
            lab |= {p for p, states in extra.items() if s in states}
            labels.append(frozenset(lab))
        return KripkeStructure(self.succ, self.init, tuple(labels))

    def with_init(self, init) -> KripkeStructure:
        return KripkeStructure(self.succ, frozenset(init), self.labels)


@dataclass(frozen=True)
class Lasso:
    """A word ``stem . cycle^omega`` given by one label set per position."""

    stem: tuple[frozenset[str], ...]
    cycle: tuple[frozenset[str], ...]

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("a lasso needs a nonempty cycle")

    @classmethod
    def of(cls, stem: Sequence[Sequence[str]], cycle: Sequence[Sequence[str]]) -> Lasso:
        return cls(tuple(frozenset(x) for x in stem), tuple(frozenset(x) for x in cycle))

    def __len__(self) -> int:
        return len(self.stem) + len(self.cycle)

    def label(self, i: int) -> frozenset[str]:
        return self.stem[i] if i < len(self.stem) else self.cycle[i - len(self.stem)]

    def next(self, i: int) -> int:
        return i + 1 if i + 1 < len(self) else len(self.stem)

    def to_kripke(self) -> KripkeStructure:
        n = len(self)
        return KripkeStructure(
            tuple((self.next(i),) for i in range(n)),
            frozenset({0}),
            tuple(self.label(i) for i in range(n)),
        )

    def atoms(self) -> set[str]:
        return set().union(*self.stem, *self.cycle)


# -- mu-calculus model checking -------------------------------------------------


class _Bits:
    def __init__(self, k: KripkeStructure):
        self.n = k.n
        self.full = (1 << k.n) - 1
        self.succ_mask = [sum(1 << t for t in ts) for ts in k.succ]
        self.atom_mask: dict[str, int] = {}
        for s, lab in enumerate(k.labels):
            for p in lab:
                self.atom_mask[p] = self.atom_mask.get(p, 0) | (1 << s)

    def pre_exists(self, x: int) -> int:
        out = 0
        for s, m in enumerate(self.succ_mask):
            if m & x:
                out |= 1 << s
        return out

    def pre_forall(self, x: int) -> int:
        out = 0
        for s, m in enumerate(self.succ_mask):
            if m & ~x == 0:
                out |= 1 << s
        return out


def _to_set(mask: int) -> frozenset[int]:
    out = []
    s = 0
    while mask:
        if mask & 1:
            out.append(s)
        mask >>= 1
        s += 1
    return frozenset(out)


def _to_mask(states) -> int:
    m = 0
    for s in states:
        m |= 1 << s
    return m


class _MuEvaluator:
    def __init__(self, k: KripkeStructure):
        self.k = k
        self.bits = _Bits(k)
        self.closed: dict[Formula, int] = {}
        self.fv: dict[Formula, bool] = {}

    def is_closed(self, node: Formula) -> bool:
        hit = self.fv.get(node)
        if hit is None:
            hit = not free_vars(node)
            self.fv[node] = hit
        return hit

    def eval(self, node: Formula, env: dict[str, int]) -> int:
        closed = self.is_closed(node)
        if closed:
            hit = self.closed.get(node)
            if hit is not None:
                return hit
        out = self._eval(node, env)
        if closed:
            self.closed[node] = out
        return out

    def _eval(self, node: Formula, env: dict[str, int]) -> int:
        b = self.bits
        op = node.op
        if op is Op.TRUE:
            return b.full
        if op is Op.FALSE:
            return 0
        if op is Op.ATOM:
            return b.atom_mask.get(node.name, 0)
        if op is Op.NATOM:
            return b.full & ~b.atom_mask.get(node.name, 0)
        if op is Op.VAR:
            if node.name not in env:
                raise UnboundVariable(f"variable {node.name} has no value")
            return env[node.name]
        if op is Op.NOT:
            return b.full & ~self.eval(node.args[0], env)
        if op is Op.AND:
            return self.eval(node.args[0], env) & self.eval(node.args[1], env)
        if op is Op.OR:
            return self.eval(node.args[0], env) | self.eval(node.args[1], env)
        if op is Op.IMPLIES:
            return (b.full & ~self.eval(node.args[0], env)) | self.eval(node.args[1], env)
        if op is Op.IFF:
            l, r = self.eval(node.args[0], env), self.eval(node.args[1], env)
            return b.full & ~(l ^ r)
        if op is Op.DIA:
            return b.pre_exists(self.eval(node.args[0], env))
        if op is Op.BOX:
            return b.pre_forall(self.eval(node.args[0], env))
        if op in BINDERS:
            x = b.full if op is Op.NU else 0
            while True:
                inner = dict(env)
                inner[node.name] = x
                y = self.eval(node.args[0], inner)
                if y == x:
                    return x
                x = y
        raise ValueError(f"mc_eval cannot evaluate operator {op.value}; translate it first")


def mc_eval(k: KripkeStructure, eta: Valuation | None, phi: Formula) -> frozenset[int]:
    """States of ``k`` satisfying the mu-calculus formula ``phi`` under ``eta``."""
    env = {x: _to_mask(v) for x, v in (eta or {}).items()}
    return _to_set(_MuEvaluator(k).eval(phi, env))


def satisfies(k: KripkeStructure, phi: Formula) -> bool:
    if not k.init:
        raise ModelFormatError("satisfaction needs at least one initial state")
    return k.init <= evaluate(k, phi)


def fixpoint_valuation(
    k: KripkeStructure, phi: Formula, order: Sequence[str] | None = None
) -> dict[str, frozenset[int]]:
    """The valuation giving every bound variable the value of its binder.

    Binders are handled in ``order`` (default: preorder), which must list
    every enclosing binder before the binders it contains.
    """
    bmap = {b.name: b for b in binders(phi)}
    names = list(bmap) if order is None else list(order)
    if set(names) != set(bmap):
        raise ValueError("order must list every bound variable exactly once")
    ev = _MuEvaluator(k)
    env: dict[str, int] = {}
    for x in names:
        b = bmap[x]
        missing = free_vars(b) - env.keys()
        if missing:
            raise ValueError(f"binder of {x} depends on {sorted(missing)} which come later")
        env[x] = ev.eval(b, env)
    return {x: _to_set(m) for x, m in env.items()}


# -- translations into the mu-calculus ---------------------------------------------


class _Translator:
    def __init__(self, lasso: bool):
        self.lasso = lasso
        self.memo: dict[Formula, Formula] = {}
        self.counter = 0

    def fresh(self) -> str:
        name = "X" if self.counter == 0 else f"X{self.counter}"
        self.counter += 1
        return name

    def fix(self, op: Op, step: Op, f1: Formula | None, f2: Formula | None) -> Formula:
        """``alpha X. (step X and f1) or f2`` with the trivial operand dropped."""
        x = self.fresh()
        core = Formula(step, (Formula(Op.VAR, (), x),))
        if f1 is not None:
            core = Formula(Op.AND, (core, f1))
        if f2 is not None:
            core = Formula(Op.OR, (core, f2))
        return Formula(op, (core,), x)

    def go(self, node: Formula) -> Formula:
        hit = self.memo.get(node)
        if hit is not None:
            return hit
        out = self._go(node)
        self.memo[node] = out
        return out

    def _go(self, node: Formula) -> Formula:
        op = node.op
        t = self.go
        if op in (Op.X, Op.AX):
            return Formula(Op.BOX, (t(node.args[0]),))
        if op is Op.EX:
            return Formula(Op.DIA, (t(node.args[0]),))
        if op in (Op.U, Op.AU):
            return self.fix(Op.MU, Op.BOX, t(node.args[0]), t(node.args[1]))
        if op in (Op.W, Op.AW):
            return self.fix(Op.NU, Op.BOX, t(node.args[0]), t(node.args[1]))
        if op is Op.EU:
            return self.fix(Op.MU, Op.DIA, t(node.args[0]), t(node.args[1]))
        if op is Op.EW:
            return self.fix(Op.NU, Op.DIA, t(node.args[0]), t(node.args[1]))
        if op in (Op.G, Op.AG):
            return self.fix(Op.NU, Op.BOX, t(node.args[0]), None)
        if op in (Op.F, Op.AF):
            return self.fix(Op.MU, Op.BOX, None, t(node.args[0]))
        if op is Op.EG:
            return self.fix(Op.NU, Op.DIA, t(node.args[0]), None)
        if op is Op.EF:
            return self.fix(Op.MU, Op.DIA, None, t(node.args[0]))
        if not node.args:
            return node
        return node.with_args(tuple(t(a) for a in node.args))


def ctl_to_mu(phi: Formula) -> Formula:
    """Syntax-directed CTL to mu-calculus translation (contexts and holes kept)."""
    return _Translator(lasso=False).go(phi)


def ltl_to_mu_lasso(phi: Formula) -> Formula:
    """Read X, U, W, G, F as AX, AU, AW, AG, AF; correct on lassos only."""
    return _Translator(lasso=True).go(phi)


# -- direct CTL labeling ----------------------------------------------------------


class _CtlLabeler:
    """Textbook labeling: backward search for EU, SCC analysis for EG."""

    def __init__(self, k: KripkeStructure):
        self.k = k
        self.n = k.n
        self.pred: list[list[int]] = [[] for _ in range(k.n)]
        for s, ts in enumerate(k.succ):
            for t in ts:
                self.pred[t].append(s)
        self.memo: dict[Formula, frozenset[int]] = {}
        self.all = frozenset(range(k.n))

    def ex(self, x: frozenset[int]) -> frozenset[int]:
        return frozenset(s for s in range(self.n) if any(t in x for t in self.k.succ[s]))

    def eu(self, a: frozenset[int], b: frozenset[int]) -> frozenset[int]:
        result = set(b)
        stack = list(b)
        while stack:
            t = stack.pop()
            for s in self.pred[t]:
                if s not in result and s in a:
                    result.add(s)
                    stack.append(s)
        return frozenset(result)

    def eg(self, a: frozenset[int]) -> frozenset[int]:
        # States in a from which a path inside a reaches a nontrivial SCC of
        # the subgraph restricted to a.
        sccs = _tarjan([s for s in range(self.n) if s in a], lambda s: [t for t in self.k.succ[s] if t in a])
        core = set()
        for comp in sccs:
            if len(comp) > 1 or comp[0] in self.k.succ[comp[0]]:
                core.update(comp)
        return self.eu(a, frozenset(core))

    def eval(self, node: Formula) -> frozenset[int]:
        hit = self.memo.get(node)
        if hit is None:
            hit = self._eval(node)
            self.memo[node] = hit
        return hit

    def _eval(self, node: Formula) -> frozenset[int]:
        op = node.op
        e = self.eval
        full = self.all
        if op is Op.TRUE:
            return full
        if op is Op.FALSE:
            return frozenset()
        if op is Op.ATOM:
            return frozenset(s for s in range(self.n) if node.name in self.k.labels[s])
        if op is Op.NATOM:
            return frozenset(s for s in range(self.n) if node.name not in self.k.labels[s])
        if op is Op.NOT:
            return full - e(node.args[0])
        if op is Op.AND:
            return e(node.args[0]) & e(node.args[1])
        if op is Op.OR:
            return e(node.args[0]) | e(node.args[1])
        if op is Op.IMPLIES:
            return (full - e(node.args[0])) | e(node.args[1])
        if op is Op.IFF:
            a, b = e(node.args[0]), e(node.args[1])
            return full - (a ^ b)
        if op is Op.EX:
            return self.ex(e(node.args[0]))
        if op is Op.AX:
            return full - self.ex(full - e(node.args[0]))
        if op is Op.EF:
            return self.eu(full, e(node.args[0]))
        if op is Op.AG:
            return full - self.eu(full, full - e(node.args[0]))
        if op is Op.EG:
            return self.eg(e(node.args[0]))
        if op is Op.AF:
            return full - self.eg(full - e(node.args[0]))
        if op is Op.EU:
            return self.eu(e(node.args[0]), e(node.args[1]))
        if op is Op.EW:
            a, b = e(node.args[0]), e(node.args[1])
            return self.eu(a, b) | self.eg(a)
        if op in (Op.AU, Op.AW):
            a, b = e(node.args[0]), e(node.args[1])
            na, nb = full - a, full - b
            bad = self.eu(nb, na & nb)
            if op is Op.AW:
                return full - bad
            return full - (bad | self.eg(nb))
        raise ValueError(f"not a CTL operator: {op.value}")


def _tarjan(nodes: Sequence[int], succ) -> list[list[int]]:
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in nodes:
        if root in index:
            continue
        work = [(root, iter(succ(root)))]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            v, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(succ(w))))
                    advanced = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
    return out


def eval_ctl_direct(k: KripkeStructure, phi: Formula) -> frozenset[int]:
    return _CtlLabeler(k).eval(phi)


# -- direct lasso evaluation for LTL -----------------------------------------------


class _LassoEvaluator:
    def __init__(self, lasso: Lasso):
        self.l = lasso
        self.memo: dict[tuple[Formula, int], bool] = {}

    def canon(self, i: int) -> int:
        return i

    def path(self, i: int) -> Iterator[int]:
        """Positions from ``i`` onwards until the first repetition."""
        seen = set()
        while i not in seen:
            seen.add(i)
            yield i
            i = self.l.next(i)

    def at(self, node: Formula, i: int) -> bool:
        key = (node, i)
        hit = self.memo.get(key)
        if hit is None:
            hit = self._at(node, i)
            self.memo[key] = hit
        return hit

    def _at(self, node: Formula, i: int) -> bool:
        op = node.op
        a = node.args
        if op is Op.TRUE:
            return True
        if op is Op.FALSE:
            return False
        if op is Op.ATOM:
            return node.name in self.l.label(i)
        if op is Op.NATOM:
            return node.name not in self.l.label(i)
        if op is Op.NOT:
            return not self.at(a[0], i)
        if op is Op.AND:
            return self.at(a[0], i) and self.at(a[1], i)
        if op is Op.OR:
            return self.at(a[0], i) or self.at(a[1], i)
        if op is Op.IMPLIES:
            return (not self.at(a[0], i)) or self.at(a[1], i)
        if op is Op.IFF:
            return self.at(a[0], i) == self.at(a[1], i)
        if op is Op.X:
            return self.at(a[0], self.l.next(i))
        if op is Op.G:
            return all(self.at(a[0], j) for j in self.path(i))
        if op is Op.F:
            return any(self.at(a[0], j) for j in self.path(i))
        if op in (Op.U, Op.W):
            for j in self.path(i):
                if self.at(a[1], j):
                    return True
                if not self.at(a[0], j):
                    return False
            return op is Op.W
        raise ValueError(f"not an LTL operator: {op.value}")


def eval_lasso_direct(lasso: Lasso, phi: Formula, position: int = 0) -> bool:
    return _LassoEvaluator(lasso).at(phi, position)


def lasso_positions(lasso: Lasso, phi: Formula) -> list[bool]:
    ev = _LassoEvaluator(lasso)
    return [ev.at(phi, i) for i in range(len(lasso))]


# -- dispatch -----------------------------------------------------------------------


def evaluate(k: KripkeStructure, phi: Formula) -> frozenset[int]:
    """States satisfying a closed formula of any branching logic (CTL or MU)."""
    ops = {n.op for n in subformulas(phi)}
    if ops & {Op.X, Op.U, Op.W, Op.G, Op.F}:
        raise ValueError("LTL formulas are evaluated on lassos, not on states")
    if ops & {Op.DIA, Op.BOX, Op.MU, Op.NU, Op.VAR}:
        return mc_eval(k, {}, phi)
    return eval_ctl_direct(k, phi)


# -- enumeration and sampling (used by tests and the refutation search) -----------


def all_lassos(atoms: Sequence[str], max_len: int) -> Iterator[Lasso]:
    """Every lasso with ``stem + cycle <= max_len`` positions over ``atoms``."""
    atoms = sorted(atoms)
    letters = [
        frozenset(a for a, bit in zip(atoms, bits) if bit)
        for bits in itertools.product((0, 1), repeat=len(atoms))
    ]
    for total in range(1, max_len + 1):
        for stem_len in range(total):
            for word in itertools.product(letters, repeat=total):
                yield Lasso(tuple(word[:stem_len]), tuple(word[stem_len:]))


def random_kripke(
    rng: random.Random, n: int, atoms: Sequence[str], *, density: float = 0.4
) -> KripkeStructure:
    succ = []
    for _ in range(n):
        ts = [t for t in range(n) if rng.random() < density]
        if not ts:
            ts = [rng.randrange(n)]
        succ.append(tuple(ts))
    labels = tuple(frozenset(a for a in atoms if rng.random() < 0.5) for _ in range(n))
    return KripkeStructure(tuple(succ), frozenset({0}), labels)


def random_lasso(rng: random.Random, max_len: int, atoms: Sequence[str]) -> Lasso:
    total = rng.randint(1, max_len)
    stem_len = rng.randrange(total)
    word = [frozenset(a for a in atoms if rng.random() < 0.5) for _ in range(total)]
    return Lasso(tuple(word[:stem_len]), tuple(word[stem_len:]))


# -- text format ----------------------------------------------------------------------


def parse_model(text: str) -> KripkeStructure | Lasso:
    """Read the ``states/init/edge/label`` format; ``stem``/``cycle`` make a lasso."""
    n = None
    init: list[int] = []
    edges: list[tuple[int, int]] = []
    labels: dict[int, set[str]] = {}
    stem: list[int] | None = None
    cycle: list[int] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *rest = line.split()

        def ints(values, lineno=lineno):
            try:
                out = [int(v) for v in values]
            except ValueError:
                raise ModelFormatError(f"expected state numbers, got {' '.join(values)!r}", lineno) from None
            if n is None:
                raise ModelFormatError("'states N' must come first", lineno)
            for v in out:
                if not 0 <= v < n:
                    raise ModelFormatError(f"state {v} out of range 0..{n - 1}", lineno)
            return out

        if head == "states":
            if len(rest) != 1 or not rest[0].isdigit() or int(rest[0]) < 1:
                raise ModelFormatError("expected 'states N' with N >= 1", lineno)
            n = int(rest[0])
        elif head == "init":
            init.extend(ints(rest))
        elif head == "edge":
            if len(rest) != 2:
                raise ModelFormatError("expected 'edge a b'", lineno)
            a, b = ints(rest)
            edges.append((a, b))
        elif head == "label":
            if not rest:
                raise ModelFormatError("expected 'label s p q ...'", lineno)
            (s,) = ints(rest[:1])
            labels.setdefault(s, set()).update(rest[1:])
        elif head == "stem":
            stem = ints(rest)
        elif head == "cycle":
            cycle = ints(rest)
            if not cycle:
                raise ModelFormatError("cycle must be nonempty", lineno)
        else:
            raise ModelFormatError(f"unknown directive {head!r}", lineno)
    if n is None:
        raise ModelFormatError("missing 'states N'")
    if cycle is not None or stem is not None:
        if cycle is None:
            raise ModelFormatError("lasso without 'cycle'")
        return Lasso(
            tuple(frozenset(labels.get(s, ())) for s in stem or []),
            tuple(frozenset(labels.get(s, ())) for s in cycle),
        )
    succ: list[list[int]] = [[] for _ in range(n)]
    for a, b in edges:
        if b not in succ[a]:
            succ[a].append(b)
    for s, ts in enumerate(succ):
        if not ts:
            raise ModelFormatError(f"state {s} has no outgoing edge")
    return KripkeStructure(
        tuple(tuple(sorted(t)) for t in succ),
        frozenset(init or [0]),
        tuple(frozenset(labels.get(s, ())) for s in range(n)),
    )


def format_model(model: KripkeStructure | Lasso) -> str:
    lines = []
    if isinstance(model, Lasso):
        n = len(model)
        lines.append(f"states {n}")
        for i in range(n):
            if model.label(i):
                lines.append(f"label {i} " + " ".join(sorted(model.label(i))))
        lines.append("stem" + "".join(f" {i}" for i in range(len(model.stem))))
        lines.append("cycle" + "".join(f" {i}" for i in range(len(model.stem), n)))
        return "\n".join(lines) + "\n"
    lines.append(f"states {model.n}")
    lines.append("init " + " ".join(str(s) for s in sorted(model.init)))
    for s, ts in enumerate(model.succ):
        for t in ts:
            lines.append(f"edge {s} {t}")
    for s, lab in enumerate(model.labels):
        if lab:
            lines.append(f"label {s} " + " ".join(sorted(lab)))
    return "\n".join(lines) + "\n"
