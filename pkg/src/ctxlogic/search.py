"""Bounded refutation of contextual claims by direct evaluation.

Contexts are enumerated in a fixed order (``true``, ``false``, the hole,
then by size) and every instantiation is evaluated on a pool of small
models at once: all valuations (PROP), all lassos up to a length (LTL), or
all total Kripke structures up to a number of states (CTL, MU).  The pool is
the disjoint union of those models, stored as numpy arrays, so one pass
of fixpoint iteration covers all of them.  A violation found in the pool is
cut back to the single model it came from and replayed with the direct
evaluator of the logic before it is reported.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import TimeBudget
from .formula import (
    FALSE,
    HOLE,
    TRUE,
    And,
    Atom,
    Box,
    Formula,
    Logic,
    Mu,
    Diamond,
    NegAtom,
    Nu,
    Op,
    Or,
    Var,
    atoms,
    context_vars,
    free_vars,
    infer_logic,
    instantiate,
)
from .kripke import KripkeStructure, Lasso, eval_ctl_direct, eval_lasso_direct, mc_eval
from .prop import eval_prop
from .verdict import Verdict


@dataclass(frozen=True)
class SearchBudget:
    """Limits of the search.

    ``max_depth`` bounds the operator nesting of candidate contexts,
    ``max_states`` the size of the models tried, ``max_candidates`` the
    number of instantiations, ``time_s`` the wall time (``None``: no limit),
    and ``max_pool`` the total number of states in the model pool.
    """

    max_depth: int = 3
    max_states: int = 4
    max_candidates: int = 10_000
    time_s: float | None = None
    max_pool: int = 120_000

    def __post_init__(self):
        for name in ("max_depth", "max_states", "max_candidates", "max_pool"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.time_s is not None and self.time_s <= 0:
            raise ValueError("time_s must be positive")


# -- contexts ---------------------------------------------------------------------

_UNARY = {
    Logic.PROP: (),
    Logic.LTL: (Op.X, Op.G, Op.F),
    Logic.CTL: (Op.AX, Op.EX, Op.AG, Op.AF, Op.EG, Op.EF),
    Logic.MU: (Op.DIA, Op.BOX, "always", "reach"),
}
_BINARY = {
    Logic.PROP: (Op.AND, Op.OR),
    Logic.LTL: (Op.AND, Op.OR, Op.U, Op.W),
    Logic.CTL: (Op.AND, Op.OR, Op.AU, Op.AW, Op.EU, Op.EW),
    Logic.MU: (Op.AND, Op.OR),
}


def _unary(op, f: Formula) -> Formula:
    # Parsed fixpoint variables start with an uppercase letter, so "_Z"
    # never captures a variable of the argument plugged into the hole.
    if op == "always":
        return Nu("_Z", And(Box(Var("_Z")), f))
    if op == "reach":
        return Mu("_Z", Or(Diamond(Var("_Z")), f))
    return Formula(op, (f,))


def enumerate_contexts(
    logic: Logic, atom_names: Sequence[str], budget: SearchBudget = SearchBudget()
) -> Iterator[Formula]:
    """Contexts by increasing size, ``true``, ``false`` and the hole first.

    Within one size the order follows the constructor order (leaves, then
    unary operators, then binary ones, children in generation order).
    """
    names = sorted(atom_names)
    leaves = [TRUE, FALSE, HOLE] + [Atom(a) for a in names] + [NegAtom(a) for a in names]
    # by_size[s] lists (formula, depth) pairs of size s
    by_size: list[list[tuple[Formula, int]]] = [[], [(f, 0) for f in leaves]]
    yield from leaves
    size = 1
    while True:
        size += 1
        level: list[tuple[Formula, int]] = []
        for op in _UNARY[logic]:
            for f, d in by_size[size - 1]:
                if d < budget.max_depth:
                    level.append((_unary(op, f), d + 1))
        for op in _BINARY[logic]:
            for left in range(1, size - 1):
                right = size - 1 - left
                for f, d1 in by_size[left]:
                    if d1 >= budget.max_depth:
                        continue
                    for g, d2 in by_size[right]:
                        if d2 < budget.max_depth:
                            level.append((Formula(op, (f, g)), max(d1, d2) + 1))
        by_size.append(level)
        if not level and not by_size[size - 1]:
            return
        for f, _ in level:
            yield f


# -- model pools ------------------------------------------------------------------


class _Pool:
    """Disjoint union of small models with vectorised one-step operations.

    ``origin[s]`` is ``(model index, local state)``; ``models`` holds the
    individual models for replay.
    """

    def __init__(self, succ_lists: list[list[int]], labels: list[frozenset], origin, models):
        self.n = len(succ_lists)
        self.origin = origin
        self.models = models
        counts = np.array([len(s) for s in succ_lists], dtype=np.int64)
        self.indptr = np.concatenate([[0], np.cumsum(counts)])[:-1]
        self.indices = np.array([t for s in succ_lists for t in s], dtype=np.int64)
        self.deterministic = bool(np.all(counts == 1))
        self.label_sets = labels
        self._atoms: dict[str, np.ndarray] = {}

    def atom(self, name: str) -> np.ndarray:
        hit = self._atoms.get(name)
        if hit is None:
            hit = np.fromiter((name in l for l in self.label_sets), dtype=bool, count=self.n)
            self._atoms[name] = hit
        return hit

    def ex(self, x: np.ndarray) -> np.ndarray:
        if self.deterministic:
            return x[self.indices]
        return np.logical_or.reduceat(x[self.indices], self.indptr)

    def ax(self, x: np.ndarray) -> np.ndarray:
        if self.deterministic:
            return x[self.indices]
        return np.logical_and.reduceat(x[self.indices], self.indptr)


def _lasso_pool(atom_names: Sequence[str], budget: SearchBudget) -> _Pool:
    names = sorted(atom_names)
    letters = [
        frozenset(a for a, bit in zip(names, bits) if bit)
        for bits in itertools.product((0, 1), repeat=len(names))
    ]
    succ: list[list[int]] = []
    labels: list[frozenset] = []
    origin: list[tuple[int, int]] = []
    models: list[Lasso] = []
    for total in range(1, budget.max_states + 1):
        for stem_len in range(total):
            for word in itertools.product(letters, repeat=total):
                if len(succ) + total > budget.max_pool:
                    return _Pool(succ, labels, origin, models)
                lasso = Lasso(tuple(word[:stem_len]), tuple(word[stem_len:]))
                base = len(succ)
                for i in range(total):
                    succ.append([base + lasso.next(i)])
                    labels.append(lasso.label(i))
                    origin.append((len(models), i))
                models.append(lasso)
    return _Pool(succ, labels, origin, models)


def _kripke_pool(atom_names: Sequence[str], budget: SearchBudget) -> _Pool:
    names = sorted(atom_names)
    letters = [
        frozenset(a for a, bit in zip(names, bits) if bit)
        for bits in itertools.product((0, 1), repeat=len(names))
    ]
    succ: list[list[int]] = []
    labels: list[frozenset] = []
    origin: list[tuple[int, int]] = []
    models: list[KripkeStructure] = []
    for n in range(1, budget.max_states + 1):
        nonempty = [s for s in range(1, 1 << n)]
        for rows in itertools.product(nonempty, repeat=n):
            targets = [tuple(t for t in range(n) if r >> t & 1) for r in rows]
            for lab in itertools.product(letters, repeat=n):
                if len(succ) + n > budget.max_pool:
                    return _Pool(succ, labels, origin, models)
                k = KripkeStructure(tuple(targets), frozenset({0}), tuple(lab))
                base = len(succ)
                for s in range(n):
                    succ.append([base + t for t in targets[s]])
                    labels.append(lab[s])
                    origin.append((len(models), s))
                models.append(k)
    return _Pool(succ, labels, origin, models)


class _PoolEvaluator:
    def __init__(self, pool: _Pool):
        self.pool = pool
        self.true = np.ones(pool.n, dtype=bool)
        self.false = np.zeros(pool.n, dtype=bool)

    def eval(self, phi: Formula) -> np.ndarray:
        memo: dict[Formula, np.ndarray] = {}
        return self._eval(phi, {}, memo)

    def _lfp(self, step) -> np.ndarray:
        z = self.false
        while True:
            nz = step(z)
            if np.array_equal(nz, z):
                return z
            z = nz

    def _gfp(self, step) -> np.ndarray:
        z = self.true
        while True:
            nz = step(z)
            if np.array_equal(nz, z):
                return z
            z = nz

    def _eval(self, node: Formula, env: dict, memo: dict) -> np.ndarray:
        closed = not env or not (free_vars(node) & env.keys())
        if closed:
            hit = memo.get(node)
            if hit is not None:
                return hit
        out = self._step(node, env, memo)
        if closed:
            memo[node] = out
        return out

    def _step(self, node: Formula, env: dict, memo: dict) -> np.ndarray:
        p = self.pool
        op = node.op
        ev = lambda f: self._eval(f, env, memo)  # noqa: E731
        if op is Op.TRUE:
            return self.true
        if op is Op.FALSE:
            return self.false
        if op is Op.ATOM:
            return p.atom(node.name)
        if op is Op.NATOM:
            return ~p.atom(node.name)
        if op is Op.VAR:
            return env[node.name]
        if op is Op.NOT:
            return ~ev(node.args[0])
        if op in (Op.AND, Op.OR, Op.IMPLIES, Op.IFF):
            a, b = ev(node.args[0]), ev(node.args[1])
            if op is Op.AND:
                return a & b
            if op is Op.OR:
                return a | b
            if op is Op.IMPLIES:
                return ~a | b
            return a == b
        if op in (Op.X, Op.EX, Op.DIA):
            return p.ex(ev(node.args[0]))
        if op in (Op.AX, Op.BOX):
            return p.ax(ev(node.args[0]))
        if op in (Op.MU, Op.NU):
            x = node.name
            body = node.args[0]

            def step(z):
                inner = dict(env)
                inner[x] = z
                return self._eval(body, inner, memo)

            return self._lfp(step) if op is Op.MU else self._gfp(step)
        # path operators; on the deterministic lasso pool E and A coincide
        if op in (Op.G, Op.AG, Op.EG):
            a = ev(node.args[0])
            nxt = p.ex if op is not Op.AG else p.ax
            return self._gfp(lambda z: a & nxt(z))
        if op in (Op.F, Op.AF, Op.EF):
            b = ev(node.args[0])
            nxt = p.ax if op is Op.AF else p.ex
            return self._lfp(lambda z: b | nxt(z))
        if op in (Op.U, Op.W, Op.EU, Op.EW, Op.AU, Op.AW):
            a, b = ev(node.args[0]), ev(node.args[1])
            nxt = p.ax if op in (Op.AU, Op.AW) else p.ex
            fix = self._lfp if op in (Op.U, Op.EU, Op.AU) else self._gfp
            return fix(lambda z: b | (a & nxt(z)))
        raise ValueError(f"cannot evaluate operator {op.value}")


# -- refutation -------------------------------------------------------------------


def _instantiations(
    names: list[str], contexts: Iterator[Formula], limit: int
) -> Iterator[dict[str, Formula]]:
    """Assignments ranked by the largest context index used, then lexicographically."""
    if not names:
        yield {}
        return
    seen: list[Formula] = []
    produced = 0
    for ctx in contexts:
        seen.append(ctx)
        top = len(seen) - 1
        k = len(names)
        # tuples whose maximum index is exactly ``top``
        for combo in itertools.product(range(top + 1), repeat=k):
            if max(combo) != top:
                continue
            yield {c: seen[i] for c, i in zip(names, combo)}
            produced += 1
            if produced >= limit:
                return


def _rotate(lasso: Lasso, i: int) -> Lasso:
    """The lasso read from position ``i``."""
    if i < len(lasso.stem):
        return Lasso(lasso.stem[i:], lasso.cycle)
    j = i - len(lasso.stem)
    return Lasso((), lasso.cycle[j:] + lasso.cycle[:j])


def _replay(logic: Logic, model, phi: Formula) -> bool:
    """True when ``model`` falsifies ``phi`` under the direct evaluator."""
    if logic is Logic.PROP:
        return not eval_prop(phi, model)
    if logic is Logic.LTL:
        return not eval_lasso_direct(model, phi)
    if logic is Logic.CTL:
        return not model.init <= eval_ctl_direct(model, phi)
    return not model.init <= mc_eval(model, None, phi)


def _valuations(atom_names: Sequence[str]) -> list[dict[str, bool]]:
    names = sorted(atom_names)
    return [dict(zip(names, bits)) for bits in itertools.product((False, True), repeat=len(names))]


def refute(
    claim: Formula,
    logic: Logic | None = None,
    budget: SearchBudget = SearchBudget(),
) -> Verdict:
    """Look for an instantiation and a small model falsifying ``claim``.

    ``claim`` is a contextual query whose validity is asserted.  Returns a
    ``refuted`` verdict carrying the instantiation and the replayed model,
    or ``unknown`` once the candidates are exhausted; exhaustion says
    nothing about validity.
    """
    logic = infer_logic(claim) if logic is None else logic
    start = time.perf_counter()
    names = sorted(atoms(claim))
    if logic is Logic.PROP:
        vals = _valuations(names or ["_"])
        pool = _Pool([[i] for i in range(len(vals))], [frozenset(a for a, v in b.items() if v) for b in vals],
                     [(i, 0) for i in range(len(vals))], vals)
    elif logic is Logic.LTL:
        pool = _lasso_pool(names, budget)
    else:
        pool = _kripke_pool(names, budget)
    evaluator = _PoolEvaluator(pool)
    variables = sorted(context_vars(claim))
    contexts = enumerate_contexts(logic, names, budget)
    tried = 0
    for sigma in _instantiations(variables, contexts, budget.max_candidates):
        if budget.time_s is not None and time.perf_counter() - start > budget.time_s:
            raise TimeBudget(f"refutation search exceeded {budget.time_s} s after {tried} candidates")
        tried += 1
        phi = instantiate(sigma, claim) if variables else claim
        holds = evaluator.eval(phi)
        if holds.all():
            if not variables:
                break
            continue
        s = int(np.flatnonzero(~holds)[0])
        index, local = pool.origin[s]
        model = pool.models[index]
        if logic is Logic.LTL:
            model = _rotate(model, local)
        elif logic in (Logic.CTL, Logic.MU):
            model = model.with_init({local})
        if not _replay(logic, model, phi):
            raise AssertionError("pool evaluation disagrees with the direct evaluator")
        return Verdict(
            "refuted",
            method="search",
            backend="enumeration",
            model=model,
            instantiation=sigma,
            stats={"candidates": tried, "pool_states": pool.n, "seconds": time.perf_counter() - start},
        )
    return Verdict(
        "unknown",
        method="search",
        backend="enumeration",
        stats={"candidates": tried, "pool_states": pool.n, "seconds": time.perf_counter() - start},
        detail="search exhausted without a counterexample (not a proof of validity)",
    )
