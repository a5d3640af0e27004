"""Independent oracles used by the acceptance and property tests."""

from __future__ import annotations

import itertools

import numpy as np

from ctxlogic.formula import (
    FALSE,
    HOLE,
    TRUE,
    And,
    Atom,
    Formula,
    Logic,
    NegAtom,
    Op,
    atoms,
    context_vars,
    disj,
    instantiate,
)
from ctxlogic.kripke import KripkeStructure, Lasso, eval_ctl_direct, eval_lasso_direct, mc_eval
from ctxlogic.reduction import reduce


def truth_table(phi: Formula, names: list[str]) -> np.ndarray:
    """Value of a propositional formula under all ``2**len(names)`` valuations.

    Row ``i`` assigns ``names[j]`` the ``j``-th bit of ``i``.
    """
    n = len(names)
    rows = np.arange(2**n)
    cols = {a: ((rows >> j) & 1).astype(bool) for j, a in enumerate(names)}
    memo: dict[Formula, np.ndarray] = {}

    def go(f: Formula) -> np.ndarray:
        hit = memo.get(f)
        if hit is not None:
            return hit
        op = f.op
        if op is Op.TRUE:
            out = np.ones(2**n, bool)
        elif op is Op.FALSE:
            out = np.zeros(2**n, bool)
        elif op is Op.ATOM:
            out = cols[f.name]
        elif op is Op.NATOM:
            out = ~cols[f.name]
        elif op is Op.NOT:
            out = ~go(f.args[0])
        elif op is Op.AND:
            out = go(f.args[0]) & go(f.args[1])
        elif op is Op.OR:
            out = go(f.args[0]) | go(f.args[1])
        elif op is Op.IMPLIES:
            out = ~go(f.args[0]) | go(f.args[1])
        elif op is Op.IFF:
            out = go(f.args[0]) == go(f.args[1])
        else:
            raise ValueError(f"not propositional: {op}")
        memo[f] = out
        return out

    return go(phi)


def brute_valid(phi: Formula) -> bool:
    return bool(truth_table(phi, sorted(atoms(phi))).all())


def brute_sat(phi: Formula) -> bool:
    return bool(truth_table(phi, sorted(atoms(phi))).any())


def cnf_brute_sat(clauses: list[list[int]], nvars: int) -> bool:
    rows = np.arange(2**nvars)
    ok = np.ones(2**nvars, bool)
    for cl in clauses:
        sat = np.zeros(2**nvars, bool)
        for lit in cl:
            bit = ((rows >> (abs(lit) - 1)) & 1).astype(bool)
            sat |= bit if lit > 0 else ~bit
        ok &= sat
    return bool(ok.any())


def semantic_prop_contexts(names: list[str]) -> list[Formula]:
    """One representative of every monotone one-hole propositional context.

    Over ``n`` valuations of ``names`` such a context behaves, per valuation,
    as ``false``, ``true`` or the hole, which gives ``3**n`` contexts.
    """
    vals = list(itertools.product((False, True), repeat=len(names)))
    out = []
    for choice in itertools.product((FALSE, TRUE, HOLE), repeat=len(vals)):
        parts = []
        for v, behaviour in zip(vals, choice):
            if behaviour is FALSE:
                continue
            minterm = behaviour
            for a, bit in zip(names, v):
                minterm = And(Atom(a) if bit else NegAtom(a), minterm)
            parts.append(minterm)
        out.append(disj(parts))
    return out


def prop_contextual_valid_by_enumeration(claim: Formula) -> bool:
    """Contextual validity of a PROP claim by trying every semantic context."""
    names = sorted(atoms(claim))
    ctxs = semantic_prop_contexts(names)
    cvars = sorted(context_vars(claim))
    for combo in itertools.product(ctxs, repeat=len(cvars)):
        if not brute_valid(instantiate(dict(zip(cvars, combo)), claim)):
            return False
    return True


def holds_in(model, phi: Formula, logic: Logic) -> bool:
    """Truth of an ordinary formula in a counterexample model."""
    if logic is Logic.PROP:
        names = sorted(atoms(phi))
        return bool(truth_table(phi, names)[_row(model, names)])
    if logic is Logic.LTL:
        assert isinstance(model, Lasso)
        return eval_lasso_direct(model, phi)
    assert isinstance(model, KripkeStructure)
    states = eval_ctl_direct(model, phi) if logic is Logic.CTL else mc_eval(model, None, phi)
    return model.init <= states


def _row(valuation: dict, names: list[str]) -> int:
    return sum(1 << j for j, a in enumerate(names) if valuation.get(a, False))


def replays(query: Formula, logic: Logic, method: str, model) -> bool:
    """A reported counterexample falsifies the ordinary formula that was checked."""
    ordinary = reduce(query, logic, method=method)
    return not holds_in(model, ordinary, logic)
