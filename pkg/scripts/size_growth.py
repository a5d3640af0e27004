"""Sizes of the two reductions on families of growing claims.

Prints, for each family member, the size of the claim, of the equivalid
formula and of the canonical reduction (``-`` when the node budget is hit).
With ``--fixpoint-family`` it also tabulates the fixpoint substitution of
``mu X1. ... mu Xn. X1 & ... & Xn`` (binders weighted 1) next to the
closed form 2^(k-1)(3n-2)+1 it is often quoted with.
"""

from __future__ import annotations

import argparse
import sys

from ctxlogic.corpus import stress1, stress2
from ctxlogic.errors import BlowupLimit
from ctxlogic.formula import Apply, Atom, Formula, Iff, Logic, Op, Var, conj, size
from ctxlogic.reduction import canonical_reduction, equivalid_formula, fixpoint_substitution


def nested_context(n: int) -> Formula:
    phi: Formula = Atom("q")
    for _ in range(n):
        phi = Apply("c", phi)
    return phi


def row(name: str, phi: Formula, logic: Logic, budget: int) -> str:
    eq = size(equivalid_formula(phi, logic))
    try:
        can = str(size(canonical_reduction(phi, logic, budget=budget)))
    except BlowupLimit:
        can = "-"
    return f"{name:<14} {size(phi):>8} {eq:>10} {can:>12}"


def fixpoint_rows(n_max: int):
    for n in range(1, n_max + 1):
        phi = conj([Var(f"X{i}") for i in range(1, n + 1)])
        for i in range(n, 0, -1):
            phi = Formula(Op.MU, (phi,), f"X{i}")
        sig = fixpoint_substitution(phi)
        got = [size(sig[f"X{k}"], binder_weight=1) for k in range(1, n + 1)]
        quoted = [2 ** (k - 1) * (3 * n - 2) + 1 for k in range(1, n + 1)]
        yield n, size(phi, binder_weight=1), got, quoted


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-max", type=int, default=6)
    ap.add_argument("--budget", type=int, default=10**7)
    ap.add_argument("--fixpoint-family", action="store_true")
    args = ap.parse_args(argv)
    sys.setrecursionlimit(20_000)

    print(f"{'claim':<14} {'|claim|':>8} {'equivalid':>10} {'canonical':>12}")
    for n in range(1, args.n_max + 1):
        print(row(f"c^{n}[q]", nested_context(n), Logic.PROP, args.budget))
    for n in range(1, min(args.n_max, 4) + 1):
        e = stress1(n)
        lhs, rhs = e.formulas()
        print(row(f"stress1-{n}", Iff(lhs, rhs), Logic.LTL, args.budget))
    for n in range(1, min(args.n_max, 4) + 1):
        e = stress2(n)
        lhs, rhs = e.formulas()
        print(row(f"stress2-{n}", Iff(lhs, rhs), Logic.LTL, args.budget))

    if args.fixpoint_family:
        print("\nn  |phi|  fixpoint substitution sizes / quoted closed form")
        for n, p, got, quoted in fixpoint_rows(args.n_max):
            flag = "" if got == quoted else "  (differs)"
            print(f"{n}  {p:>5}  {got} / {quoted}{flag}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
