"""Reductions from contextual validity to ordinary validity.

Two constructions are offered for every logic:

* the *canonical instantiation*: one specific context per context variable
  such that the contextual formula is valid iff its instance is; the
  instance can be exponentially large for nested contexts;
* the *equivalid formula*: context subformulas become fresh atoms and a
  premise constrains those atoms to behave like a monotone context; its size
  is polynomial.

Fresh atoms are ``_ctx_<c>_<k>`` for context subformulas and ``_fv_<X>`` for
fixpoint variables that occur free inside a context argument.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .errors import BlowupLimit, LogicError, LogicMismatch
from .formula import (
    BINDERS,
    HOLE,
    Atom,
    And,
    Box,
    Formula,
    Iff,
    Implies,
    Logic,
    Nu,
    Op,
    Var,
    binders,
    check_logic,
    conj,
    free_vars,
    infer_logic,
    instantiate,
    rename_apart,
    size,
    subformulas,
    substitute_vars,
    transform,
)

DEFAULT_NODE_BUDGET = 10**6


@dataclass(frozen=True)
class ContextOccurrence:
    variable: str
    argument: Formula
    fresh_atom: str
    guard: Formula  # the decontextualised argument


@dataclass
class ReductionArtifacts:
    formula: Formula
    consub: list[ContextOccurrence]
    decon: Formula
    freevar_atoms: dict[str, str] = field(default_factory=dict)
    fixpoint_subst: dict[str, Formula] = field(default_factory=dict)

    def groups(self) -> dict[str, list[ContextOccurrence]]:
        """Occurrences grouped by context variable, in order of first occurrence."""
        out: dict[str, list[ContextOccurrence]] = {}
        for occ in self.consub:
            out.setdefault(occ.variable, []).append(occ)
        return out


def context_subformulas(phi: Formula) -> list[ContextOccurrence]:
    """Distinct context subformulas ``c[psi]`` in preorder, outermost first."""
    table: dict[tuple[str, Formula], str] = {}
    order: list[tuple[str, Formula]] = []
    for node in subformulas(phi):
        if node.op is Op.APPLY:
            key = (node.name, node.args[0])
            if key not in table:
                table[key] = f"_ctx_{node.name}_{len(order)}"
                order.append(key)
    return [
        ContextOccurrence(c, arg, table[(c, arg)], _decon_with(arg, table)) for c, arg in order
    ]


def _decon_with(phi: Formula, table: dict[tuple[str, Formula], str]) -> Formula:
    return transform(
        phi, lambda n: Atom(table[(n.name, n.args[0])]) if n.op is Op.APPLY else None
    )


def _prepare(phi: Formula, logic: Logic) -> Formula:
    check_logic(phi, logic)
    if logic is Logic.MU:
        phi = rename_apart(phi)
    return phi


def fixpoint_substitution(phi: Formula) -> dict[str, Formula]:
    """Map every bound variable to a closed formula equal to its binder.

    Binders are processed outermost first: ``X_k`` maps to its binder with
    the substitutions of the enclosing variables already applied to the body.
    Context applications inside bodies are replaced by their fresh atoms, so
    binders nested in context arguments are covered too.
    """
    table = {(o.variable, o.argument): o.fresh_atom for o in context_subformulas(phi)}
    sigma: dict[str, Formula] = {}
    for b in binders(phi):
        body = _decon_with(b.args[0], table)
        sigma[b.name] = Formula(b.op, (substitute_vars(body, sigma),), b.name)
    return sigma


def decontextualize(phi: Formula, logic: Logic | None = None) -> ReductionArtifacts:
    logic = infer_logic(phi) if logic is None else logic
    phi = _prepare(phi, logic)
    consub = context_subformulas(phi)
    table = {(o.variable, o.argument): o.fresh_atom for o in consub}
    decon = _decon_with(phi, table)
    art = ReductionArtifacts(phi, consub, decon)
    if logic is Logic.MU:
        art.fixpoint_subst = fixpoint_substitution(phi)
        free: set[str] = set()
        for occ in consub:
            free |= free_vars(occ.argument)
        # A binder clause for X mentions the variables free in alpha X.phi_X;
        # those need atoms too, or the clause would not be closed.
        binder_map = {b.name: b for b in binders(phi)}
        work = sorted(free)
        while work:
            x = work.pop()
            b = binder_map.get(x)
            if b is None:
                continue
            for y in free_vars(b):
                if y not in free:
                    free.add(y)
                    work.append(y)
        art.freevar_atoms = {x: f"_fv_{x}" for x in sorted(free)}
    return art


# -- shared pieces -------------------------------------------------------------


class _FreshVars:
    """Deterministic fresh fixpoint variables ``Z``, ``Z1``, ``Z2`` ..."""

    def __init__(self, avoid: Iterable[str]):
        self.avoid = set(avoid)
        self.k = 0

    def __call__(self) -> str:
        while True:
            name = "Z" if self.k == 0 else f"Z{self.k}"
            self.k += 1
            if name not in self.avoid:
                return name


def _var_names(phi: Formula) -> set[str]:
    return {n.name for n in subformulas(phi) if n.op is Op.VAR or n.op in BINDERS}


def _always(logic: Logic, fresh: _FreshVars | None) -> callable:
    if logic is Logic.LTL:
        return lambda f: Formula(Op.G, (f,))
    if logic is Logic.CTL:
        return lambda f: Formula(Op.AG, (f,))
    if logic is Logic.MU:

        def ag(f: Formula) -> Formula:
            z = fresh()
            return Nu(z, And(Box(Var(z)), f))

        return ag
    return lambda f: f


def _check_mode(logic: Logic, monotonic: bool) -> None:
    if logic is Logic.MU and not monotonic:
        raise LogicError("non-monotonic contexts are not supported for the mu-calculus")


# -- canonical instantiation ----------------------------------------------------


def canonical_instantiation(
    phi: Formula, logic: Logic | None = None, *, monotonic: bool = True
) -> dict[str, Formula]:
    logic = infer_logic(phi) if logic is None else logic
    _check_mode(logic, monotonic)
    art = decontextualize(phi, logic)
    return _canonical_from(art, logic, monotonic)


def _canonical_from(art: ReductionArtifacts, logic: Logic, monotonic: bool) -> dict[str, Formula]:
    fresh = _FreshVars(_var_names(art.formula)) if logic is Logic.MU else None
    always = _always(logic, fresh)
    guard_op = Implies if monotonic else Iff
    sigma: dict[str, Formula] = {}
    for c, occs in art.groups().items():
        conjuncts = []
        for occ in occs:
            guard = occ.guard
            if logic is Logic.MU:
                guard = substitute_vars(guard, art.fixpoint_subst)
            conjuncts.append(Implies(always(guard_op(HOLE, guard)), Atom(occ.fresh_atom)))
        sigma[c] = conj(conjuncts)
    return sigma


def canonical_reduction(
    phi: Formula,
    logic: Logic | None = None,
    *,
    monotonic: bool = True,
    budget: int = DEFAULT_NODE_BUDGET,
) -> Formula:
    """The ordinary formula obtained by instantiating ``phi`` canonically."""
    logic = infer_logic(phi) if logic is None else logic
    _check_mode(logic, monotonic)
    art = decontextualize(phi, logic)
    sigma = _canonical_from(art, logic, monotonic)
    result = instantiate(sigma, art.formula)
    n = size(result)
    if n > budget:
        raise BlowupLimit(f"canonical reduction has {n} nodes (budget {budget})", n, budget)
    return result


# -- equivalid formula -----------------------------------------------------------


def equivalid_formula(
    phi: Formula,
    logic: Logic | None = None,
    *,
    mode: str = "validity",
    monotonic: bool = True,
) -> Formula:
    """Polynomial ordinary formula valid (or satisfiable) iff ``phi`` is."""
    if mode not in ("validity", "satisfiability"):
        raise ValueError(f"unknown mode {mode!r}")
    logic = infer_logic(phi) if logic is None else logic
    _check_mode(logic, monotonic)
    art = decontextualize(phi, logic)
    fresh = _FreshVars(_var_names(art.formula)) if logic is Logic.MU else None
    always = _always(logic, fresh)

    plus_map = {x: Atom(a) for x, a in art.freevar_atoms.items()}

    def plus(f: Formula) -> Formula:
        return substitute_vars(f, plus_map) if plus_map else f

    premise = []
    for occs in art.groups().values():
        for o1 in occs:
            for o2 in occs:
                p1, p2 = Atom(o1.fresh_atom), Atom(o2.fresh_atom)
                g1, g2 = plus(o1.guard), plus(o2.guard)
                if monotonic:
                    inner = Implies(always(Implies(g1, g2)), Implies(p1, p2))
                else:
                    inner = Implies(always(Iff(g1, g2)), Iff(p1, p2))
                premise.append(always(inner))
    if logic is Logic.MU and art.freevar_atoms:
        table = {(o.variable, o.argument): o.fresh_atom for o in art.consub}
        binder_map = {b.name: b for b in binders(art.formula)}
        for x, a in art.freevar_atoms.items():
            b = binder_map[x]
            fix = Formula(b.op, (plus_without(_decon_with(b.args[0], table), plus_map, x),), x)
            premise.append(always(Iff(Atom(a), fix)))
    conclusion = plus(art.decon)
    if not premise:
        return conclusion
    top = Implies if mode == "validity" else And
    result = top(conj(premise), conclusion)
    bound = 11 * size(art.formula) ** 4
    assert size(result) <= bound, "equivalid formula exceeded its polynomial size bound"
    return result


def plus_without(body: Formula, plus_map: dict[str, Formula], x: str) -> Formula:
    """Replace free variables other than the binder's own ``x`` by their atoms."""
    sub = {k: v for k, v in plus_map.items() if k != x}
    return substitute_vars(body, sub) if sub else body


# -- queries ---------------------------------------------------------------------

QUERY_KINDS = ("valid", "sat", "equiv", "implies")


def common_logic(*formulas: Formula, logic: Logic | None = None) -> Logic:
    """The logic shared by all formulas; purely propositional ones fit any logic."""
    found = {infer_logic(f) for f in formulas} - {Logic.PROP}
    if logic is not None:
        if found - {logic}:
            raise LogicMismatch(
                f"formula uses {', '.join(sorted(l.value for l in found))} operators, not {logic.value}"
            )
        return logic
    if len(found) > 1:
        raise LogicMismatch("the two sides use different logics")
    return found.pop() if found else Logic.PROP


def build_query(kind: str, lhs: Formula, rhs: Formula | None = None) -> Formula:
    if kind not in QUERY_KINDS:
        raise ValueError(f"unknown query kind {kind!r}")
    if kind in ("equiv", "implies"):
        if rhs is None:
            raise ValueError(f"{kind} needs two formulas")
        common_logic(lhs, rhs)
        return Iff(lhs, rhs) if kind == "equiv" else Implies(lhs, rhs)
    if rhs is not None:
        raise ValueError(f"{kind} takes a single formula")
    return lhs


def reduce(
    phi: Formula,
    logic: Logic | None = None,
    *,
    method: str = "equivalid",
    mode: str = "validity",
    monotonic: bool = True,
    budget: int = DEFAULT_NODE_BUDGET,
) -> Formula:
    if method == "canonical":
        return canonical_reduction(phi, logic, monotonic=monotonic, budget=budget)
    if method == "equivalid":
        return equivalid_formula(phi, logic, mode=mode, monotonic=monotonic)
    raise ValueError(f"unknown reduction method {method!r}")
