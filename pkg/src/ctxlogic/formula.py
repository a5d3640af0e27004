"""Shared AST for ordinary formulas, contexts and contextual formulas.

One node class covers propositional logic, LTL, CTL and the modal
mu-calculus.  Nodes are immutable and hash-cached, so formulas built by
substitution may share subterms freely; every traversal in this module is
memoised on node values and therefore runs in time linear in the number of
*distinct* subterms, not in the size of the unfolded tree.
"""

from __future__ import annotations

import enum
from typing import Callable, Iterable, Iterator, Mapping

from .errors import LogicError, NNFError, NonMonotonicHole, NotBound, UnboundContextVariable

RESERVED_PREFIXES = ("_ctx_", "_fv_")


class Logic(enum.Enum):
    PROP = "prop"
    LTL = "ltl"
    CTL = "ctl"
    MU = "mu"

    @classmethod
    def parse(cls, text: str | Logic) -> Logic:
        if isinstance(text, Logic):
            return text
        try:
            return cls(text.lower())
        except ValueError:
            raise LogicError(f"unknown logic {text!r}") from None


class Op(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    ATOM = "atom"
    NATOM = "natom"
    VAR = "var"
    HOLE = "hole"
    APPLY = "apply"
    NOT = "not"
    AND = "and"
    OR = "or"
    IMPLIES = "implies"
    IFF = "iff"
    # mu-calculus
    DIA = "dia"
    BOX = "box"
    MU = "mu"
    NU = "nu"
    # LTL
    X = "X"
    U = "U"
    W = "W"
    G = "G"
    F = "F"
    # CTL
    AX = "AX"
    EX = "EX"
    AG = "AG"
    AF = "AF"
    EG = "EG"
    EF = "EF"
    AU = "AU"
    AW = "AW"
    EU = "EU"
    EW = "EW"


LEAVES = frozenset({Op.TRUE, Op.FALSE, Op.ATOM, Op.NATOM, Op.VAR, Op.HOLE})
QUERY_OPS = frozenset({Op.NOT, Op.IMPLIES, Op.IFF})
BINDERS = frozenset({Op.MU, Op.NU})
LTL_OPS = frozenset({Op.X, Op.U, Op.W, Op.G, Op.F})
CTL_UNARY = frozenset({Op.AX, Op.EX, Op.AG, Op.AF, Op.EG, Op.EF})
CTL_BINARY = frozenset({Op.AU, Op.AW, Op.EU, Op.EW})
CTL_OPS = CTL_UNARY | CTL_BINARY
MU_OPS = frozenset({Op.DIA, Op.BOX, Op.MU, Op.NU, Op.VAR})
BASE_OPS = frozenset(
    {Op.TRUE, Op.FALSE, Op.ATOM, Op.NATOM, Op.HOLE, Op.APPLY, Op.AND, Op.OR} | QUERY_OPS
)

LOGIC_OPS = {
    Logic.PROP: BASE_OPS,
    Logic.LTL: BASE_OPS | LTL_OPS,
    Logic.CTL: BASE_OPS | CTL_OPS,
    Logic.MU: BASE_OPS | MU_OPS,
}


class Formula:
    """An immutable AST node.

    ``name`` holds the atom, variable or context-variable name for the node
    kinds that need one (ATOM, NATOM, VAR, MU, NU, APPLY) and is ``None``
    otherwise.  Equality is structural.
    """

    __slots__ = ("op", "args", "name", "_hash")

    op: Op
    args: tuple[Formula, ...]
    name: str | None

    def __init__(self, op: Op, args: tuple[Formula, ...] = (), name: str | None = None):
        object.__setattr__(self, "op", op)
        object.__setattr__(self, "args", args)
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "_hash", hash((op, name, args)))

    def __setattr__(self, key, value):
        raise AttributeError("Formula is immutable")

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.op is other.op
            and self.name == other.name
            and self.args == other.args
        )

    def __reduce__(self):
        return (Formula, (self.op, self.args, self.name))

    def __str__(self) -> str:
        from .parser import print_formula

        return print_formula(self)

    def __repr__(self) -> str:
        return f"Formula({str(self)!r})"

    def with_args(self, args: tuple[Formula, ...]) -> Formula:
        if all(a is b for a, b in zip(args, self.args)) and len(args) == len(self.args):
            return self
        return Formula(self.op, args, self.name)


# -- constructors -------------------------------------------------------------

TRUE = Formula(Op.TRUE)
FALSE = Formula(Op.FALSE)
HOLE = Formula(Op.HOLE)


def Atom(name: str) -> Formula:
    return Formula(Op.ATOM, (), name)


def NegAtom(name: str) -> Formula:
    return Formula(Op.NATOM, (), name)


def Var(name: str) -> Formula:
    return Formula(Op.VAR, (), name)


def Not(f: Formula) -> Formula:
    return Formula(Op.NOT, (f,))


def And(a: Formula, b: Formula) -> Formula:
    return Formula(Op.AND, (a, b))


def Or(a: Formula, b: Formula) -> Formula:
    return Formula(Op.OR, (a, b))


def Implies(a: Formula, b: Formula) -> Formula:
    return Formula(Op.IMPLIES, (a, b))


def Iff(a: Formula, b: Formula) -> Formula:
    return Formula(Op.IFF, (a, b))


def Diamond(f: Formula) -> Formula:
    return Formula(Op.DIA, (f,))


def Box(f: Formula) -> Formula:
    return Formula(Op.BOX, (f,))


def Mu(var: str, body: Formula) -> Formula:
    return Formula(Op.MU, (body,), var)


def Nu(var: str, body: Formula) -> Formula:
    return Formula(Op.NU, (body,), var)


def Next(f: Formula) -> Formula:
    return Formula(Op.X, (f,))


def Until(a: Formula, b: Formula) -> Formula:
    return Formula(Op.U, (a, b))


def WeakUntil(a: Formula, b: Formula) -> Formula:
    return Formula(Op.W, (a, b))


def Globally(f: Formula) -> Formula:
    return Formula(Op.G, (f,))


def Finally(f: Formula) -> Formula:
    return Formula(Op.F, (f,))


def Apply(context: str, arg: Formula) -> Formula:
    return Formula(Op.APPLY, (arg,), context)


def _unary(op: Op) -> Callable[[Formula], Formula]:
    return lambda f: Formula(op, (f,))


def _binary(op: Op) -> Callable[[Formula, Formula], Formula]:
    return lambda a, b: Formula(op, (a, b))


AX, EX, AG, AF, EG, EF = (_unary(op) for op in (Op.AX, Op.EX, Op.AG, Op.AF, Op.EG, Op.EF))
AU, AW, EU, EW = (_binary(op) for op in (Op.AU, Op.AW, Op.EU, Op.EW))


def conj(items: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``true``."""
    result = None
    for item in items:
        result = item if result is None else And(result, item)
    return TRUE if result is None else result


def disj(items: Iterable[Formula]) -> Formula:
    result = None
    for item in items:
        result = item if result is None else Or(result, item)
    return FALSE if result is None else result


# -- generic traversals -------------------------------------------------------


def subformulas(phi: Formula) -> Iterator[Formula]:
    """Distinct subformulas in left-to-right preorder."""
    seen: set[Formula] = set()
    stack = [phi]
    while stack:
        node = stack.pop()
        if node in seen:
            continue
        seen.add(node)
        yield node
        stack.extend(reversed(node.args))


def transform(phi: Formula, rule: Callable[[Formula], Formula | None]) -> Formula:
    """Bottom-up rewrite.

    ``rule`` is tried on every node before its children; returning a formula
    replaces the node (the replacement is not revisited), returning ``None``
    recurses into the children.
    """
    memo: dict[Formula, Formula] = {}

    def go(node: Formula) -> Formula:
        hit = memo.get(node)
        if hit is not None:
            return hit
        out = rule(node)
        if out is None:
            out = node.with_args(tuple(go(a) for a in node.args)) if node.args else node
        memo[node] = out
        return out

    return go(phi)


def atoms(phi: Formula) -> set[str]:
    return {f.name for f in subformulas(phi) if f.op in (Op.ATOM, Op.NATOM)}


def context_vars(phi: Formula) -> list[str]:
    """Context variables in order of first occurrence."""
    out: list[str] = []
    for f in subformulas(phi):
        if f.op is Op.APPLY and f.name not in out:
            out.append(f.name)
    return out


def has_hole(phi: Formula) -> bool:
    return any(f.op is Op.HOLE for f in subformulas(phi))


def has_apply(phi: Formula) -> bool:
    return any(f.op is Op.APPLY for f in subformulas(phi))


def is_ordinary(phi: Formula) -> bool:
    return not any(f.op in (Op.APPLY, Op.HOLE) for f in subformulas(phi))


def size(phi: Formula, *, binder_weight: int = 2, apply_weight: int = 2) -> int:
    """Tree size of ``phi``.

    Every node counts 1, except fixpoint binders and context applications,
    which count ``binder_weight`` and ``apply_weight`` (operator plus the
    variable it names).  Shared subterms are counted once per occurrence, so
    the result is the size of the fully unfolded tree.
    """
    memo: dict[Formula, int] = {}

    def go(node: Formula) -> int:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if node.op in BINDERS:
            own = binder_weight
        elif node.op is Op.APPLY:
            own = apply_weight
        else:
            own = 1
        total = own + sum(go(a) for a in node.args)
        memo[node] = total
        return total

    return go(phi)


def hole_count(ctx: Formula) -> int:
    memo: dict[Formula, int] = {}

    def go(node: Formula) -> int:
        hit = memo.get(node)
        if hit is not None:
            return hit
        n = 1 if node.op is Op.HOLE else sum(go(a) for a in node.args)
        memo[node] = n
        return n

    return go(ctx)


# -- logic tags ---------------------------------------------------------------


def infer_logic(phi: Formula) -> Logic:
    ops = {f.op for f in subformulas(phi)}
    has_ltl = bool(ops & LTL_OPS)
    has_ctl = bool(ops & CTL_OPS)
    has_mu = bool(ops & MU_OPS)
    if sum((has_ltl, has_ctl, has_mu)) > 1:
        raise LogicError("formula mixes operators of different temporal logics")
    if has_mu:
        return Logic.MU
    if has_ctl:
        return Logic.CTL
    if has_ltl:
        return Logic.LTL
    return Logic.PROP


def check_logic(phi: Formula, logic: Logic) -> None:
    allowed = LOGIC_OPS[logic]
    for f in subformulas(phi):
        if f.op not in allowed:
            raise LogicError(f"operator {f.op.value} is not part of {logic.value.upper()}")


# -- holes and instantiation --------------------------------------------------


def fill(ctx: Formula, arg: Formula) -> Formula:
    """Replace every hole of ``ctx`` by ``arg``."""
    return transform(ctx, lambda n: arg if n.op is Op.HOLE else None)


Instantiation = Mapping[str, Formula]


def instantiate(sigma: Instantiation, phi: Formula) -> Formula:
    """Replace context applications bottom-up by the filled contexts."""
    memo: dict[Formula, Formula] = {}

    def go(node: Formula) -> Formula:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if node.op is Op.APPLY:
            ctx = sigma.get(node.name)
            if ctx is None:
                raise UnboundContextVariable(f"context variable {node.name!r} is not instantiated")
            out = fill(ctx, go(node.args[0]))
        elif node.args:
            out = node.with_args(tuple(go(a) for a in node.args))
        else:
            out = node
        memo[node] = out
        return out

    return go(phi)


# -- fixpoint variables -------------------------------------------------------


def free_vars(phi: Formula) -> frozenset[str]:
    memo: dict[Formula, frozenset[str]] = {}

    def go(node: Formula) -> frozenset[str]:
        hit = memo.get(node)
        if hit is not None:
            return hit
        if node.op is Op.VAR:
            out = frozenset({node.name})
        elif node.op in BINDERS:
            out = go(node.args[0]) - {node.name}
        else:
            out = frozenset().union(*(go(a) for a in node.args)) if node.args else frozenset()
        memo[node] = out
        return out

    return go(phi)


def bound_vars(phi: Formula) -> list[str]:
    return [f.name for f in binders(phi)]


def binders(phi: Formula) -> list[Formula]:
    """Fixpoint subformulas in preorder (every binder precedes the binders below it)."""
    out: list[Formula] = []
    seen: set[Formula] = set()

    def go(node: Formula) -> None:
        if node in seen:
            return
        seen.add(node)
        if node.op in BINDERS:
            out.append(node)
        for a in node.args:
            go(a)

    go(phi)
    return out


def binder_of(phi: Formula, var: str) -> Formula:
    for b in binders(phi):
        if b.name == var:
            return b
    raise NotBound(f"variable {var!r} is not bound in the formula")


def _all_var_names(phi: Formula) -> set[str]:
    return {f.name for f in subformulas(phi) if f.op is Op.VAR or f.op in BINDERS}


def rename_apart(phi: Formula) -> Formula:
    """Give every fixpoint binder its own variable, distinct from free ones.

    The first binder of a name (left to right) keeps it unless the name also
    occurs free; later binders get the smallest unused numeric suffix.
    """
    used = _all_var_names(phi)
    free = free_vars(phi)
    claimed: set[str] = set()

    def fresh(base: str) -> str:
        k = 1
        while f"{base}{k}" in used:
            k += 1
        name = f"{base}{k}"
        used.add(name)
        return name

    def go(node: Formula, env: dict[str, str]) -> Formula:
        if node.op is Op.VAR:
            new = env.get(node.name, node.name)
            return node if new == node.name else Var(new)
        if node.op in BINDERS:
            old = node.name
            if old in claimed or old in free:
                new = fresh(old)
            else:
                new = old
            claimed.add(new)
            body = go(node.args[0], {**env, old: new})
            if new == old and body is node.args[0]:
                return node
            return Formula(node.op, (body,), new)
        if not node.args:
            return node
        return node.with_args(tuple(go(a, env) for a in node.args))

    return go(phi, {})


def substitute_vars(phi: Formula, sigma: Mapping[str, Formula]) -> Formula:
    """Replace free occurrences of fixpoint variables; bound ones are kept."""
    memo: dict[tuple[Formula, frozenset[str]], Formula] = {}

    def go(node: Formula, shadow: frozenset[str]) -> Formula:
        key = (node, shadow)
        hit = memo.get(key)
        if hit is not None:
            return hit
        if node.op is Op.VAR:
            out = sigma[node.name] if node.name in sigma and node.name not in shadow else node
        elif node.op in BINDERS:
            inner = shadow | {node.name} if node.name in sigma else shadow
            out = node.with_args((go(node.args[0], inner),))
        elif node.args:
            out = node.with_args(tuple(go(a, shadow) for a in node.args))
        else:
            out = node
        memo[key] = out
        return out

    return go(phi, frozenset())


def substitute_atoms(phi: Formula, sigma: Mapping[str, Formula]) -> Formula:
    """Replace positive atom occurrences; negated ones must map to themselves."""

    def rule(node: Formula) -> Formula | None:
        if node.op is Op.ATOM and node.name in sigma:
            return sigma[node.name]
        if node.op is Op.NATOM and node.name in sigma and sigma[node.name] != Atom(node.name):
            raise NNFError(f"atom {node.name!r} occurs negated and cannot be substituted")
        return None

    return transform(phi, rule)


# -- negation normal form -----------------------------------------------------

_DUAL_UNARY = {
    Op.X: Op.X,
    Op.G: Op.F,
    Op.F: Op.G,
    Op.AX: Op.EX,
    Op.EX: Op.AX,
    Op.AG: Op.EF,
    Op.EF: Op.AG,
    Op.AF: Op.EG,
    Op.EG: Op.AF,
    Op.DIA: Op.BOX,
    Op.BOX: Op.DIA,
}

# not(a OP b) == (not b) DUAL ((not a) and (not b))
_DUAL_UNTIL = {Op.U: Op.W, Op.W: Op.U, Op.AU: Op.EW, Op.AW: Op.EU, Op.EU: Op.AW, Op.EW: Op.AU}


def to_nnf(phi: Formula, *, monotonic: bool = True) -> Formula:
    """Push negations down to atoms, eliminating ``->`` and ``<->``.

    Fixpoints are dualised with their variable kept positive.  In monotonic
    mode a hole or context application that would end up negated raises
    :class:`NonMonotonicHole`; otherwise it is kept under an explicit ``Not``.
    """
    memo: dict[tuple[Formula, bool, frozenset[str]], Formula] = {}

    def go(node: Formula, neg: bool, flipped: frozenset[str]) -> Formula:
        key = (node, neg, flipped)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out = _nnf_step(node, neg, flipped)
        memo[key] = out
        return out

    def _nnf_step(node: Formula, neg: bool, flipped: frozenset[str]) -> Formula:
        op = node.op
        if op is Op.TRUE:
            return FALSE if neg else TRUE
        if op is Op.FALSE:
            return TRUE if neg else FALSE
        if op is Op.ATOM:
            return NegAtom(node.name) if neg else node
        if op is Op.NATOM:
            return Atom(node.name) if neg else node
        if op is Op.VAR:
            if neg != (node.name in flipped):
                raise NNFError(f"fixpoint variable {node.name} occurs negatively")
            return node
        if op is Op.HOLE:
            if not neg:
                return node
            if monotonic:
                raise NonMonotonicHole("hole under an odd number of negations")
            return Not(node)
        if op is Op.APPLY:
            inner = Formula(Op.APPLY, (go(node.args[0], False, flipped),), node.name)
            if not neg:
                return inner
            if monotonic:
                raise NonMonotonicHole(f"context application {node.name}[...] is negated")
            return Not(inner)
        if op is Op.NOT:
            return go(node.args[0], not neg, flipped)
        if op in (Op.AND, Op.OR):
            a, b = (go(x, neg, flipped) for x in node.args)
            flip = (op is Op.AND) == neg
            return Or(a, b) if flip else And(a, b)
        if op is Op.IMPLIES:
            a, b = node.args
            if neg:
                return And(go(a, False, flipped), go(b, True, flipped))
            return Or(go(a, True, flipped), go(b, False, flipped))
        if op is Op.IFF:
            a, b = node.args
            if neg:
                return Or(
                    And(go(a, False, flipped), go(b, True, flipped)),
                    And(go(b, False, flipped), go(a, True, flipped)),
                )
            return And(
                Or(go(a, True, flipped), go(b, False, flipped)),
                Or(go(b, True, flipped), go(a, False, flipped)),
            )
        if op in _DUAL_UNARY:
            child = go(node.args[0], neg, flipped)
            return Formula(_DUAL_UNARY[op] if neg else op, (child,))
        if op in _DUAL_UNTIL:
            a, b = node.args
            if not neg:
                return Formula(op, (go(a, False, flipped), go(b, False, flipped)))
            na, nb = go(a, True, flipped), go(b, True, flipped)
            return Formula(_DUAL_UNTIL[op], (nb, And(na, nb)))
        if op in BINDERS:
            if neg:
                dual = Op.NU if op is Op.MU else Op.MU
                return Formula(dual, (go(node.args[0], True, flipped | {node.name}),), node.name)
            return Formula(op, (go(node.args[0], False, flipped - {node.name}),), node.name)
        raise AssertionError(f"unhandled operator {op}")

    return go(phi, False, frozenset())


def hole_polarity_ok(ctx: Formula) -> bool:
    """True when no hole sits under an odd number of negations (or under <->)."""
    try:
        to_nnf(ctx, monotonic=True)
    except NonMonotonicHole:
        return False
    return True


def check_context(ctx: Formula, *, monotonic: bool = True) -> None:
    if any(f.op is Op.APPLY for f in subformulas(ctx)):
        raise UnboundContextVariable("contexts may not contain context applications")
    if monotonic and not hole_polarity_ok(ctx):
        raise NonMonotonicHole("context has a hole under negation")


def is_nnf(phi: Formula) -> bool:
    return not any(f.op in QUERY_OPS for f in subformulas(phi))


def check_polarity(phi: Formula, *, monotonic: bool = True) -> None:
    """Reject negative fixpoint variables and (in monotonic mode) negated holes.

    Negation here means the query connectives: ``!``, the left side of
    ``->`` and both sides of ``<->``.  Context applications may be negated at
    the query level; only the holes of a context are restricted.
    """
    seen: set[tuple[Formula, int, tuple]] = set()

    def flip(binders_: tuple, to: int | None) -> tuple:
        return tuple((k, -v if to is None else to) for k, v in binders_)

    def go(node: Formula, parity: int, binders_: tuple) -> None:
        # parity is relative to the root; binders_ holds, for each enclosing
        # fixpoint variable, the parity relative to its binder.
        key = (node, parity, binders_)
        if key in seen:
            return
        seen.add(key)
        op = node.op
        if op is Op.VAR:
            rel = dict(binders_).get(node.name, parity)
            if rel != 1:
                raise NNFError(f"fixpoint variable {node.name} occurs negatively")
            return
        if op is Op.HOLE:
            if monotonic and parity != 1:
                raise NonMonotonicHole("hole under negation")
            return
        if op is Op.NOT:
            go(node.args[0], -parity, flip(binders_, None))
        elif op is Op.IMPLIES:
            go(node.args[0], -parity, flip(binders_, None))
            go(node.args[1], parity, binders_)
        elif op is Op.IFF:
            for a in node.args:
                go(a, 0, flip(binders_, 0))
        elif op in BINDERS:
            inner = tuple((k, v) for k, v in binders_ if k != node.name) + ((node.name, 1),)
            go(node.args[0], parity, inner)
        else:
            for a in node.args:
                go(a, parity, binders_)

    go(phi, 1, ())
