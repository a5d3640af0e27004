"""Concrete syntax: tokenizer, recursive-descent parser and pretty-printer.

Precedence, loosest first::

    <->   (left-assoc)
    ->    (right-assoc)
    |     (left-assoc)
    &     (left-assoc)
    U W   (right-assoc, LTL only; CTL uses A(. U .) / E(. U .))
    ! X G F AX EX AG EG AF EF <.> [.]   (prefix)

``mu X. body`` extends as far to the right as possible.  An identifier
immediately followed by ``[`` is a context application.  In the
mu-calculus, identifiers starting with an uppercase letter are fixpoint
variables and everything else is an atom.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .formula import (
    FALSE,
    HOLE,
    RESERVED_PREFIXES,
    TRUE,
    Formula,
    Logic,
    Op,
    check_context,
    check_polarity,
    context_vars,
)


@dataclass(frozen=True)
class SourceSpan:
    """Character offsets into the input plus 1-based line/column of ``begin``."""

    begin: int
    end: int
    line: int
    column: int


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    begin: int
    end: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<IFF><->|↔)
  | (?P<IMPLIES>->|→)
  | (?P<DIA><\.>|◇)
  | (?P<BOX>\[\.\]|□)
  | (?P<LBRACK>\[)
  | (?P<RBRACK>\])
  | (?P<LPAREN>\()
  | (?P<RPAREN>\))
  | (?P<AND>&|∧)
  | (?P<OR>\||∨)
  | (?P<NOT>!|¬)
  | (?P<HOLE>@hole|•)
  | (?P<MU>μ)
  | (?P<NU>ν)
  | (?P<DOT>\.)
  | (?P<SEMI>;)
  | (?P<ASSIGN>:=|=)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<BAD>.)
    """,
    re.VERBOSE,
)

LTL_UNARY = {"X": Op.X, "G": Op.G, "F": Op.F}
LTL_BINARY = {"U": Op.U, "W": Op.W}
CTL_UNARY = {name: Op[name] for name in ("AX", "EX", "AG", "EG", "AF", "EF")}
_XGF = re.compile(r"[XGF]+")


def _span(text: str, begin: int, end: int) -> SourceSpan:
    line = text.count("\n", 0, begin) + 1
    column = begin - (text.rfind("\n", 0, begin) + 1) + 1
    return SourceSpan(begin, end, line, column)


def tokenize(text: str) -> list[Token]:
    tokens = []
    for m in _TOKEN_RE.finditer(text):
        kind = m.lastgroup
        if kind in ("ws", "comment"):
            continue
        if kind == "BAD":
            raise ParseError(f"unexpected character {m.group()!r}", _span(text, m.start(), m.end()))
        tokens.append(Token(kind, m.group(), m.start(), m.end()))
    tokens.append(Token("EOF", "", len(text), len(text)))
    return tokens


def guess_logic(text: str) -> Logic:
    """Infer the logic from the operators used; pure propositional text gives PROP."""
    tokens = tokenize(text)
    kinds = {t.kind for t in tokens}
    if kinds & {"MU", "NU", "DIA", "BOX"} or any(
        t.kind == "IDENT" and t.text in ("mu", "nu") for t in tokens
    ):
        return Logic.MU
    for i, t in enumerate(tokens):
        if t.kind != "IDENT":
            continue
        if t.text in CTL_UNARY:
            return Logic.CTL
        if t.text in ("A", "E") and tokens[i + 1].kind == "LPAREN":
            return Logic.CTL
    for t in tokens:
        if t.kind == "IDENT" and (t.text in LTL_BINARY or _XGF.fullmatch(t.text)):
            return Logic.LTL
    return Logic.PROP


class _Parser:
    def __init__(self, text: str, logic: Logic, allow_reserved: bool):
        self.text = text
        self.logic = logic
        self.allow_reserved = allow_reserved
        self.tokens = tokenize(text)
        self.pos = 0
        self.bound: list[str] = []

    # -- token helpers --------------------------------------------------------

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def advance(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str, expected=(), tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, _span(self.text, tok.begin, tok.end), frozenset(expected))

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise self.error(f"unexpected {found!r}", {what or kind})
        return self.advance()

    def is_ident(self, *names: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.text in names

    def binary_keyword(self) -> Op | None:
        tok = self.peek()
        if self.logic is Logic.LTL and tok.kind == "IDENT" and tok.text in LTL_BINARY:
            return LTL_BINARY[tok.text]
        return None

    # -- grammar --------------------------------------------------------------

    def parse_top(self) -> Formula:
        phi = self.iff()
        if self.peek().kind != "EOF":
            raise self.error(f"unexpected {self.peek().text!r}", {"end of input", "operator"})
        return phi

    def iff(self) -> Formula:
        left = self.implies()
        while self.peek().kind == "IFF":
            self.advance()
            left = Formula(Op.IFF, (left, self.implies()))
        return left

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.peek().kind == "IMPLIES":
            self.advance()
            return Formula(Op.IMPLIES, (left, self.implies()))
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.peek().kind == "OR":
            self.advance()
            left = Formula(Op.OR, (left, self.conjunction()))
        return left

    def conjunction(self) -> Formula:
        left = self.until()
        while self.peek().kind == "AND":
            self.advance()
            left = Formula(Op.AND, (left, self.until()))
        return left

    def until(self) -> Formula:
        left = self.unary()
        op = self.binary_keyword()
        if op is not None:
            self.advance()
            return Formula(op, (left, self.until()))
        return left

    def unary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "NOT":
            self.advance()
            nxt = self.peek()
            if (
                nxt.kind == "IDENT"
                and self.peek(1).kind != "LBRACK"
                and self._ident_kind(nxt) == "atom"
            ):
                self.advance()
                return Formula(Op.NATOM, (), self._atom_name(nxt))
            return Formula(Op.NOT, (self.unary(),))
        if tok.kind in ("DIA", "BOX"):
            self._require(Logic.MU, tok)
            self.advance()
            return Formula(Op.DIA if tok.kind == "DIA" else Op.BOX, (self.unary(),))
        if tok.kind in ("MU", "NU") or (tok.kind == "IDENT" and tok.text in ("mu", "nu")):
            self._require(Logic.MU, tok)
            return self.binder()
        if tok.kind == "IDENT" and self.peek(1).kind != "LBRACK":
            kind = self._ident_kind(tok)
            if kind == "ltl_prefix":
                self.advance()
                ops = [LTL_UNARY[ch] for ch in tok.text]
                phi = self.unary()
                for op in reversed(ops):
                    phi = Formula(op, (phi,))
                return phi
            if kind == "ctl_prefix":
                self.advance()
                return Formula(CTL_UNARY[tok.text], (self.unary(),))
        return self.primary()

    def binder(self) -> Formula:
        tok = self.advance()
        op = Op.MU if tok.kind == "MU" or tok.text == "mu" else Op.NU
        var = self.expect("IDENT", "variable")
        if not var.text[0].isupper():
            raise self.error("fixpoint variables start with an uppercase letter", {"variable"}, var)
        self.expect("DOT", "'.'")
        self.bound.append(var.text)
        try:
            body = self.iff()
        finally:
            self.bound.pop()
        return Formula(op, (body,), var.text)

    def primary(self) -> Formula:
        tok = self.peek()
        if tok.kind == "LPAREN":
            self.advance()
            phi = self.iff()
            self.expect("RPAREN", "')'")
            return phi
        if tok.kind == "HOLE":
            self.advance()
            return HOLE
        if tok.kind == "IDENT":
            if self.peek(1).kind == "LBRACK":
                self.advance()
                self.advance()
                name = self._check_name(tok)
                arg = self.iff()
                self.expect("RBRACK", "']'")
                return Formula(Op.APPLY, (arg,), name)
            kind = self._ident_kind(tok)
            self.advance()
            if kind == "true":
                return TRUE
            if kind == "false":
                return FALSE
            if kind == "var":
                return Formula(Op.VAR, (), tok.text)
            if kind == "path":
                return self.path_formula(tok)
            if kind == "atom":
                return Formula(Op.ATOM, (), self._atom_name(tok))
            raise self.error(f"operator {tok.text!r} needs an operand", {"formula"}, tok)
        found = tok.text or "end of input"
        raise self.error(f"unexpected {found!r}", {"formula"})

    def path_formula(self, quant: Token) -> Formula:
        self.expect("LPAREN", "'('")
        left = self.iff()
        tok = self.peek()
        if not (tok.kind == "IDENT" and tok.text in LTL_BINARY):
            raise self.error(f"unexpected {tok.text or 'end of input'!r}", {"U", "W"})
        self.advance()
        right = self.iff()
        self.expect("RPAREN", "')'")
        op = Op[quant.text + tok.text]
        return Formula(op, (left, right))

    # -- identifier classification -------------------------------------------

    def _ident_kind(self, tok: Token) -> str:
        text = tok.text
        if text == "true":
            return "true"
        if text == "false":
            return "false"
        logic = self.logic
        if logic is Logic.LTL:
            if text in LTL_BINARY:
                return "binary"
            if _XGF.fullmatch(text):
                return "ltl_prefix"
        elif logic is Logic.CTL:
            if text in CTL_UNARY:
                return "ctl_prefix"
            if text in ("A", "E") and self.peek(1).kind == "LPAREN":
                return "path"
            if text in LTL_BINARY:
                return "binary"
        elif logic is Logic.MU:
            if text in ("mu", "nu"):
                return "binder"
            if text[0].isupper():
                return "var"
        return "atom"

    def _check_name(self, tok: Token) -> str:
        if tok.text.startswith("_"):
            if not (self.allow_reserved and tok.text.startswith(RESERVED_PREFIXES)):
                raise self.error(f"reserved name {tok.text!r}", {"identifier"}, tok)
        return tok.text

    def _atom_name(self, tok: Token) -> str:
        return self._check_name(tok)

    def _require(self, logic: Logic, tok: Token) -> None:
        if self.logic is not logic:
            raise self.error(
                f"operator {tok.text!r} is not available in {self.logic.value.upper()}", (), tok
            )


def parse_formula(
    text: str,
    logic: Logic | str | None = None,
    *,
    monotonic: bool = True,
    allow_reserved: bool = False,
) -> Formula:
    """Parse a (contextual) formula of ``logic``; ``None`` infers the logic."""
    logic = guess_logic(text) if logic is None else Logic.parse(logic)
    phi = _Parser(text, logic, allow_reserved).parse_top()
    check_polarity(phi, monotonic=monotonic)
    return phi


def parse_context(text: str, logic: Logic | str, *, monotonic: bool = True) -> Formula:
    """Parse a context: a formula with holes and no context applications."""
    ctx = parse_formula(text, logic, monotonic=monotonic)
    if context_vars(ctx):
        raise ParseError("contexts may not contain context applications")
    check_context(ctx, monotonic=monotonic)
    return ctx


def parse_instantiation(
    text: str, logic: Logic | str, *, monotonic: bool = True
) -> dict[str, Formula]:
    """Parse ``c := ctx; d := ctx`` (``;`` or newlines separate bindings)."""
    sigma: dict[str, Formula] = {}
    for chunk in re.split(r"[;\n]", re.sub(r"#[^\n]*", "", text)):
        if not chunk.strip():
            continue
        m = re.fullmatch(r"\s*([A-Za-z][A-Za-z0-9_]*)\s*(?::=|=)(.*)", chunk, re.S)
        if m is None:
            raise ParseError(f"expected 'name := context', got {chunk.strip()!r}")
        sigma[m.group(1)] = parse_context(m.group(2), logic, monotonic=monotonic)
    return sigma


# -- printing ----------------------------------------------------------------

_BINARY = {
    Op.IFF: ("<->", 1, "left"),
    Op.IMPLIES: ("->", 2, "right"),
    Op.OR: ("|", 3, "left"),
    Op.AND: ("&", 4, "left"),
    Op.U: ("U", 5, "right"),
    Op.W: ("W", 5, "right"),
}
_PREFIX = {
    Op.NOT: "!",
    Op.X: "X ",
    Op.G: "G ",
    Op.F: "F ",
    Op.AX: "AX ",
    Op.EX: "EX ",
    Op.AG: "AG ",
    Op.EG: "EG ",
    Op.AF: "AF ",
    Op.EF: "EF ",
    Op.DIA: "<.>",
    Op.BOX: "[.]",
}
_PATH = {Op.AU: ("A", "U"), Op.AW: ("A", "W"), Op.EU: ("E", "U"), Op.EW: ("E", "W")}
_UNARY_LEVEL = 6
_ATOMIC_LEVEL = 7


def _level(phi: Formula) -> int:
    if phi.op in _BINARY:
        return _BINARY[phi.op][1]
    if phi.op in _PREFIX:
        return _UNARY_LEVEL
    if phi.op in (Op.MU, Op.NU):
        return 0
    return _ATOMIC_LEVEL


def print_formula(phi: Formula) -> str:
    """Render ``phi`` so that :func:`parse_formula` gives it back unchanged.

    Operands of a binary connective that are themselves binary connectives of
    a different kind are always parenthesised, which keeps mixed ``&``/``|``
    chains readable; same-kind chains follow associativity.
    """
    memo: dict[Formula, str] = {}

    def wrap(child: Formula, parent: Formula, side: str | None) -> str:
        s = go(child)
        cl = _level(child)
        if child.op in (Op.MU, Op.NU):
            return f"({s})"
        if parent.op in _BINARY:
            if child.op in _BINARY:
                _, _, assoc = _BINARY[parent.op]
                same = child.op is parent.op or (
                    {child.op, parent.op} <= {Op.U, Op.W}
                )
                if not same or assoc != side:
                    return f"({s})"
            return s
        # prefix operator
        if cl < _UNARY_LEVEL:
            return f"({s})"
        if parent.op is Op.NOT and child.op is Op.ATOM:
            return f"({s})"
        return s

    def go(node: Formula) -> str:
        hit = memo.get(node)
        if hit is not None:
            return hit
        op = node.op
        if op is Op.TRUE:
            out = "true"
        elif op is Op.FALSE:
            out = "false"
        elif op in (Op.ATOM, Op.VAR):
            out = node.name
        elif op is Op.NATOM:
            out = f"!{node.name}"
        elif op is Op.HOLE:
            out = "@hole"
        elif op is Op.APPLY:
            out = f"{node.name}[{go(node.args[0])}]"
        elif op in _BINARY:
            sym = _BINARY[op][0]
            left = wrap(node.args[0], node, "left")
            right = wrap(node.args[1], node, "right")
            out = f"{left} {sym} {right}"
        elif op in _PREFIX:
            out = _PREFIX[op] + wrap(node.args[0], node, None)
        elif op in _PATH:
            quant, kw = _PATH[op]
            out = f"{quant}({go(node.args[0])} {kw} {go(node.args[1])})"
        elif op in (Op.MU, Op.NU):
            out = f"{op.value} {node.name}. {go(node.args[0])}"
        else:
            raise AssertionError(op)
        memo[node] = out
        return out

    return go(phi)
