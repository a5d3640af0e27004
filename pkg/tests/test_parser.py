import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxlogic.errors import LogicError, NonMonotonicHole, NNFError, ParseError
from ctxlogic.formula import (
    HOLE,
    And,
    Apply,
    Atom,
    Diamond,
    Globally,
    Implies,
    Logic,
    Mu,
    NegAtom,
    Next,
    Not,
    Op,
    Or,
    Until,
    Var,
)
from ctxlogic.parser import (
    guess_logic,
    parse_context,
    parse_formula,
    parse_instantiation,
    print_formula,
    tokenize,
)

from gen import contexts, formulas

CVARS = ("c", "d")


@pytest.mark.parametrize("logic", list(Logic))
@given(data=st.data())
def test_print_then_parse_is_identity(logic, data):
    phi = data.draw(formulas(logic, 5, CVARS, 3))
    assert parse_formula(print_formula(phi), logic) == phi


@pytest.mark.parametrize("logic", list(Logic))
@given(data=st.data())
def test_context_roundtrip(logic, data):
    ctx = data.draw(contexts(logic, 4))
    assert parse_context(print_formula(ctx), logic) == ctx


def test_binary_precedence():
    a, b, c = Atom("a"), Atom("b"), Atom("c")
    assert parse_formula("a | b & c", "prop") == Or(a, And(b, c))
    assert parse_formula("a & b | c", "prop") == Or(And(a, b), c)
    assert parse_formula("a -> b -> c", "prop") == Implies(a, Implies(b, c))
    assert parse_formula("a | b -> c", "prop") == Implies(Or(a, b), c)
    assert parse_formula("a U b U c", "ltl") == Until(a, Until(b, c))
    assert parse_formula("a & b U c", "ltl") == And(a, Until(b, c))


def test_prefix_binds_tightest():
    a, b = Atom("a"), Atom("b")
    assert parse_formula("!a U b", "ltl") == Until(NegAtom("a"), b)
    assert parse_formula("G a & b", "ltl") == And(Globally(a), b)
    assert parse_formula("X X a", "ltl") == Next(Next(a))


def test_fused_temporal_prefixes():
    assert parse_formula("GF p", "ltl") == parse_formula("G F p", "ltl")
    assert parse_formula("FG p", "ltl") == parse_formula("F (G p)", "ltl")


def test_binder_extends_right():
    phi = parse_formula("mu X. p | <.>X", "mu")
    assert phi.op is Op.MU
    assert phi.args[0].op is Op.OR
    assert phi == Mu("X", Or(Atom("p"), Diamond(Var("X"))))


def test_context_application_and_holes():
    phi = parse_formula("c[p & d[q]]", "prop")
    assert phi == Apply("c", And(Atom("p"), Apply("d", Atom("q"))))
    assert parse_context("@hole & p", "prop") == And(HOLE, Atom("p"))
    assert parse_context("• | p", "prop") == Or(HOLE, Atom("p"))


def test_unicode_operators():
    assert parse_formula("¬p ∧ q → r ∨ s", "prop") == parse_formula("!p & q -> r | s", "prop")
    assert parse_formula("μX. p ∨ ◇X", "mu") == parse_formula("mu X. p | <.>X", "mu")


def test_ctl_path_quantifiers():
    phi = parse_formula("A(p U q) & E(p W q)", "ctl")
    assert phi.args[0].op is Op.AU and phi.args[1].op is Op.EW


def test_syntax_error_span():
    with pytest.raises(ParseError) as info:
        parse_formula("p & & q", "prop")
    err = info.value
    assert err.span.line == 1 and err.span.column == 5
    assert err.span.begin == 4
    assert err.expected


def test_syntax_error_on_second_line():
    with pytest.raises(ParseError) as info:
        parse_formula("p &\n  (q |", "prop")
    assert info.value.span.line == 2


def test_bad_character():
    with pytest.raises(ParseError) as info:
        parse_formula("p $ q", "prop")
    assert info.value.span.column == 3


def test_operator_outside_logic():
    with pytest.raises((ParseError, LogicError)):
        parse_formula("AG p", "ltl")
    with pytest.raises((ParseError, LogicError)):
        parse_formula("p U q", "ctl")


def test_reserved_atoms():
    with pytest.raises(ParseError):
        parse_formula("_ctx_c_0 & p", "prop")
    assert parse_formula("_ctx_c_0 & p", "prop", allow_reserved=True).op is Op.AND


def test_negated_hole_is_rejected_in_monotonic_mode():
    with pytest.raises(NonMonotonicHole):
        parse_context("!@hole", "prop")
    with pytest.raises(NonMonotonicHole):
        parse_context("@hole <-> p", "prop")
    assert parse_context("!@hole", "prop", monotonic=False) == Not(HOLE)


def test_negative_fixpoint_variable_is_rejected():
    with pytest.raises(NNFError):
        parse_formula("mu X. !X", "mu")


def test_instantiation_text():
    sigma = parse_instantiation("c := @hole & p; d := G @hole", "ltl")
    assert sigma["c"] == And(HOLE, Atom("p"))
    assert sigma["d"].op is Op.G
    with pytest.raises(ParseError):
        parse_instantiation("c @hole", "ltl")


def test_guess_logic():
    assert guess_logic("p & q") is Logic.PROP
    assert guess_logic("G F p") is Logic.LTL
    assert guess_logic("A(p U q)") is Logic.CTL
    assert guess_logic("nu X. [.]X") is Logic.MU


def test_tokens_skip_comments():
    kinds = [t.kind for t in tokenize("p # a comment\n& q")]
    assert kinds == ["IDENT", "AND", "IDENT", "EOF"]
