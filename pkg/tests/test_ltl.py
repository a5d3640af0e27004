import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxlogic.errors import ResourceLimit, TimeBudget
from ctxlogic.formula import Logic, conj
from ctxlogic.kripke import all_lassos, eval_lasso_direct
from ctxlogic.ltl import ltl_sat, ltl_valid, simplify
from ctxlogic.parser import parse_formula

from gen import random_formula

SMALL = list(all_lassos(("p", "q"), 3))


@given(st.integers(0, 2**32 - 1))
def test_engines_agree_and_small_models_are_found(seed):
    phi = random_formula(random.Random(seed), Logic.LTL, 4, ("p", "q"))
    sym = ltl_sat(phi, engine="symbolic")
    exp = ltl_sat(phi, engine="explicit")
    assert sym.outcome == exp.outcome
    if any(eval_lasso_direct(l, phi) for l in SMALL):
        assert sym.outcome == "satisfiable"
    for v in (sym, exp):
        if v.model is not None:
            assert eval_lasso_direct(v.model, phi)


@given(st.integers(0, 2**32 - 1))
def test_simplification_preserves_meaning(seed):
    phi = random_formula(random.Random(seed), Logic.LTL, 5, ("p", "q"))
    s = simplify(phi)
    assert all(eval_lasso_direct(l, s) == eval_lasso_direct(l, phi) for l in SMALL)


@pytest.mark.parametrize(
    "text",
    [
        "G p -> F p",
        "G F p <-> G F F p",
        "(p U q) -> F q",
        "G (p -> X p) -> (p -> G p)",
        "F G p -> G F p",
        "!(p U q) <-> (!q W (!p & !q))",
    ],
)
def test_known_validities(text):
    phi = parse_formula(text, "ltl")
    for engine in ("symbolic", "explicit"):
        assert ltl_valid(phi, engine=engine).outcome == "valid"


def test_invalid_formula_gets_counterexample():
    phi = parse_formula("G F p -> F G p", "ltl")
    v = ltl_valid(phi)
    assert v.outcome == "not_valid" and not eval_lasso_direct(v.model, phi)


def _responses(n):
    return conj([parse_formula(f"G (r{i} -> F g{i})", "ltl") for i in range(n)])


def test_explicit_state_cap():
    with pytest.raises(ResourceLimit):
        ltl_sat(_responses(6), state_cap=10, engine="explicit")


def test_time_budget():
    with pytest.raises(TimeBudget):
        ltl_sat(_responses(8), time_limit=0.0, engine="explicit")


def test_unknown_engine():
    with pytest.raises(ValueError):
        ltl_sat(parse_formula("p", "ltl"), engine="nope")
