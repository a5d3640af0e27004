import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxlogic.errors import ModelFormatError
from ctxlogic.formula import Atom, Logic
from ctxlogic.kripke import (
    KripkeStructure,
    Lasso,
    all_lassos,
    ctl_to_mu,
    eval_ctl_direct,
    eval_lasso_direct,
    fixpoint_valuation,
    format_model,
    lasso_positions,
    mc_eval,
    parse_model,
    random_kripke,
    random_lasso,
    satisfies,
)
from ctxlogic.parser import parse_formula


def test_structure_rejects_dead_ends_and_bad_states():
    with pytest.raises(ValueError):
        KripkeStructure.build(2, [(0, 1)], {})
    with pytest.raises(ValueError):
        KripkeStructure.build(1, [(0, 0)], {}, init=(3,))


def test_with_labels_overrides_only_named_atoms():
    k = KripkeStructure.build(2, [(0, 1), (1, 1)], {0: ["p", "q"], 1: ["p"]})
    k2 = k.with_labels({"q": frozenset({1})})
    assert k2.labels == (frozenset({"p"}), frozenset({"p", "q"}))


@given(st.integers(0, 2**32 - 1))
def test_model_text_roundtrip(seed):
    rng = random.Random(seed)
    k = random_kripke(rng, rng.randint(1, 5), ("p", "q"))
    assert parse_model(format_model(k)) == k
    l = random_lasso(rng, 4, ("p", "q"))
    assert parse_model(format_model(l)) == l


@pytest.mark.parametrize(
    "text, line",
    [
        ("init 0\nstates 2\n", 1),
        ("states 2\nedge 0 5\n", 2),
        ("states 1\nedge 0 0\nfoo 1\n", 3),
        ("states 2\nedge 0 1\n", None),
        ("states 1\nstem 0\n", None),
        ("states x\n", 1),
    ],
)
def test_model_format_errors_carry_lines(text, line):
    with pytest.raises(ModelFormatError) as info:
        parse_model(text)
    assert info.value.line == line


def test_lasso_positions_and_kripke_view():
    l = Lasso.of([["p"]], [[], ["q"]])
    assert len(l) == 3 and l.next(2) == 1
    phi = parse_formula("F q", "ltl")
    assert lasso_positions(l, phi) == [True, True, True]
    assert not eval_lasso_direct(l, parse_formula("G F p", "ltl"))
    assert eval_lasso_direct(l, parse_formula("X (!q U q)", "ltl"))
    k = l.to_kripke()
    assert k.succ == ((1,), (2,), (1,))


def test_all_lassos_counts():
    # one atom: 2 letters; lengths 1..2 with every stem split
    assert len(list(all_lassos(("p",), 2))) == 2 + 2 * 4


def test_mu_reachability_and_invariance():
    k = KripkeStructure.build(3, [(0, 1), (1, 2), (2, 2)], {2: ["p"]})
    ef = parse_formula("mu X. p | <.>X", "mu")
    ag = parse_formula("nu X. p & [.]X", "mu")
    assert mc_eval(k, None, ef) == frozenset({0, 1, 2})
    assert mc_eval(k, None, ag) == frozenset({2})
    assert satisfies(k, ef) and not satisfies(k, ag)
    with pytest.raises(ModelFormatError):
        satisfies(k.with_init(()), ef)


def test_free_variables_read_the_valuation():
    k = KripkeStructure.build(2, [(0, 1), (1, 1)], {})
    phi = parse_formula("<.>Y", "mu")
    assert mc_eval(k, {"Y": frozenset({1})}, phi) == frozenset({0, 1})


@given(st.integers(0, 2**32 - 1))
def test_ctl_labeller_matches_mu_translation(seed):
    from gen import random_formula

    rng = random.Random(seed)
    k = random_kripke(rng, rng.randint(1, 4), ("p", "q"))
    phi = random_formula(rng, Logic.CTL, 4, ("p", "q"))
    assert eval_ctl_direct(k, phi) == mc_eval(k, None, ctl_to_mu(phi))


def test_fixpoint_valuation_order():
    phi = parse_formula("mu X. p | <.>(nu Y. X & [.]Y)", "mu")
    k = random_kripke(random.Random(1), 3, ["p"])
    a = fixpoint_valuation(k, phi)
    assert set(a) == {"X", "Y"}
    assert a["X"] == mc_eval(k, None, phi)
    with pytest.raises(ValueError):
        fixpoint_valuation(k, phi, order=["Y", "X"])
    with pytest.raises(ValueError):
        fixpoint_valuation(k, phi, order=["X"])


def test_atoms_outside_labels_are_false():
    k = KripkeStructure.build(1, [(0, 0)], {})
    assert mc_eval(k, None, Atom("zzz")) == frozenset()
