import pytest

from ctxlogic.check import CheckConfig, check, combine, expected_outcome
from ctxlogic.corpus import Entry, load_suite, stress1, stress2, suite
from ctxlogic.errors import LogicError
from ctxlogic.formula import Logic, context_vars
from ctxlogic.parser import parse_formula
from ctxlogic.search import SearchBudget
from ctxlogic.verdict import Verdict


def V(outcome, model=None):
    return Verdict(outcome, method="m", model=model)


@pytest.mark.parametrize(
    "fwd, bwd, out, model",
    [
        ("valid", "valid", "equivalent", None),
        ("valid", "not_valid", "lhs_implies_rhs", "b"),
        ("not_valid", "valid", "rhs_implies_lhs", "a"),
        ("not_valid", "not_valid", "incomparable", "a"),
        ("unknown", "not_valid", "refuted", "b"),
        ("not_valid", "unknown", "refuted", "a"),
        ("unknown", "valid", "unknown", None),
        ("valid", "unknown", "unknown", None),
    ],
)
def test_combine_table(fwd, bwd, out, model):
    v = combine(V(fwd, "a"), V(bwd, "b"))
    assert v.outcome == out and v.model == model


def test_unknown_outcomes_are_rejected():
    with pytest.raises(ValueError):
        Verdict("maybe")


def test_kinds():
    p = lambda t: parse_formula(t, "ltl")
    assert check("valid", p("c[p] -> c[p | q]"), logic=Logic.LTL).outcome == "valid"
    assert check("sat", p("c[p] & !c[true]")).outcome == "unsatisfiable"
    assert check("implies", p("c[p & q]"), p("c[p]")).outcome == "lhs_implies_rhs"
    assert check("equiv", p("c[p & q]"), p("c[p]")).outcome == "lhs_implies_rhs"
    v = check("equiv", p("c[p]"), p("c[p & q]"))
    assert v.outcome == "rhs_implies_lhs" and v.model is not None
    with pytest.raises(ValueError):
        check("entails", p("p"))
    with pytest.raises(ValueError):
        CheckConfig(method="magic")


def test_single_query_equivalence():
    lhs = parse_formula("c[G F p]", "ltl")
    rhs = parse_formula("(G F p & c[true]) | c[false]", "ltl")
    assert check("equiv", lhs, rhs, cfg=CheckConfig(single_query=True)).outcome == "equivalent"
    v = check("equiv", lhs, parse_formula("c[F p]", "ltl"), cfg=CheckConfig(single_query=True))
    assert v.outcome == "not_valid"


def test_mu_needs_search():
    phi = parse_formula("c[p] -> c[p | q]", "mu")
    with pytest.raises(LogicError):
        check("valid", phi, logic=Logic.MU)
    v = check("valid", phi, logic=Logic.MU, cfg=CheckConfig(method="search", search=SearchBudget(max_candidates=200, max_states=2)))
    assert v.outcome == "unknown"


def test_expected_outcomes():
    assert [expected_outcome(k) for k in ("valid", "sat", "equiv", "implies")] == [
        "valid", "satisfiable", "equivalent", "lhs_implies_rhs",
    ]


@pytest.mark.parametrize("name", ["rules", "mutated", "remarks"])
def test_bundled_suites_parse(name):
    entries = load_suite(name)
    assert entries and len({e.id for e in entries}) == len(entries)
    for e in entries:
        lhs, rhs = e.formulas()
        assert e.kind in ("valid", "equiv", "implies")
        assert (rhs is None) == (e.kind == "valid")


def test_suite_sizes():
    assert len(suite("rules")) == 7
    mutated = suite("mutated")
    assert len(mutated) == 29 and sum(not e.should_hold for e in mutated) == 24
    assert [e.id for e in suite("stress2")] == ["stress2-1", "stress2-2", "stress2-3"]
    with pytest.raises(ValueError):
        load_suite("stress1")


def test_stress_families_shape():
    e = stress1(3)
    lhs, rhs = e.formulas()
    assert set(context_vars(lhs)) == set(context_vars(rhs)) == {"c1", "c2", "c3"}
    assert e.lhs.startswith("c1[a1 U c2[a2 W c3[a3 U a4]]] W g")
    e = stress2(2)
    assert e.lhs == "c[F G c[G F c[p]]]"
    with pytest.raises(ValueError):
        stress1(0)


def test_entry_expectations():
    e = Entry("x", Logic.PROP, "valid", "p", None, "fails")
    assert not e.should_hold
    assert Entry("y", Logic.PROP, "valid", "p", None, "equivalent").should_hold
