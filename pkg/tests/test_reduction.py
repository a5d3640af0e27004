import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from ctxlogic.check import CheckConfig, check_sat, check_valid
from ctxlogic.errors import BlowupLimit, LogicError
from ctxlogic.formula import (
    Apply,
    Atom,
    Iff,
    Implies,
    Logic,
    Op,
    free_vars,
    instantiate,
    size,
)
from ctxlogic.kripke import (
    Lasso,
    eval_ctl_direct,
    lasso_positions,
    mc_eval,
    random_kripke,
    random_lasso,
)
from ctxlogic.parser import parse_formula, print_formula
from ctxlogic.reduction import (
    canonical_instantiation,
    canonical_reduction,
    context_subformulas,
    decontextualize,
    equivalid_formula,
    reduce,
)

from gen import ATOMS, random_formula, random_instantiation
from oracles import (
    brute_sat,
    prop_contextual_valid_by_enumeration,
    semantic_prop_contexts,
    truth_table,
)


def test_fresh_atoms_follow_preorder():
    phi = parse_formula("c[G F p] <-> ((G F p & c[true]) | c[false])", "ltl")
    occ = context_subformulas(phi)
    assert [o.fresh_atom for o in occ] == ["_ctx_c_0", "_ctx_c_1", "_ctx_c_2"]
    assert print_formula(decontextualize(phi).decon) == "_ctx_c_0 <-> ((G F p & _ctx_c_1) | _ctx_c_2)"


def test_nested_occurrences_get_decontextualised_guards():
    phi = parse_formula("c[p & d[q]]", "prop")
    occ = {o.fresh_atom: o for o in context_subformulas(phi)}
    assert print_formula(occ["_ctx_c_0"].guard) == "p & _ctx_d_1"


def test_propositional_canonical_context_shape():
    phi = parse_formula("c[p] <-> (p & c[true] | !p & c[false])", "prop")
    sigma = canonical_instantiation(phi, Logic.PROP)
    assert print_formula(sigma["c"]) == (
        "((@hole -> p) -> _ctx_c_0) & ((@hole -> true) -> _ctx_c_1) & ((@hole -> false) -> _ctx_c_2)"
    )


def test_ltl_canonical_context_has_no_outer_always():
    phi = parse_formula("c[p]", "ltl")
    sigma = canonical_instantiation(phi, Logic.LTL)
    assert print_formula(sigma["c"]) == "G (@hole -> p) -> _ctx_c_0"


def test_equivalid_formula_without_contexts_is_identity():
    phi = parse_formula("G p -> F p", "ltl")
    assert equivalid_formula(phi) == phi


def test_canonical_budget():
    phi = Atom("q")
    for _ in range(7):
        phi = Apply("c", phi)
    with pytest.raises(BlowupLimit) as info:
        canonical_reduction(phi, Logic.PROP)
    assert info.value.size > info.value.limit
    assert size(canonical_reduction(phi, Logic.PROP, budget=10**8)) == info.value.size


def test_mu_non_monotonic_mode_is_rejected():
    phi = parse_formula("c[p]", "mu")
    with pytest.raises(LogicError):
        equivalid_formula(phi, Logic.MU, monotonic=False)
    with pytest.raises(LogicError):
        canonical_reduction(phi, Logic.MU, monotonic=False)


def test_free_variables_in_arguments_become_atoms():
    phi = parse_formula("(mu X. c[X]) <-> c[mu X. c[X]]", "mu")
    art = decontextualize(phi, Logic.MU)
    # binders are renamed apart first, so the two occurrences get distinct atoms
    assert art.freevar_atoms == {"X": "_fv_X", "X1": "_fv_X1"}
    e = equivalid_formula(phi, Logic.MU)
    assert not free_vars(e)
    assert "_fv_X" in print_formula(e)


def test_non_monotonic_mode_changes_the_verdict():
    claim = parse_formula("c[p] -> c[p | q]", "prop")
    for method in ("equivalid", "canonical"):
        mono = check_valid(claim, Logic.PROP, CheckConfig(method=method)).outcome
        free = check_valid(claim, Logic.PROP, CheckConfig(method=method, monotonic=False)).outcome
        assert (mono, free) == ("valid", "not_valid")
    congr = parse_formula("(p <-> q) -> (c[p] <-> c[q])", "prop")
    cfg = CheckConfig(monotonic=False)
    assert check_valid(congr, Logic.PROP, cfg).outcome == "valid"


# -- semantic oracles ------------------------------------------------------------


def _small_prop_claim(seed):
    rng = random.Random(seed)
    kw = dict(cvars=("c",), max_apps=2)
    phi = random_formula(rng, Logic.PROP, 3, ("p", "q"), **kw)
    psi = random_formula(rng, Logic.PROP, 3, ("p", "q"), **kw)
    return rng.choice((Implies(phi, psi), Iff(phi, psi), phi))


@given(st.integers(0, 2**32 - 1))
def test_prop_validity_matches_context_enumeration(seed):
    claim = _small_prop_claim(seed)
    truth = prop_contextual_valid_by_enumeration(claim)
    for method in ("equivalid", "canonical"):
        assert (check_valid(claim, Logic.PROP, CheckConfig(method=method)).outcome == "valid") == truth


@given(st.integers(0, 2**32 - 1))
def test_prop_satisfiability_matches_context_enumeration(seed):
    claim = _small_prop_claim(seed)
    names = sorted({"p", "q"})
    truth = any(brute_sat(instantiate({"c": ctx}, claim)) for ctx in semantic_prop_contexts(names))
    for method in ("equivalid", "canonical"):
        v = check_sat(claim, Logic.PROP, CheckConfig(method=method))
        assert (v.outcome == "satisfiable") == truth


def _label(model, logic, atom_values):
    """Extend a model with fresh atoms; values are per-state/position sets or bools."""
    if logic is Logic.PROP:
        return {**model, **atom_values}
    if logic is Logic.LTL:
        n = len(model)
        letters = [set(model.label(i)) | {a for a, pos in atom_values.items() if pos[i]} for i in range(n)]
        stem = len(model.stem)
        return Lasso(tuple(map(frozenset, letters[:stem])), tuple(map(frozenset, letters[stem:])))
    return model.with_labels(atom_values)


def _values(model, logic, phi):
    if logic is Logic.PROP:
        names = sorted(set(model) | {n.name for n in _atoms(phi)})
        row = sum(1 << j for j, a in enumerate(names) if model.get(a, False))
        return bool(truth_table(phi, names)[row])
    if logic is Logic.LTL:
        return tuple(lasso_positions(model, phi))
    if logic is Logic.CTL:
        return eval_ctl_direct(model, phi)
    return mc_eval(model, None, phi)


def _atoms(phi):
    from ctxlogic.formula import subformulas

    return [n for n in subformulas(phi) if n.op in (Op.ATOM, Op.NATOM)]


def _random_model(rng, logic):
    if logic is Logic.PROP:
        return {a: rng.random() < 0.5 for a in ATOMS[:3]}
    if logic is Logic.LTL:
        return random_lasso(rng, 4, ATOMS[:3])
    return random_kripke(rng, rng.randint(1, 4), ATOMS[:3])


@pytest.mark.parametrize("logic", list(Logic))
@given(seed=st.integers(0, 2**32 - 1))
def test_reductions_agree_with_labelled_instances(logic, seed):
    """Labelling each fresh atom with the value of its instantiated context
    subformula makes the premise of the equivalid formula true everywhere,
    and both reductions then take exactly the values of the instance."""
    rng = random.Random(seed)
    kw = dict(cvars=("c", "d"), max_apps=3)
    phi = random_formula(rng, logic, 3, ATOMS[:3], **kw)
    claim = rng.choice((phi, Implies(phi, random_formula(rng, logic, 3, ATOMS[:3], **kw))))
    art = decontextualize(claim, logic)
    if art.freevar_atoms:
        return
    sigma = random_instantiation(rng, logic, sorted({o.variable for o in art.consub}), 2)
    model = _random_model(rng, logic)
    labels = {}
    for o in art.consub:
        inst = instantiate(sigma, Apply(o.variable, o.argument))
        labels[o.fresh_atom] = _values(model, logic, inst)
    extended = _label(model, logic, labels)
    expected = _values(model, logic, instantiate(sigma, art.formula))
    assert _values(extended, logic, reduce(claim, logic, method="equivalid")) == expected
    assert _values(extended, logic, reduce(claim, logic, method="canonical")) == expected
