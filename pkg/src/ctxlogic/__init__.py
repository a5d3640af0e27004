"""Decision procedures for formulas with context variables.

A context variable ``c`` stands for an arbitrary formula with a hole; a
claim about ``c[p]`` holds when it holds for every way of filling ``c``.
Claims are reduced to ordinary validity (canonical instantiation or the
polynomial equivalid formula) and decided by the bundled propositional,
LTL and CTL backends, or attacked by counterexample search.
"""

from .check import CheckConfig, check
from .errors import CtxLogicError
from .formula import Formula, Logic
from .parser import parse_formula, print_formula
from .reduction import canonical_reduction, equivalid_formula, reduce
from .search import SearchBudget, refute
from .verdict import Verdict

__all__ = [
    "CheckConfig",
    "CtxLogicError",
    "Formula",
    "Logic",
    "SearchBudget",
    "Verdict",
    "canonical_reduction",
    "check",
    "equivalid_formula",
    "parse_formula",
    "print_formula",
    "reduce",
    "refute",
]
