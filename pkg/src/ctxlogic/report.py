"""Serialisation of verdicts, models and errors for the JSON reports.

Every report object carries ``"schema": 1``.  Models are encoded as

* ``{"type": "valuation", "values": {atom: bool}}``
* ``{"type": "lasso", "stem": [[atoms]], "cycle": [[atoms]]}``
* ``{"type": "kripke", "states": n, "init": [..], "edges": [[s, t]], "labels": {s: [atoms]}}``

and instantiations as ``{variable: context text}``.
"""

from __future__ import annotations

from typing import Any

from .errors import CtxLogicError
from .kripke import KripkeStructure, Lasso, format_model
from .parser import print_formula
from .verdict import Verdict

SCHEMA = 1


def model_to_json(model: Any) -> dict | None:
    if model is None:
        return None
    if isinstance(model, Lasso):
        return {
            "type": "lasso",
            "stem": [sorted(letter) for letter in model.stem],
            "cycle": [sorted(letter) for letter in model.cycle],
        }
    if isinstance(model, KripkeStructure):
        return {
            "type": "kripke",
            "states": model.n,
            "init": sorted(model.init),
            "edges": [[s, t] for s, ts in enumerate(model.succ) for t in ts],
            "labels": {str(s): sorted(lab) for s, lab in enumerate(model.labels) if lab},
        }
    if isinstance(model, dict):
        return {"type": "valuation", "values": {k: bool(v) for k, v in sorted(model.items())}}
    raise TypeError(f"cannot serialise model of type {type(model).__name__}")


def model_to_text(model: Any) -> str:
    if isinstance(model, dict):
        return "".join(f"{k} {'true' if v else 'false'}\n" for k, v in sorted(model.items()))
    return format_model(model)


def instantiation_to_json(sigma: dict | None) -> dict | None:
    if sigma is None:
        return None
    return {name: print_formula(ctx) for name, ctx in sorted(sigma.items())}


def _plain(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float):
        return round(value, 6)
    return value


def verdict_to_json(v: Verdict, **extra: Any) -> dict:
    out = {
        "schema": SCHEMA,
        **extra,
        "outcome": v.outcome,
        "method": v.method,
        "backend": v.backend,
        "model": model_to_json(v.model),
        "instantiation": instantiation_to_json(v.instantiation),
        "stats": _plain(v.stats),
    }
    if v.detail:
        out["detail"] = v.detail
    return out


def error_to_json(exc: BaseException) -> dict:
    err: dict[str, Any] = {
        "code": getattr(exc, "code", "error"),
        "type": type(exc).__name__,
        "message": str(exc),
    }
    span = getattr(exc, "span", None)
    if span is not None:
        err["span"] = {"begin": span.begin, "end": span.end, "line": span.line, "column": span.column}
    expected = getattr(exc, "expected", None)
    if expected:
        err["expected"] = sorted(expected)
    line = getattr(exc, "line", None)
    if isinstance(exc, CtxLogicError) and line is not None:
        err["line"] = line
    return {"schema": SCHEMA, "error": err}
