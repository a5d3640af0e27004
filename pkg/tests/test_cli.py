import json
import subprocess
import sys

import pytest

from ctxlogic.cli import main
from ctxlogic.kripke import Lasso, format_model


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def test_equivalence_holds(capsys):
    code, rep = run_json(capsys, "check", "equiv", "c[G F p]", "(G F p & c[true]) | c[false]", "--logic", "ltl")
    assert code == 0
    assert rep["schema"] == 1 and rep["command"] == "check" and rep["kind"] == "equiv"
    assert rep["outcome"] == "equivalent" and rep["model"] is None
    assert set(rep["stats"]) == {"lhs_implies_rhs", "rhs_implies_lhs"}


def test_refutation_reports_a_lasso(capsys):
    code, rep = run_json(capsys, "check", "valid", "c[F p] -> F c[p]")
    assert code == 1
    assert rep["logic"] == "ltl" and rep["outcome"] == "not_valid"
    assert rep["model"]["type"] == "lasso" and rep["model"]["cycle"]


def test_search_reports_instantiation(capsys):
    code, rep = run_json(capsys, "check", "implies", "c[p]", "c[p & q]", "--logic", "prop", "--method", "search")
    assert code == 1
    assert rep["outcome"] == "not_valid" and rep["method"] == "search"
    assert set(rep["instantiation"]) == {"c"}
    assert rep["model"]["type"] == "valuation"


def test_search_exhaustion_is_unknown(capsys):
    code, rep = run_json(
        capsys, "check", "valid", "c[p & q] -> c[p]", "--logic", "prop", "--method", "search",
        "--search-candidates", "50",
    )
    assert code == 2 and rep["outcome"] == "unknown"


def test_sat_and_ctl_model(capsys):
    code, rep = run_json(capsys, "check", "sat", "c[AG p] & AF !p")
    assert code == 0 and rep["outcome"] == "satisfiable"
    code, rep = run_json(capsys, "check", "valid", "c[EF p] -> AF c[p]")
    assert code == 1 and rep["model"]["type"] == "kripke"


def test_text_output(capsys):
    code, out, _ = run(capsys, "check", "valid", "c[p] -> c[p | q]", "--logic", "prop")
    assert code == 0 and out.strip() == "valid"
    code, out, _ = run(capsys, "check", "valid", "p -> q", "--logic", "prop")
    assert code == 1 and out.startswith("not_valid") and "p true" in out


def test_errors_exit_3(capsys):
    code, rep = run_json(capsys, "check", "valid", "p & & q", "--logic", "prop")
    assert code == 3
    assert rep["error"]["code"] == "syntax_error" and rep["error"]["span"]["column"] == 5
    code, _, err = run(capsys, "check", "valid", "p & q")
    assert code == 3 and "--logic" in err
    code, rep = run_json(capsys, "check", "valid", "c[p]", "--logic", "mu")
    assert code == 3 and rep["error"]["code"] == "logic_error"
    code, rep = run_json(capsys, "check", "equiv", "G p", "--logic", "ltl")
    assert code == 3


def test_reduce_emitters(capsys):
    code, out, _ = run(capsys, "reduce", "c[p] -> c[p | q]", "--logic", "prop")
    assert code == 0 and "_ctx_c_0" in out
    code, out, _ = run(capsys, "reduce", "c[p] -> c[p | q]", "--logic", "prop", "--emit", "dimacs")
    assert "p cnf" in out and "c map _ctx_c_0" in out
    code, rep = run_json(capsys, "reduce", "c[G p]", "--logic", "ltl", "--emit", "ltl", "--method", "canonical")
    assert rep["emit"] == "ltl" and rep["method"] == "canonical" and "(G" in rep["formula"]
    code, rep = run_json(capsys, "reduce", "c[A(p W q)]", "--logic", "ctl", "--emit", "ctl")
    assert code == 3 and rep["error"]["code"] == "unsupported_operator"
    code, out, _ = run(capsys, "reduce", "c[E(p W q)]", "--logic", "ctl", "--emit", "ctl", "--encode-weak")
    assert code == 0 and "EG" in out


def test_eval_models(capsys, tmp_path):
    lasso = tmp_path / "l.txt"
    lasso.write_text(format_model(Lasso.of([[]], [["p"]])))
    code, rep = run_json(capsys, "eval", "F p", "--model", str(lasso))
    assert code == 0 and rep["positions"] == [True, True]
    code, rep = run_json(capsys, "eval", "p", "--model", str(lasso), "--logic", "ltl")
    assert code == 1
    k = tmp_path / "k.txt"
    k.write_text("states 2\ninit 0\nedge 0 1\nedge 1 1\nlabel 1 p\n")
    code, rep = run_json(capsys, "eval", "AX p", "--model", str(k))
    assert code == 0 and rep["states"] == [0, 1] and rep["init_holds"]
    val = tmp_path / "v.txt"
    val.write_text("p true\nq 0\n")
    code, out, _ = run(capsys, "eval", "p & !q", "--model", str(val), "--logic", "prop")
    assert code == 0 and out.strip() == "true"
    bad = tmp_path / "bad.txt"
    bad.write_text("states 2\nedge 0 9\n")
    code, rep = run_json(capsys, "eval", "AX p", "--model", str(bad))
    assert code == 3 and rep["error"]["line"] == 2


def test_bench_json(capsys):
    code, rep = run_json(capsys, "bench", "--suite", "stress2", "--n", "1")
    assert code == 0
    assert rep["summary"] == {"ok": 2, "mismatch": 0, "unknown": 0}
    assert {r["method"] for r in rep["entries"]} == {"equivalid", "canonical"}


def test_bench_blowup_is_unknown(capsys):
    code, rep = run_json(capsys, "bench", "--suite", "stress2", "--n", "1", "--method", "canonical", "--budget", "10")
    assert code == 2
    (row,) = rep["entries"]
    assert row["status"] == "unknown" and row["error"]["code"] == "blowup_limit"


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "ctxlogic", "check", "valid", "c[p] -> c[p | q]", "--logic", "prop"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0 and proc.stdout.strip() == "valid"
