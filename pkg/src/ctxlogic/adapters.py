"""Text emission for external solvers and a small process-invocation layer.

Tool profiles live in an INI file (path from ``CTXLOGIC_CONFIG``)::

    [profile.minisat]
    command = minisat {file} /dev/stdout
    input = dimacs
    sat_pattern = ^SATISFIABLE
    unsat_pattern = ^UNSATISFIABLE
    timeout_s = 30

``command`` is split with shell quoting rules after ``{file}`` is replaced
by the path of a temporary input file; no shell is involved.  The output is
matched against every ``*_pattern`` (regular expressions, multiline); exactly
one must match.
"""

from __future__ import annotations

import configparser
import os
import re
import shlex
import subprocess
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .errors import ExternalTimeout, ExternalToolError, UnsupportedOperator
from .formula import Formula, Op
from .prop import Cnf
from .verdict import Verdict

CONFIG_ENV = "CTXLOGIC_CONFIG"

# -- DIMACS ------------------------------------------------------------------------


def emit_dimacs(cnf: Cnf) -> str:
    lines = [f"c map {atom} {index}" for atom, index in cnf.atom_map.items()]
    lines.append(f"p cnf {cnf.num_vars} {len(cnf.clauses)}")
    lines.extend(" ".join(str(l) for l in clause) + " 0" if clause else "0" for clause in cnf.clauses)
    return "\n".join(lines) + "\n"


def read_dimacs(text: str) -> Cnf:
    """Parse DIMACS CNF, including the ``c map`` comments written by :func:`emit_dimacs`."""
    atom_map: dict[str, int] = {}
    clauses: list[tuple[int, ...]] = []
    num_vars = None
    expected = None
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("c"):
            parts = line.split()
            if len(parts) == 4 and parts[1] == "map":
                atom_map[parts[2]] = int(parts[3])
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ValueError(f"line {lineno}: malformed header {line!r}")
            num_vars, expected = int(parts[2]), int(parts[3])
            continue
        if num_vars is None:
            raise ValueError(f"line {lineno}: clause before the header")
        for tok in line.split():
            lit = int(tok)
            if lit == 0:
                clauses.append(tuple(current))
                current = []
            else:
                if abs(lit) > num_vars:
                    raise ValueError(f"line {lineno}: variable {abs(lit)} exceeds header")
                current.append(lit)
    if current:
        raise ValueError("last clause is not terminated by 0")
    if num_vars is None:
        raise ValueError("missing 'p cnf' header")
    if expected != len(clauses):
        raise ValueError(f"header announces {expected} clauses, found {len(clauses)}")
    return Cnf(clauses, num_vars, atom_map)


# -- temporal dialects --------------------------------------------------------------

_BOOL = {Op.AND: "&", Op.OR: "|", Op.IMPLIES: "->", Op.IFF: "<->"}
_LTL_UNARY = {Op.X: "X", Op.G: "G", Op.F: "F"}
_LTL_BINARY = {Op.U: "U", Op.W: "W"}
_CTL_UNARY = {Op.AX: "AX", Op.EX: "EX", Op.AG: "AG", Op.EG: "EG", Op.AF: "AF", Op.EF: "EF"}


def _emit(phi: Formula, extra) -> str:
    memo: dict[Formula, str] = {}

    def go(node: Formula) -> str:
        hit = memo.get(node)
        if hit is None:
            hit = step(node)
            memo[node] = hit
        return hit

    def step(node: Formula) -> str:
        op = node.op
        if op is Op.TRUE:
            return "1"
        if op is Op.FALSE:
            return "0"
        if op is Op.ATOM:
            return node.name
        if op is Op.NATOM:
            return f"(! {node.name})"
        if op is Op.NOT:
            return f"(! {go(node.args[0])})"
        if op in _BOOL:
            return f"({go(node.args[0])} {_BOOL[op]} {go(node.args[1])})"
        out = extra(node, go)
        if out is None:
            raise UnsupportedOperator(f"operator {op.value} cannot be written in this dialect")
        return out

    return go(phi)


def emit_ltl_text(phi: Formula) -> str:
    """Fully parenthesised LTL text: ``G F p`` becomes ``(G (F p))``."""

    def extra(node: Formula, go) -> str | None:
        if node.op in _LTL_UNARY:
            return f"({_LTL_UNARY[node.op]} {go(node.args[0])})"
        if node.op in _LTL_BINARY:
            return f"({go(node.args[0])} {_LTL_BINARY[node.op]} {go(node.args[1])})"
        return None

    return _emit(phi, extra)


def emit_ctl_text(phi: Formula, *, encode_weak: bool = False) -> str:
    """CTL text with ``A(. U .)`` and ``E(. U .)``.

    The target dialect has no weak until; with ``encode_weak`` it is rewritten
    as ``A(a W b) = !E(!b U !(a | b))`` and ``E(a W b) = E(a U b) | EG a``,
    otherwise :class:`UnsupportedOperator` is raised.
    """

    def extra(node: Formula, go) -> str | None:
        op = node.op
        if op in _CTL_UNARY:
            return f"({_CTL_UNARY[op]} {go(node.args[0])})"
        if op in (Op.AU, Op.EU):
            q = "A" if op is Op.AU else "E"
            return f"{q}({go(node.args[0])} U {go(node.args[1])})"
        if op in (Op.AW, Op.EW):
            if not encode_weak:
                raise UnsupportedOperator(
                    "weak until is not part of the CTL dialect (pass encode_weak to rewrite it)"
                )
            a, b = go(node.args[0]), go(node.args[1])
            if op is Op.AW:
                return f"(! E((! {b}) U (! ({a} | {b}))))"
            return f"(E({a} U {b}) | (EG {a}))"
        return None

    return _emit(phi, extra)


# -- external processes ---------------------------------------------------------------

_PATTERN_OUTCOMES = {
    "valid_pattern": "valid",
    "invalid_pattern": "not_valid",
    "sat_pattern": "satisfiable",
    "unsat_pattern": "unsatisfiable",
}


@dataclass(frozen=True)
class ToolProfile:
    name: str
    command: str
    patterns: dict  # outcome -> compiled regex
    timeout_s: float = 60.0
    input: str = "text"

    @classmethod
    def from_section(cls, name: str, section) -> ToolProfile:
        if "command" not in section:
            raise ValueError(f"profile {name!r} has no command")
        if "{file}" not in section["command"]:
            raise ValueError(f"profile {name!r}: command needs a {{file}} placeholder")
        patterns = {
            outcome: re.compile(section[key], re.MULTILINE)
            for key, outcome in _PATTERN_OUTCOMES.items()
            if key in section
        }
        if not patterns:
            raise ValueError(f"profile {name!r} defines no output pattern")
        return cls(
            name,
            section["command"],
            patterns,
            float(section.get("timeout_s", 60)),
            section.get("input", "text"),
        )


def load_profiles(path: str | None = None) -> dict[str, ToolProfile]:
    """Profiles from ``path`` or ``$CTXLOGIC_CONFIG``; empty when neither is set."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    parser = configparser.ConfigParser(interpolation=None)
    if not parser.read(path):
        raise FileNotFoundError(f"configuration file {path} not found")
    out = {}
    for section in parser.sections():
        if section.startswith("profile."):
            name = section[len("profile."):]
            out[name] = ToolProfile.from_section(name, parser[section])
    return out


def run_external(text: str, profile: ToolProfile) -> Verdict:
    """Run the profile's command on ``text`` and map its output to a verdict."""
    with tempfile.TemporaryDirectory(prefix="ctxlogic-") as tmp:
        path = os.path.join(tmp, "input.cnf" if profile.input == "dimacs" else "input.txt")
        with open(path, "w") as fh:
            fh.write(text)
        argv = shlex.split(profile.command.replace("{file}", shlex.quote(path)))
        try:
            proc = subprocess.run(
                argv, capture_output=True, text=True, timeout=profile.timeout_s, check=False
            )
        except subprocess.TimeoutExpired as exc:
            out = exc.stdout or ""
            if isinstance(out, bytes):
                out = out.decode(errors="replace")
            raise ExternalTimeout(
                f"{profile.name} did not finish within {profile.timeout_s} s", out
            ) from None
        except OSError as exc:
            raise ExternalToolError(f"cannot run {profile.name}: {exc}") from None
    output = proc.stdout + proc.stderr
    matches = [outcome for outcome, rx in profile.patterns.items() if rx.search(proc.stdout)]
    # SAT solvers conventionally exit with 10/20; accept those when a pattern matched
    if proc.returncode not in (0, 10, 20) or (proc.returncode and not matches):
        raise ExternalToolError(f"{profile.name} exited with status {proc.returncode}", output)
    if len(matches) != 1:
        what = "no" if not matches else "more than one"
        raise ExternalToolError(f"{what} output pattern of {profile.name} matched", output)
    return Verdict(matches[0], backend=f"external:{profile.name}", detail=proc.stdout.strip())


def run_many(texts: list[str], profile: ToolProfile, max_procs: int = 4) -> list[Verdict]:
    """Run several independent checks, at most ``max_procs`` at a time, in input order."""
    with ThreadPoolExecutor(max_workers=max_procs) as pool:
        return list(pool.map(lambda t: run_external(t, profile), texts))
