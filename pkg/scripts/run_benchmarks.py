"""Run the bundled suites under both reductions and write one JSON report.

    python3 scripts/run_benchmarks.py --suites rules mutated stress2 --out results/bench.json
"""

from __future__ import annotations

import argparse
import json
import resource
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from ctxlogic.check import CheckConfig, check, expected_outcome
from ctxlogic.corpus import SUITES, suite
from ctxlogic.errors import BlowupLimit, ResourceLimit
from ctxlogic.report import verdict_to_json


@dataclass
class BenchConfig:
    suites: list[str] = field(default_factory=lambda: ["rules", "mutated", "remarks", "stress1", "stress2"])
    methods: list[str] = field(default_factory=lambda: ["equivalid", "canonical"])
    time_limit: float | None = 600.0
    stress_max: int | None = None  # largest n of the stress families; None: the defaults
    out: str | None = None


def run_entry(entry, method: str, cfg: BenchConfig) -> dict:
    start = time.perf_counter()
    row = {"suite_id": entry.id, "method": method, "expect": entry.expect}
    try:
        lhs, rhs = entry.formulas()
        v = check(entry.kind, lhs, rhs, entry.logic, CheckConfig(method=method, time_limit=cfg.time_limit))
    except (ResourceLimit, BlowupLimit) as exc:
        row.update(outcome="unknown", status="unknown", reason=type(exc).__name__)
    else:
        rep = verdict_to_json(v)
        row.update(outcome=v.outcome, backend=v.backend, stats=rep["stats"])
        if v.outcome == "unknown":
            row["status"] = "unknown"
        else:
            holds = v.outcome == expected_outcome(entry.kind)
            row["status"] = "ok" if holds == entry.should_hold else "mismatch"
    row["seconds"] = round(time.perf_counter() - start, 3)
    return row


def entries_for(name: str, cfg: BenchConfig):
    if name in ("stress1", "stress2") and cfg.stress_max:
        return [e for n in range(1, cfg.stress_max + 1) for e in suite(name, n)]
    return suite(name)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--suites", nargs="+", choices=SUITES, default=BenchConfig().suites)
    ap.add_argument("--methods", nargs="+", choices=("equivalid", "canonical"), default=BenchConfig().methods)
    ap.add_argument("--time-limit", type=float, default=BenchConfig.time_limit)
    ap.add_argument("--stress-max", type=int)
    ap.add_argument("--out")
    args = ap.parse_args(argv)
    cfg = BenchConfig(args.suites, args.methods, args.time_limit, args.stress_max, args.out)

    sys.setrecursionlimit(20_000)
    rows = []
    for name in cfg.suites:
        for entry in entries_for(name, cfg):
            for method in cfg.methods:
                row = run_entry(entry, method, cfg)
                row["suite"] = name
                rows.append(row)
                print(f"{name:<8} {entry.id:<12} {method:<10} {row['outcome']:<16} {row['status']:<9} {row['seconds']:8.2f}s",
                      flush=True)
    peak_mb = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss / 1024
    summary = {s: sum(r["status"] == s for r in rows) for s in ("ok", "mismatch", "unknown")}
    print(f"summary: {summary}; peak RSS {peak_mb:.0f} MB")
    if cfg.out:
        Path(cfg.out).parent.mkdir(parents=True, exist_ok=True)
        Path(cfg.out).write_text(json.dumps(
            {"config": asdict(cfg), "summary": summary, "peak_rss_mb": round(peak_mb), "rows": rows}, indent=2))
    return 1 if summary["mismatch"] else 0


if __name__ == "__main__":
    sys.exit(main())
