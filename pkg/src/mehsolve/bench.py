"""Benchmark runner: solve a directory of problems, tabulate the results.

One CSV-like line per instance (name, verdict, time, nodes,
classification) followed by a summary block with the cumulative
solved-instances profile the usual solver plots are drawn from.  Per-file
errors are recorded as rows and do not abort the run.  Instances run on a
process pool when jobs > 1; the per-instance timeout is enforced through
the solver's own time budget.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .model import Sat, Unsat
from .smtlib import parse_file
from .solver import SolveOptions, solve


@dataclass
class BenchRow:
    name: str
    verdict: str            # sat / unsat / budget / error
    seconds: float
    nodes: int = 0
    classification: Optional[str] = None
    error: str = ""


def run_instance(path: str, options: SolveOptions) -> BenchRow:
    name = Path(path).name
    started = time.monotonic()
    try:
        sys = parse_file(path)
        res = solve(sys, options)
    except Exception as exc:  # recorded, not raised: the run continues
        return BenchRow(name, "error", time.monotonic() - started, error=str(exc))
    elapsed = time.monotonic() - started
    if isinstance(res, Sat):
        verdict = "sat"
    elif isinstance(res, Unsat):
        verdict = "unsat"
    else:
        verdict = "budget"
    return BenchRow(name, verdict, elapsed, res.stats.nodes,
                    res.stats.classification)


def run_bench(paths, options: SolveOptions, jobs: int = 1) -> list[BenchRow]:
    paths = [str(p) for p in paths]
    if jobs <= 1:
        return [run_instance(p, options) for p in paths]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(run_instance, paths, [options] * len(paths)))


def format_report(rows: list[BenchRow]) -> str:
    lines = ["name,verdict,seconds,nodes,classification,error"]
    for r in rows:
        lines.append(
            f"{r.name},{r.verdict},{r.seconds:.3f},{r.nodes},"
            f"{r.classification or ''},{r.error}")
    solved = sorted(r.seconds for r in rows if r.verdict in ("sat", "unsat"))
    counts = {}
    for r in rows:
        counts[r.verdict] = counts.get(r.verdict, 0) + 1
    lines.append("")
    lines.append("# summary")
    for verdict in ("sat", "unsat", "budget", "error"):
        if counts.get(verdict):
            lines.append(f"# {verdict}: {counts[verdict]}")
    lines.append(f"# solved: {len(solved)}/{len(rows)}")
    cumulative = 0.0
    for i, s in enumerate(solved, 1):
        cumulative += s
        lines.append(f"# solved<= {i} {cumulative:.3f}s")
    return "\n".join(lines) + "\n"


def bench_directory(directory, options: SolveOptions, jobs: int = 1) -> list[BenchRow]:
    paths = sorted(Path(directory).glob("*.smt2"))
    return run_bench(paths, options, jobs)
