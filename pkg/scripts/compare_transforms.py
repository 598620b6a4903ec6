#!/usr/bin/env python3
"""Run every suite twice, transformations on and off, and compare.

    python3 scripts/make_suites.py --out benchmarks
    python3 scripts/compare_transforms.py benchmarks --timeout 10

Prints the per-instance table for both modes plus a verdict-agreement
summary.  With the transformations on there should be no budget rows at
all; with them off, partially unbounded instances are expected to time
out or exhaust their branch limit.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from mehsolve.bench import format_report, run_bench
from mehsolve.solver import SolveOptions


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("root", help="directory tree containing .smt2 files")
    ap.add_argument("--timeout", type=float, default=10.0)
    ap.add_argument("--branch-limit", type=int, default=20000)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()

    paths = sorted(str(p) for p in Path(args.root).rglob("*.smt2"))
    if not paths:
        print(f"no .smt2 files under {args.root}", file=sys.stderr)
        return 1

    on = run_bench(paths, SolveOptions(time_budget=args.timeout), jobs=args.jobs)
    off = run_bench(
        paths,
        SolveOptions(transforms_enabled=False, time_budget=args.timeout,
                     branch_limit=args.branch_limit),
        jobs=args.jobs)

    print("== transformations on ==")
    print(format_report(on))
    print("== transformations off ==")
    print(format_report(off))

    agree = disagree = undecided = 0
    for a, b in zip(on, off):
        if b.verdict in ("budget", "error") or a.verdict in ("budget", "error"):
            undecided += 1
        elif a.verdict == b.verdict:
            agree += 1
        else:
            disagree += 1
            print(f"DISAGREEMENT on {a.name}: on={a.verdict} off={b.verdict}")
    print(f"agreement: {agree} agree, {disagree} disagree, "
          f"{undecided} undecided (budget/error)")
    return 1 if disagree else 0


if __name__ == "__main__":
    raise SystemExit(main())
