#!/usr/bin/env python3
"""Time a full maintenance pass on a large generated library.

The budget we hold ourselves to: a 2000-skill library with 30% seeded rot
diagnoses and maintains in under two seconds on commodity hardware.
"""

import argparse
import time

from skillops.debtgen import build_library
from skillops.harness import exercise_library
from skillops.maint import MaintenanceConfig, run_maintenance


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=2000)
    ap.add_argument("--noise", type=float, default=0.3)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--calls", type=int, default=2, help="probe calls per skill")
    args = ap.parse_args()

    t0 = time.perf_counter()
    lib, _ = build_library(args.n, args.noise, args.seed)
    t_build = time.perf_counter() - t0

    t0 = time.perf_counter()
    trace = exercise_library(lib, calls=args.calls)
    t_trace = time.perf_counter() - t0

    t0 = time.perf_counter()
    new_lib, report = run_maintenance(lib, trace, MaintenanceConfig())
    t_maint = time.perf_counter() - t0

    print(f"build      {t_build:8.3f}s  ({args.n} skills, noise {args.noise})")
    print(f"exercise   {t_trace:8.3f}s  ({len(trace.entries)} invocations)")
    print(f"maintain   {t_maint:8.3f}s  ({report.size_before} -> {report.size_after})")
    for kind, count in sorted(report.action_counts.items()):
        if count:
            print(f"  {kind:14s} {count}")
    print(f"H {report.H_before:.4f} -> {report.H_after:.4f}")
    budget = 2.0
    verdict = "within" if t_maint <= budget else "OVER"
    print(f"maintenance pass is {verdict} the {budget:.1f}s budget")


if __name__ == "__main__":
    main()
