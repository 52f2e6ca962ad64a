#!/usr/bin/env python3
"""End-to-end walkthrough on a small library.

Generates a noisy library, prints its diagnosis, runs maintenance, then
plans and executes a task against the cleaned library.  Everything is
deterministic in the seed.
"""

import argparse

from skillops.cgpd import CgpdConfig, propagate, trigger_set
from skillops.debtgen import build_library
from skillops.harness import SimulatedExecutor, exercise_library
from skillops.health import library_health
from skillops.hseg import build_hseg
from skillops.maint import MaintenanceConfig, run_maintenance
from skillops.planner import (
    PlannerConfig,
    TaskSpec,
    build_plan,
    execute_with_repair,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=60)
    ap.add_argument("--noise", type=float, default=0.4)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    lib, provenance = build_library(args.n, args.noise, args.seed)
    degraded = sum(1 for p in provenance.values() if p != "clean")
    print(f"library: {len(lib)} skills, {degraded} degraded")

    trace = exercise_library(lib)
    g = build_hseg(lib.skills, adapters=lib.adapters)
    health = library_health(lib, g, trace)
    print(f"health H={health.H:.4f} debt={health.debt:.4f}")

    cfg = CgpdConfig(alpha=0.5, tau=0.35)
    result = propagate(g, health.local_risks(), cfg)
    triggered = trigger_set(g, result.risk, lib, cfg.tau)
    print(f"risk propagation: {result.iterations_used} sweeps,"
          f" {len(triggered)} skills above tau={cfg.tau}")

    new_lib, report = run_maintenance(lib, trace, MaintenanceConfig())
    print(f"maintenance: {report.size_before} -> {report.size_after}")
    for line in report.log:
        print(f"  {line}")
    print(f"health H={report.H_before:.4f} -> {report.H_after:.4f}")

    # plan against the first clean skill's own goal and preconditions
    target = next(s for s in new_lib.skills if provenance.get(s.id) == "clean")
    task = TaskSpec(
        id="demo-task",
        goal_text=target.goal.replace("-", " ") + " " + target.body.split("\n")[0],
        state_facts=target.preconditions,
    )
    g2 = build_hseg(new_lib.skills, adapters=new_lib.adapters)
    plan = build_plan(new_lib, g2, task, PlannerConfig())
    print(f"plan for {task.id}: {[s.skill for s in plan.steps]}")

    executor = SimulatedExecutor(new_lib)
    run = execute_with_repair(plan, task, executor, g2)
    outcomes = [e.outcome for e in run.entries]
    print(f"execution: {outcomes.count('success')}/{len(outcomes)} attempts succeeded")
    print(f"external model calls: {executor.external_model_calls}")


if __name__ == "__main__":
    main()
