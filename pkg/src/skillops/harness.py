"""On-disk formats, evaluation metrics, the simulated executor, scripted
pipelines and the command line interface.

A library directory looks like:

    <dir>/manifest.json
    <dir>/skills/<id>/SKILL.md
    <dir>/skills/<id>/{scripts,references,assets}/<file>
    <dir>/adapters/<src>--<dst>/SKILL.md

The manifest carries format_version, per-skill provenance and the adapter
pairs; the skill files' front matter is authoritative on load.  Execution
traces are JSONL, one {task_id, skill_id, step, outcome[, error_code]}
object per line.

The simulated executor is pure bookkeeping: an invocation fails when the
skill's artifact directories are all empty, or when its body links to a
file the directories no longer hold.  Nothing here calls out to any model
or network; rerunning any command with the same inputs and seed writes the
same bytes (timing fields aside).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import shutil
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from skillops.cgpd import CgpdConfig, propagate, trigger_set
from skillops.contract import (
    ARTIFACT_DIR_NAMES,
    AdapterShim,
    ArtifactDirs,
    ConfigInvalid,
    Library,
    SkillOpsError,
    library_fingerprint,
    make_contract,
    parse_skill_file,
    serialize_skill_file,
)
from skillops.debtgen import (
    Xorshift64Star,
    build_library,
    derive_seed,
    extract_artifact_links,
)
from skillops.health import library_health
from skillops.hseg import build_hseg
from skillops.maint import MaintenanceConfig, run_maintenance
from skillops.planner import (
    EMPTY_TRACE,
    ExecutionTrace,
    NoFeasiblePlan,
    PlannerConfig,
    TaskSpec,
    TraceEntry,
    build_plan,
    grade_plan,
    plan_action_strings,
    rank_candidates,
)

__all__ = [
    "ManifestError",
    "MalformedTraceLine",
    "EvalReport",
    "SimulatedExecutor",
    "FORMAT_VERSION",
    "SEED_ENV_VAR",
    "build_retrieval_scenario",
    "exercise_library",
    "load_library",
    "load_trace",
    "main",
    "precision_at_k",
    "run_pipeline",
    "save_library",
    "save_trace",
    "wilson_ci",
]

FORMAT_VERSION = 1
SEED_ENV_VAR = "SKILLOPS_SEED"

OUTCOMES = ("success", "failure")


class ManifestError(SkillOpsError):
    pass


class MalformedTraceLine(SkillOpsError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"trace line {line_no}: {reason}")
        self.line_no = line_no


# ---------------------------------------------------------------------------
# library directories

def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def save_library(lib: Library, path: str | Path, provenance: dict[str, str] | None = None) -> None:
    """Write a library directory, replacing a previous library at the same
    path.  A non-library directory is never deleted."""
    root = Path(path)
    if root.exists():
        if not (root / "manifest.json").exists() and any(root.iterdir()):
            raise ManifestError(
                f"{root} exists and does not look like a library directory"
            )
        shutil.rmtree(root)
    provenance = provenance or {}
    skills_meta = []
    for s in sorted(lib.skills, key=lambda s: s.id):
        rel = f"skills/{s.id}/SKILL.md"
        skill_dir = root / "skills" / s.id
        skill_dir.mkdir(parents=True)
        (root / rel).write_text(serialize_skill_file(s), encoding="utf-8")
        for dirname in ARTIFACT_DIR_NAMES:
            names = s.artifact_dirs.get(dirname)
            if not names:
                continue
            sub = skill_dir / dirname
            sub.mkdir()
            for name in names:
                (sub / name).write_text(f"placeholder for {name}\n", encoding="utf-8")
        skills_meta.append(
            {
                "id": s.id,
                "path": rel,
                "provenance": provenance.get(s.id, "clean"),
            }
        )
    adapters_meta = []
    for shim in sorted(lib.adapters, key=lambda a: (a.src, a.dst)):
        rel = f"adapters/{shim.src}--{shim.dst}/SKILL.md"
        (root / rel).parent.mkdir(parents=True)
        (root / rel).write_text(serialize_skill_file(shim.contract), encoding="utf-8")
        adapters_meta.append({"src": shim.src, "dst": shim.dst, "path": rel})
    manifest = {
        "format_version": FORMAT_VERSION,
        "skills": skills_meta,
        "adapters": adapters_meta,
    }
    (root / "manifest.json").write_text(_json_text(manifest), encoding="utf-8")


def load_library(path: str | Path) -> tuple[Library, dict[str, str]]:
    """Read a library directory back.  Front matter is authoritative for
    contract content; the manifest supplies ordering, provenance and the
    adapter pairing."""
    root = Path(path)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise ManifestError(f"{root} has no manifest.json")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ManifestError(
            f"unsupported format_version: {manifest.get('format_version')!r}"
        )
    skills = []
    provenance: dict[str, str] = {}
    for entry in manifest.get("skills", ()):
        contract = parse_skill_file((root / entry["path"]).read_text(encoding="utf-8"))
        if contract.id != entry["id"]:
            raise ManifestError(
                f"{entry['path']}: file declares id {contract.id!r},"
                f" manifest says {entry['id']!r}"
            )
        skills.append(contract)
        provenance[contract.id] = entry.get("provenance", "clean")
    adapters = []
    for entry in manifest.get("adapters", ()):
        contract = parse_skill_file((root / entry["path"]).read_text(encoding="utf-8"))
        adapters.append(AdapterShim(src=entry["src"], dst=entry["dst"], contract=contract))
    return Library(skills=tuple(skills), adapters=tuple(adapters)), provenance


# ---------------------------------------------------------------------------
# traces

def save_trace(trace: ExecutionTrace, path: str | Path) -> None:
    lines = []
    for e in trace.entries:
        obj = {
            "task_id": e.task_id,
            "skill_id": e.skill,
            "step": e.step,
            "outcome": e.outcome,
        }
        if e.error_code is not None:
            obj["error_code"] = e.error_code
        lines.append(json.dumps(obj, sort_keys=True))
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


def load_trace(path: str | Path) -> ExecutionTrace:
    entries = []
    text = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedTraceLine(line_no, f"invalid JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise MalformedTraceLine(line_no, "expected an object")
        missing = {"task_id", "skill_id", "step", "outcome"} - set(obj)
        if missing:
            raise MalformedTraceLine(line_no, f"missing keys: {sorted(missing)}")
        if obj["outcome"] not in OUTCOMES:
            raise MalformedTraceLine(line_no, f"unknown outcome {obj['outcome']!r}")
        if not isinstance(obj["step"], int):
            raise MalformedTraceLine(line_no, "step must be an integer")
        entries.append(
            TraceEntry(
                task_id=str(obj["task_id"]),
                skill=str(obj["skill_id"]),
                step=obj["step"],
                outcome=obj["outcome"],
                error_code=obj.get("error_code"),
            )
        )
    trace = ExecutionTrace(entries=tuple(entries))
    trace.validate()
    return trace


# ---------------------------------------------------------------------------
# metrics

def precision_at_k(relevant, retrieved, k: int) -> float:
    """Fraction of the first k retrieved ids that are relevant; the divisor
    is always k, so short result lists are penalized."""
    if k < 1:
        raise ConfigInvalid("k must be positive")
    return len(set(retrieved[:k]) & set(relevant)) / k


def wilson_ci(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 0 or not 0 <= successes <= max(n, 0):
        raise ConfigInvalid(f"bad counts: {successes}/{n}")
    if n == 0:
        return (0.0, 1.0)
    phat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    centre = phat + z2 / (2 * n)
    radius = z * math.sqrt(phat * (1.0 - phat) / n + z2 / (4 * n * n))
    lo = max(0.0, (centre - radius) / denom)
    hi = min(1.0, (centre + radius) / denom)
    return (lo, hi)


# ---------------------------------------------------------------------------
# simulated execution

class SimulatedExecutor:
    """Deterministic executor for plans.

    A skill invocation fails when its artifact directories are all empty or
    its body links to a file its directories do not hold; ids outside the
    library (generated adapter steps) succeed.  Scripted overrides keyed by
    (task_id, skill_id, attempt) take precedence, which lets tests stage
    arbitrary failure patterns.
    """

    def __init__(self, lib: Library, scripted: dict | None = None):
        self.by_id = lib.by_id()
        self.scripted = dict(scripted or {})
        self.invocations = 0
        self.external_model_calls = 0

    def verdict(self, skill_id: str) -> tuple[bool, str | None]:
        s = self.by_id.get(skill_id)
        if s is None:
            return True, None
        if s.artifact_dirs.is_empty():
            return False, "empty-artifacts"
        for dirname, fname in extract_artifact_links(s.body):
            if fname not in s.artifact_dirs.get(dirname):
                return False, f"broken-link:{dirname}/{fname}"
        return True, None

    def __call__(self, task, skill_id, bindings, attempt, feedback):
        self.invocations += 1
        key = (task.id, skill_id, attempt)
        if key in self.scripted:
            return self.scripted[key]
        return self.verdict(skill_id)


def exercise_library(lib: Library, calls: int = 4) -> ExecutionTrace:
    """Probe every skill a fixed number of times through the simulated
    executor and return the combined trace."""
    ex = SimulatedExecutor(lib)
    entries = []
    for s in sorted(lib.skills, key=lambda s: s.id):
        task = TaskSpec(id=f"probe-{s.id}", goal_text=s.goal)
        for i in range(calls):
            ok, err = ex(task, s.id, (), i, None)
            entries.append(
                TraceEntry(
                    task_id=task.id,
                    skill=s.id,
                    step=i,
                    outcome="success" if ok else "failure",
                    error_code=None if ok else err,
                )
            )
    trace = ExecutionTrace(entries=tuple(entries))
    trace.validate()
    return trace


# ---------------------------------------------------------------------------
# scripted scenarios

def build_retrieval_scenario(
    n_queries: int = 20, seed: int = 0
) -> tuple[Library, tuple[tuple[str, str, frozenset], ...]]:
    """A library where every query has one genuinely relevant skill and a
    family of seven keyword-stuffed decoys sharing a single body.

    Returns (library, queries) with queries as (query_id, query_text,
    relevant_ids).  Before maintenance the decoy family crowds the whole
    top five; after the family merges into one skill the relevant skill
    fits inside it.
    """
    if n_queries < 1:
        raise ConfigInvalid("need at least one query")
    rng = Xorshift64Star(derive_seed(seed, 31337))
    skills = []
    queries = []
    for i in range(n_queries):
        tokens = [f"topic{i}a", f"topic{i}b", f"topic{i}c", f"tier{i}"]
        query = " ".join(tokens)
        real = make_contract(
            id=f"real-{i:02d}",
            goal=f"handle-{tokens[0]}",
            preconditions=frozenset({f"in-{i}"}),
            body=(
                f"Handle {tokens[0]} {tokens[1]} {tokens[2]} {tokens[3]} requests"
                " end to end.\nFollow the standard procedure and record the result."
            ),
            artifact_types=frozenset({f"out-{i}"}),
            checklist=("result recorded",),
            tags=frozenset({tokens[0], tokens[3]}),
        )
        skills.append(real)
        stuffed = "\n".join(" ".join(tokens) for _ in range(8))
        family_goal = f"decoy-{tokens[0]}"
        for c in range(7):
            sid = f"decoy-{i:02d}" if c == 0 else f"decoy-{i:02d}-c{c}"
            skills.append(
                make_contract(
                    id=sid,
                    goal=family_goal,
                    preconditions=frozenset({f"din-{i}"}),
                    body=stuffed,
                    artifact_types=frozenset({f"dout-{i}"}),
                    checklist=("noted",),
                    tags=frozenset({tokens[3]}),
                )
            )
        queries.append((f"q{i:02d}", query, frozenset({real.id})))
    rng.u64()  # reserve the stream for future scenario variants
    return Library(skills=tuple(skills)), tuple(queries)


def _rank_ids(lib: Library, query: str, k: int) -> list[str]:
    ranked = rank_candidates(lib.skills, query, PlannerConfig())
    return [sid for sid, _ in ranked[:k]]


def _eval_condition(lib: Library, queries, k: int) -> dict:
    per_query = []
    hits = 0
    for _, query, relevant in queries:
        top = _rank_ids(lib, query, k)
        p = precision_at_k(relevant, top, k)
        per_query.append(p)
        if set(top) & set(relevant):
            hits += 1
    n = len(per_query)
    lo, hi = wilson_ci(hits, n)
    return {
        "precision_at_k": sum(per_query) / n if n else 0.0,
        "hits": hits,
        "n": n,
        "wilson_low": lo,
        "wilson_high": hi,
    }


@dataclass(frozen=True)
class EvalReport:
    scenario: str
    seed: int
    k: int
    conditions: dict[str, dict]
    maintenance: dict
    timing_s: dict[str, float]
    external_model_calls: int = 0

    def as_dict(self) -> dict:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "k": self.k,
            "conditions": self.conditions,
            "maintenance": self.maintenance,
            "timing_s": self.timing_s,
            "external_model_calls": self.external_model_calls,
        }


def _library_queries(lib: Library, provenance: dict[str, str], seed: int, count: int):
    """Queries sampled from clean skills; relevant = the skill's whole
    body-hash class, so merged survivors still count."""
    from skillops.contract import body_hash

    clean_ids = sorted(sid for sid, p in provenance.items() if p == "clean")
    rng = Xorshift64Star(derive_seed(seed, 7777))
    picked = rng.sample(clean_ids, min(count, len(clean_ids)))
    by_id = lib.by_id()
    classes: dict[str, list[str]] = {}
    for s in lib.skills:
        classes.setdefault(body_hash(s), []).append(s.id)
    queries = []
    for sid in sorted(picked):
        s = by_id[sid]
        text = " ".join(
            [s.goal.replace("-", " "), *sorted(s.tags)[:2], s.body.split("\n")[0]]
        )
        relevant = frozenset(classes[body_hash(s)])
        queries.append((f"q-{sid}", text, relevant))
    return tuple(queries)


SCENARIOS = ("clean-200", "noisy-500", "retrieval-20")


def run_pipeline(scenario: str, seed: int = 0, k: int = 5) -> EvalReport:
    """Generate a scenario library, evaluate retrieval raw, maintain, and
    evaluate again."""
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    if scenario == "clean-200":
        lib, provenance = build_library(200, 0.0, seed)
        queries = _library_queries(lib, provenance, seed, 25)
        trace = exercise_library(lib)
    elif scenario == "noisy-500":
        lib, provenance = build_library(500, 0.60, seed)
        queries = _library_queries(lib, provenance, seed, 25)
        trace = exercise_library(lib)
    elif scenario == "retrieval-20":
        lib, queries = build_retrieval_scenario(20, seed)
        trace = EMPTY_TRACE
    else:
        raise ConfigInvalid(
            f"unknown scenario {scenario!r}; choose from {', '.join(SCENARIOS)}"
        )
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    raw = _eval_condition(lib, queries, k)
    timings["eval_raw"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    maintained_lib, report = run_maintenance(lib, trace, MaintenanceConfig())
    timings["maintain"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    maintained = _eval_condition(maintained_lib, queries, k)
    timings["eval_maintained"] = time.perf_counter() - t0

    return EvalReport(
        scenario=scenario,
        seed=seed,
        k=k,
        conditions={"raw": raw, "maintained": maintained},
        maintenance=report.as_dict(),
        timing_s=timings,
    )


# ---------------------------------------------------------------------------
# command line interface

def _resolve_seed(args) -> int:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ConfigInvalid(
                f"{SEED_ENV_VAR} must be an integer, got {env!r}"
            ) from None
    return args.seed


def _emit(payload: dict, out: str | None) -> None:
    text = _json_text(payload)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)


def _cgpd_config(args) -> CgpdConfig | None:
    if not args.cgpd:
        return None
    kwargs = {}
    if args.alpha is not None:
        kwargs["alpha"] = args.alpha
    if args.tau is not None:
        kwargs["tau"] = args.tau
    if args.eps is not None:
        kwargs["eps"] = args.eps
    if args.max_iters is not None:
        kwargs["max_iters"] = args.max_iters
    return CgpdConfig(**kwargs)


def _add_cgpd_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cgpd", action="store_true", help="propagate risk over dep edges")
    p.add_argument("--alpha", type=float, default=None, help="upstream blend weight")
    p.add_argument("--tau", type=float, default=None, help="risk trigger threshold")
    p.add_argument("--eps", type=float, default=None, help="convergence tolerance")
    p.add_argument("--max-iters", type=int, default=None, help="iteration cap")


def _load_lib_arg(path: str) -> tuple[Library, dict[str, str]]:
    return load_library(path)


def cmd_inject(args) -> int:
    seed = _resolve_seed(args)
    lib, provenance = build_library(args.n, args.noise, seed)
    save_library(lib, args.out, provenance)
    degraded = sum(1 for p in provenance.values() if p != "clean")
    _emit(
        {
            "out": str(args.out),
            "seed": seed,
            "size": len(lib),
            "clean": len(lib) - degraded,
            "degraded": degraded,
            "fingerprint": library_fingerprint(lib),
        },
        None,
    )
    return 0


def cmd_diagnose(args) -> int:
    lib, _ = _load_lib_arg(args.lib)
    trace = load_trace(args.trace) if args.trace else EMPTY_TRACE
    g = build_hseg(lib.skills, adapters=lib.adapters)
    report = library_health(lib, g, trace, window=args.window)
    payload = report.as_dict()
    cgpd_cfg = _cgpd_config(args)
    if cgpd_cfg is not None:
        result = propagate(g, report.local_risks(), cgpd_cfg)
        payload["risk"] = {sid: result.risk[sid] for sid in sorted(result.risk)}
        payload["risk_iterations"] = result.iterations_used
        payload["triggered"] = sorted(trigger_set(g, result.risk, lib, cgpd_cfg.tau))
    if args.dump_graph:
        Path(args.dump_graph).write_text(_json_text(g.export()), encoding="utf-8")
    _emit(payload, args.out)
    return 0


def cmd_maintain(args) -> int:
    lib, provenance = _load_lib_arg(args.lib)
    trace = load_trace(args.trace) if args.trace else EMPTY_TRACE
    cfg = MaintenanceConfig(force=not args.no_force, cgpd=_cgpd_config(args))
    new_lib, report = run_maintenance(lib, trace, cfg)
    if args.out:
        save_library(new_lib, args.out, provenance)
    _emit(report.as_dict(), args.report)
    return 0


def cmd_plan(args) -> int:
    lib, _ = _load_lib_arg(args.lib)
    g = build_hseg(lib.skills, adapters=lib.adapters)
    facts = frozenset(f for f in (args.state or "").split(",") if f)
    task = TaskSpec(id=args.task_id, goal_text=args.goal, state_facts=facts)
    try:
        plan = build_plan(lib, g, task, PlannerConfig())
    except NoFeasiblePlan as e:
        _emit({"feasible": False, "reason": str(e), "steps": []}, args.out)
        return 1
    payload = {
        "feasible": True,
        "total_score": plan.total_score,
        "steps": [
            {"skill": s.skill, "inserted": s.inserted, "bindings": dict(s.bindings)}
            for s in plan.steps
        ],
        "actions": list(plan_action_strings(plan)),
    }
    _emit(payload, args.out)
    return 0


def _read_action_list(path: str) -> list[str]:
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(obj, dict):
        obj = obj.get("actions")
    if not isinstance(obj, list) or not all(isinstance(x, str) for x in obj):
        raise ConfigInvalid(f"{path}: expected a JSON list of action strings")
    return obj


def cmd_grade(args) -> int:
    predicted = (
        _read_action_list(args.plan)
        if args.plan
        else [x for x in args.actions.split(",") if x]
    )
    gold = (
        _read_action_list(args.gold)
        if args.gold
        else [x for x in args.gold_list.split(",") if x]
    )
    ok = grade_plan(predicted, gold)
    _emit({"exact_match": ok, "predicted": predicted, "gold": gold}, args.out)
    return 0 if ok else 1


def cmd_eval_retrieval(args) -> int:
    lib, _ = _load_lib_arg(args.lib)
    queries = []
    text = Path(args.queries).read_text(encoding="utf-8")
    for line_no, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise MalformedTraceLine(line_no, f"invalid JSON ({e.msg})") from None
        if "query" not in obj or "relevant" not in obj:
            raise MalformedTraceLine(line_no, "need query and relevant keys")
        queries.append(
            (str(obj.get("id", line_no)), str(obj["query"]), frozenset(obj["relevant"]))
        )
    payload = _eval_condition(lib, tuple(queries), args.k)
    _emit(payload, args.out)
    return 0


def cmd_pipeline(args) -> int:
    seed = _resolve_seed(args)
    report = run_pipeline(args.scenario, seed, args.k)
    _emit(report.as_dict(), args.out)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skillops",
        description="deterministic skill library maintenance and planning",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("inject", help="generate a library with seeded rot")
    p.add_argument("--n", type=int, required=True, help="library size")
    p.add_argument("--noise", type=float, default=0.0, help="degraded fraction")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="library directory to write")
    p.set_defaults(func=cmd_inject)

    p = sub.add_parser("diagnose", help="health vectors and library debt")
    p.add_argument("--lib", required=True)
    p.add_argument("--trace", default=None, help="JSONL execution trace")
    p.add_argument("--window", type=int, default=100)
    p.add_argument("--dump-graph", default=None, help="write the typed graph as JSON")
    p.add_argument("--out", default=None, help="also write the report here")
    _add_cgpd_flags(p)
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("maintain", help="plan and apply maintenance actions")
    p.add_argument("--lib", required=True)
    p.add_argument("--trace", default=None)
    p.add_argument("--out", default=None, help="write the maintained library here")
    p.add_argument("--report", default=None, help="also write the report here")
    p.add_argument("--no-force", action="store_true",
                   help="skip maintenance while debt is below the gate")
    _add_cgpd_flags(p)
    p.set_defaults(func=cmd_maintain)

    p = sub.add_parser("plan", help="retrieve, stitch and bind a task plan")
    p.add_argument("--lib", required=True)
    p.add_argument("--goal", required=True, help="task goal text")
    p.add_argument("--state", default="", help="comma-separated state facts")
    p.add_argument("--task-id", default="cli-task")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("grade", help="strict-order plan grading")
    p.add_argument("--plan", default=None, help="JSON file with an actions list")
    p.add_argument("--actions", default="", help="comma-separated predicted actions")
    p.add_argument("--gold", default=None, help="JSON file with the gold actions")
    p.add_argument("--gold-list", default="", help="comma-separated gold actions")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_grade)

    p = sub.add_parser("eval-retrieval", help="precision@k over a query file")
    p.add_argument("--lib", required=True)
    p.add_argument("--queries", required=True, help="JSONL with query and relevant")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eval_retrieval)

    p = sub.add_parser("pipeline", help="end-to-end scenario evaluation")
    p.add_argument("--scenario", choices=SCENARIOS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SkillOpsError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
