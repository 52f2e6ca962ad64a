"""Task planning over a skill library.

Retrieval is a 50/50 hybrid by default: BM25 over each skill's goal, tags
and body, min-max normalized per query, blended with the cosine similarity
of hashed term-frequency vectors.  Both scorers are plain arithmetic over
token counts, so ranking a query twice gives identical results.

Plans are stitched with a bounded-width search over the candidate set where
consecutive steps must hold both dep and comp edges.  When the beam bound
covers the whole candidate set no pruning can occur and the search
enumerates every simple path, so small instances are solved exactly.
Validator steps are inserted after unvalidated non-terminal steps, adapter
steps bridge dep-only transitions, and execution retries failed steps with
same-goal alternatives before re-invoking the original skill.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, replace

from skillops.contract import (
    AdapterShim,
    ConfigInvalid,
    EmptyLibrary,
    Library,
    SkillContract,
    SkillOpsError,
    make_contract,
)
from skillops.hseg import Hseg

__all__ = [
    "AdapterTypeUnsatisfiable",
    "ConfigInvalid",
    "NoFeasiblePlan",
    "ExecutionTrace",
    "Plan",
    "PlanStep",
    "PlannerConfig",
    "TaskSpec",
    "TraceEntry",
    "Bm25Index",
    "CANONICAL_CHECKLIST_ITEM",
    "bind_arguments",
    "build_plan",
    "execute_with_repair",
    "grade_plan",
    "hybrid_score",
    "insert_validators_adapters",
    "make_adapter_shim",
    "match_skills",
    "plan_action_strings",
    "rank_candidates",
    "semantic_similarity",
    "skill_document",
    "stitch",
    "tokenize",
]


class NoFeasiblePlan(SkillOpsError):
    pass


class AdapterTypeUnsatisfiable(SkillOpsError):
    pass


CANONICAL_CHECKLIST_ITEM = "artifact type matches declared artifact.type"

OUTCOMES = ("success", "failure")


@dataclass(frozen=True)
class TaskSpec:
    id: str
    goal_text: str
    state_facts: frozenset[str] = frozenset()
    gold_args: tuple[tuple[str, str], ...] = ()
    gold_plan: tuple[str, ...] = ()


@dataclass(frozen=True)
class PlannerConfig:
    lam: float = 0.5
    bm25_k: int = 10
    keep_top: int = 5
    theta_score: float = 0.0
    beam_width: int = 8
    horizon: int = 20
    max_repairs: int = 2
    k1: float = 1.2
    b: float = 0.75

    def validate(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigInvalid(f"lam must be in [0, 1], got {self.lam}")
        if self.bm25_k < self.keep_top:
            raise ConfigInvalid("bm25_k must be at least keep_top")
        if min(self.keep_top, self.beam_width, self.horizon) < 1:
            raise ConfigInvalid("keep_top, beam_width and horizon must be positive")
        if self.max_repairs < 0:
            raise ConfigInvalid("max_repairs must be nonnegative")


@dataclass(frozen=True)
class PlanStep:
    skill: str
    bindings: tuple[tuple[str, str], ...] = ()
    inserted: str | None = None  # None | "validator" | "adapter"


@dataclass(frozen=True)
class Plan:
    steps: tuple[PlanStep, ...]
    total_score: float


@dataclass(frozen=True)
class TraceEntry:
    task_id: str
    skill: str
    step: int
    outcome: str
    error_code: str | None = None


@dataclass(frozen=True)
class ExecutionTrace:
    entries: tuple[TraceEntry, ...] = ()

    def validate(self) -> None:
        last: dict[str, int] = {}
        for e in self.entries:
            if e.outcome not in OUTCOMES:
                raise SkillOpsError(f"unknown outcome: {e.outcome!r}")
            if e.task_id in last and e.step <= last[e.task_id]:
                raise SkillOpsError(
                    f"step indices must strictly increase per task: {e.task_id}"
                )
            last[e.task_id] = e.step

    def for_skill(self, skill_id: str) -> tuple[TraceEntry, ...]:
        return tuple(e for e in self.entries if e.skill == skill_id)


EMPTY_TRACE = ExecutionTrace()


# ---------------------------------------------------------------------------
# scoring

_TOKEN_RE = re.compile(r"[^a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


def skill_document(s: SkillContract) -> str:
    return " ".join([s.goal, *sorted(s.tags), s.body])


_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1
HASH_BUCKETS = 1 << 16


def _fnv1a(token: str) -> int:
    h = _FNV_OFFSET
    for byte in token.encode("utf-8"):
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _hash_vector(tokens) -> Counter:
    vec: Counter = Counter()
    for t in tokens:
        vec[_fnv1a(t) % HASH_BUCKETS] += 1
    return vec


def semantic_similarity(query: str, doc: str) -> float:
    """Cosine between hashed term-frequency vectors, clipped to [0, 1]."""
    q, d = _hash_vector(tokenize(query)), _hash_vector(tokenize(doc))
    if not q or not d:
        return 0.0
    dot = sum(count * d.get(bucket, 0) for bucket, count in q.items())
    norm = math.sqrt(sum(c * c for c in q.values())) * math.sqrt(
        sum(c * c for c in d.values())
    )
    if norm == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / norm))


class Bm25Index:
    """Okapi BM25 with the usual nonnegative idf variant."""

    def __init__(self, docs: dict[str, str], k1: float = 1.2, b: float = 0.75):
        self.k1, self.b = k1, b
        self.doc_tokens = {doc_id: tokenize(text) for doc_id, text in docs.items()}
        self.doc_len = {doc_id: len(toks) for doc_id, toks in self.doc_tokens.items()}
        self.n_docs = len(docs)
        self.avg_len = (
            sum(self.doc_len.values()) / self.n_docs if self.n_docs else 0.0
        )
        self.tf = {doc_id: Counter(toks) for doc_id, toks in self.doc_tokens.items()}
        df: Counter = Counter()
        for toks in self.doc_tokens.values():
            df.update(set(toks))
        self.idf = {
            term: math.log(1.0 + (self.n_docs - n + 0.5) / (n + 0.5))
            for term, n in df.items()
        }

    def score(self, query: str, doc_id: str) -> float:
        tf, length = self.tf[doc_id], self.doc_len[doc_id]
        denom_norm = self.k1 * (1 - self.b + self.b * length / self.avg_len) if self.avg_len else self.k1
        total = 0.0
        for term in tokenize(query):
            if term not in self.idf or tf[term] == 0:
                continue
            freq = tf[term]
            total += self.idf[term] * freq * (self.k1 + 1) / (freq + denom_norm)
        return total

    def scores(self, query: str) -> dict[str, float]:
        return {doc_id: self.score(query, doc_id) for doc_id in self.doc_tokens}


def hybrid_score(lam: float, bm25_norm: float, sem: float) -> float:
    return lam * bm25_norm + (1.0 - lam) * sem


def rank_candidates(
    skills, query: str, cfg: PlannerConfig = PlannerConfig()
) -> tuple[tuple[str, float], ...]:
    """Hybrid ranking: BM25 shortlist of bm25_k, min-max normalized per
    query, rescored with the hashed-vector similarity.  Descending score,
    ties ascending id."""
    cfg.validate()
    skills = tuple(skills)
    if not skills:
        raise EmptyLibrary("cannot rank over an empty library")
    docs = {s.id: skill_document(s) for s in skills}
    index = Bm25Index(docs, k1=cfg.k1, b=cfg.b)
    raw = index.scores(query)
    shortlist = sorted(raw, key=lambda sid: (-raw[sid], sid))[: cfg.bm25_k]
    lo = min(raw[sid] for sid in shortlist)
    hi = max(raw[sid] for sid in shortlist)
    span = hi - lo
    rescored = []
    for sid in shortlist:
        bm25_norm = (raw[sid] - lo) / span if span > 0 else 0.0
        sem = semantic_similarity(query, docs[sid])
        rescored.append((sid, hybrid_score(cfg.lam, bm25_norm, sem)))
    rescored.sort(key=lambda pair: (-pair[1], pair[0]))
    return tuple(rescored)


def match_skills(
    lib: Library, task: TaskSpec, cfg: PlannerConfig = PlannerConfig()
) -> tuple[tuple[str, float], ...]:
    """Candidate set: top keep_top ranked skills whose score clears
    theta_score and whose preconditions hold in the task's state facts."""
    ranked = rank_candidates(lib.skills, task.goal_text, cfg)
    by_id = lib.by_id()
    kept = [
        (sid, score)
        for sid, score in ranked
        if score >= cfg.theta_score and by_id[sid].preconditions <= task.state_facts
    ]
    return tuple(kept[: cfg.keep_top])


# ---------------------------------------------------------------------------
# stitching

def _better(a: tuple[float, tuple[str, ...]], b: tuple[float, tuple[str, ...]]) -> bool:
    """Path preference: higher score, then fewer steps, then lexicographically
    earlier id sequence."""
    if a[0] != b[0]:
        return a[0] > b[0]
    if len(a[1]) != len(b[1]):
        return len(a[1]) < len(b[1])
    return a[1] < b[1]


def stitch(
    candidates, g: Hseg, cfg: PlannerConfig = PlannerConfig()
) -> Plan:
    """Find the score-sum-maximizing path through the candidate set.

    Transitions require both dep and comp edges; no skill repeats; path
    length is capped by the horizon.  With beam_width >= |candidates| every
    simple path is enumerated, which makes the result exact; otherwise only
    the best beam_width partial paths survive each depth.  A single best
    candidate is a valid plan when nothing can follow it.
    """
    cfg.validate()
    candidates = tuple(candidates)
    if not candidates:
        raise NoFeasiblePlan("empty candidate set")
    scores = dict(candidates)
    ids = [sid for sid, _ in candidates]
    succ: dict[str, tuple[str, ...]] = {}
    for sid in ids:
        succ[sid] = tuple(
            other
            for other in ids
            if other != sid
            and g.edge_exists("dep", sid, other)
            and g.edge_exists("comp", sid, other)
        )
    max_len = min(cfg.horizon, len(ids))
    best: tuple[float, tuple[str, ...]] | None = None

    def consider(score: float, path: tuple[str, ...]) -> None:
        nonlocal best
        if best is None or _better((score, path), best):
            best = (score, path)

    if cfg.beam_width >= len(ids):
        # exhaustive: the beam can hold every candidate, so never prune
        def walk(path: tuple[str, ...], visited: frozenset, score: float) -> None:
            consider(score, path)
            if len(path) >= max_len:
                return
            for nxt in succ[path[-1]]:
                if nxt not in visited:
                    walk(path + (nxt,), visited | {nxt}, score + scores[nxt])

        for sid in ids:
            walk((sid,), frozenset({sid}), scores[sid])
    else:
        frontier = [(scores[sid], (sid,)) for sid in ids]
        frontier.sort(key=lambda e: (-e[0], len(e[1]), e[1]))
        frontier = frontier[: cfg.beam_width]
        for score, path in frontier:
            consider(score, path)
        depth = 1
        while frontier and depth < max_len:
            grown: dict[tuple[str, frozenset], tuple[float, tuple[str, ...]]] = {}
            for score, path in frontier:
                visited = frozenset(path)
                for nxt in succ[path[-1]]:
                    if nxt in visited:
                        continue
                    entry = (score + scores[nxt], path + (nxt,))
                    key = (nxt, visited | {nxt})
                    if key not in grown or _better(entry, grown[key]):
                        grown[key] = entry
            frontier = sorted(grown.values(), key=lambda e: (-e[0], len(e[1]), e[1]))
            frontier = frontier[: cfg.beam_width]
            for score, path in frontier:
                consider(score, path)
            depth += 1

    assert best is not None
    return Plan(
        steps=tuple(PlanStep(skill=sid) for sid in best[1]),
        total_score=best[0],
    )


# ---------------------------------------------------------------------------
# adapters and validators

def make_adapter_shim(src: SkillContract, dst: SkillContract) -> AdapterShim:
    """Bridge skill for a dep-only transition: consumes the source's
    artifact types and produces the destination's required input types.
    Rejected when its artifacts would not satisfy the destination."""
    artifact_types = frozenset(dst.preconditions)
    if not artifact_types or not artifact_types <= dst.preconditions:
        raise AdapterTypeUnsatisfiable(
            f"{src.id} -> {dst.id}: adapter artifacts cannot satisfy the destination"
        )
    contract = make_contract(
        id=f"adapt--{src.id}--{dst.id}",
        goal=f"adapt:{src.id}:{dst.id}",
        preconditions=frozenset(src.artifact_types),
        body=(
            f"Convert [{', '.join(sorted(src.artifact_types))}] artifacts from "
            f"{src.id} into [{', '.join(sorted(dst.preconditions))}] inputs for {dst.id}."
        ),
        artifact_types=artifact_types,
        checklist=(CANONICAL_CHECKLIST_ITEM,),
        tags=frozenset({"adapter"}),
    )
    return AdapterShim(src=src.id, dst=dst.id, contract=contract)


def insert_validators_adapters(plan: Plan, g: Hseg, lib: Library) -> Plan:
    """Insert a validator step after every non-terminal unvalidated step and
    an adapter step inside every dep-without-comp transition."""
    by_id = lib.by_id()
    walked = [s for s in plan.steps if s.inserted is None]
    out: list[PlanStep] = []
    for pos, step in enumerate(walked):
        out.append(step)
        terminal = pos == len(walked) - 1
        contract = by_id.get(step.skill)
        if not terminal and contract is not None and not contract.checklist:
            out.append(PlanStep(skill=step.skill, inserted="validator"))
        if not terminal:
            nxt = walked[pos + 1]
            if g.edge_exists("dep", step.skill, nxt.skill) and not g.edge_exists(
                "comp", step.skill, nxt.skill
            ):
                src, dst = by_id[step.skill], by_id[nxt.skill]
                shim = make_adapter_shim(src, dst)
                out.append(PlanStep(skill=shim.contract.id, inserted="adapter"))
    return Plan(steps=tuple(out), total_score=plan.total_score)


def bind_arguments(step: PlanStep, args) -> PlanStep:
    """Merge argument bindings into a step, later values winning."""
    merged = dict(step.bindings)
    merged.update(dict(args))
    return replace(step, bindings=tuple(sorted(merged.items())))


def build_plan(
    lib: Library, g: Hseg, task: TaskSpec, cfg: PlannerConfig = PlannerConfig()
) -> Plan:
    """match -> stitch -> insert validators/adapters -> bind gold args."""
    candidates = match_skills(lib, task, cfg)
    plan = stitch(candidates, g, cfg)
    plan = insert_validators_adapters(plan, g, lib)
    if task.gold_args:
        steps = tuple(
            bind_arguments(s, task.gold_args) if s.inserted is None else s
            for s in plan.steps
        )
        plan = replace(plan, steps=steps)
    return plan


# ---------------------------------------------------------------------------
# execution and grading

def execute_with_repair(
    plan: Plan,
    task: TaskSpec,
    executor,
    g: Hseg,
    max_repairs: int = 2,
) -> ExecutionTrace:
    """Run plan steps through the executor callback.

    On failure a step gets max_repairs extra attempts: untried same-goal
    alternatives first (ascending id), then re-invocations of the original
    skill carrying the last error code.  An unrecovered step aborts the rest
    of the plan.  Every attempt is logged; step indices count attempts.
    """
    entries: list[TraceEntry] = []
    step_idx = 0

    def attempt(skill_id: str, bindings, n: int, feedback: str | None):
        nonlocal step_idx
        ok, error_code = executor(task, skill_id, bindings, n, feedback)
        entries.append(
            TraceEntry(
                task_id=task.id,
                skill=skill_id,
                step=step_idx,
                outcome="success" if ok else "failure",
                error_code=None if ok else (error_code or "error"),
            )
        )
        step_idx += 1
        return ok, error_code

    for step in plan.steps:
        ok, err = attempt(step.skill, step.bindings, 0, None)
        if ok:
            continue
        alts = list(g.alt_neighbors(step.skill)) if step.skill in g.nodes else []
        recovered = False
        for n in range(1, max_repairs + 1):
            target = alts.pop(0) if alts else step.skill
            ok, err = attempt(target, step.bindings, n, err)
            if ok:
                recovered = True
                break
        if not recovered:
            break
    trace = ExecutionTrace(entries=tuple(entries))
    trace.validate()
    return trace


def grade_plan(predicted, gold) -> bool:
    """Strict-order grading: exact element-wise equality."""
    predicted, gold = list(predicted), list(gold)
    return len(predicted) == len(gold) and all(
        p == g for p, g in zip(predicted, gold)
    )


def plan_action_strings(plan: Plan) -> tuple[str, ...]:
    """The gradeable actions of a plan: its non-inserted step skills."""
    return tuple(s.skill for s in plan.steps if s.inserted is None)
