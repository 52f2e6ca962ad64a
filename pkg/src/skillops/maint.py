"""Deterministic library maintenance.

One maintenance pass diagnoses the library, then plans and applies typed
actions in five fixed stages:

  merge          collapse skills whose bodies hash identically
  repair         copy missing script/reference names from a sibling
  retire         drop low-utility skills that have a surviving duplicate
  add_validator  give unvalidated skills a checklist
  add_adapter    register shims for dep edges below the comp threshold

Each stage plans against the library produced by the previous stages, so
replaying the action list on the input library reproduces the output
exactly.  Red clusters whose members disagree on body are never merged;
they are reported as conflicts instead, which keeps the size arithmetic
exact: size_after = size_before - absorbed - retired.

Everything here is pure computation over the contracts and the trace; no
external model is consulted, and the same inputs always produce the same
actions, the same log and the same output library.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from skillops.cgpd import CgpdConfig, propagate, trigger_set
from skillops.contract import (
    ARTIFACT_DIR_NAMES,
    ArtifactDirs,
    ConfigInvalid,
    Library,
    SkillContract,
    SkillOpsError,
    UnknownSkillId,
    body_hash,
)
from skillops.health import (
    DEFAULT_WINDOW,
    UNIFORM_WEIGHTS,
    HealthWeights,
    LibraryHealthReport,
    library_health,
)
from skillops.hseg import Hseg, build_hseg
from skillops.planner import (
    CANONICAL_CHECKLIST_ITEM,
    EMPTY_TRACE,
    ExecutionTrace,
    make_adapter_shim,
)

__all__ = [
    "ACTION_KINDS",
    "IllegalMerge",
    "IllegalRepair",
    "RetireRequiresDuplicate",
    "MaintenanceAction",
    "MaintenanceConfig",
    "MaintenancePlan",
    "MaintenanceReport",
    "apply_action",
    "plan_actions",
    "run_maintenance",
]

ACTION_KINDS = (
    "merge",
    "repair",
    "retire",
    "add_validator",
    "add_adapter",
    "instantiate",
)


class IllegalMerge(SkillOpsError):
    pass


class IllegalRepair(SkillOpsError):
    pass


class RetireRequiresDuplicate(SkillOpsError):
    pass


@dataclass(frozen=True)
class MaintenanceAction:
    kind: str
    target: str
    drops: tuple[str, ...] = ()
    source_sibling: str | None = None
    dst: str | None = None
    reason: str = ""

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "drops": list(self.drops),
            "source_sibling": self.source_sibling,
            "dst": self.dst,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class MaintenanceConfig:
    debt_gate: float = 0.5
    force: bool = True
    theta_r: float = 0.5
    theta_f: float = 0.5
    theta_u: float = 0.5
    theta_risk: float = 0.5
    theta_valid: float = 0.5
    comp_threshold: float = 0.3
    dep_mode: str = "subset"
    cgpd: CgpdConfig | None = None
    weights: HealthWeights = UNIFORM_WEIGHTS
    window: int = DEFAULT_WINDOW

    def validate(self) -> None:
        for name in ("debt_gate", "theta_r", "theta_f", "theta_u",
                     "theta_risk", "theta_valid", "comp_threshold"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigInvalid(f"{name} must be in [0, 1], got {v}")
        if self.dep_mode not in ("subset", "overlap"):
            raise ConfigInvalid(f"unknown dep_mode: {self.dep_mode!r}")
        if self.window < 1:
            raise ConfigInvalid("window must be positive")
        self.weights.validate()
        if self.cgpd is not None:
            self.cgpd.validate()


@dataclass(frozen=True)
class MaintenancePlan:
    actions: tuple[MaintenanceAction, ...]
    red_conflicts: tuple[tuple[str, ...], ...]
    health_before: LibraryHealthReport
    risk: dict[str, float]
    cgpd_triggered: tuple[str, ...] = ()
    gated: bool = False


@dataclass(frozen=True)
class MaintenanceReport:
    size_before: int
    size_after: int
    action_counts: dict[str, int]
    actions: tuple[MaintenanceAction, ...]
    log: tuple[str, ...]
    H_before: float
    H_after: float
    red_conflicts: tuple[tuple[str, ...], ...] = ()
    cgpd_triggered: tuple[str, ...] = ()
    gated: bool = False
    external_model_calls: int = 0

    def as_dict(self) -> dict:
        return {
            "size_before": self.size_before,
            "size_after": self.size_after,
            "H_before": self.H_before,
            "H_after": self.H_after,
            "gated": self.gated,
            "external_model_calls": self.external_model_calls,
            "action_counts": dict(self.action_counts),
            "actions": [a.as_dict() for a in self.actions],
            "log": list(self.log),
            "red_conflicts": [list(c) for c in self.red_conflicts],
            "cgpd_triggered": list(self.cgpd_triggered),
        }


# ---------------------------------------------------------------------------
# action application

def _require(by_id: dict[str, SkillContract], skill_id: str) -> SkillContract:
    if skill_id not in by_id:
        raise UnknownSkillId(skill_id)
    return by_id[skill_id]


def _drop_adapters(lib: Library, removed: set[str]) -> tuple:
    return tuple(
        a for a in lib.adapters if a.src not in removed and a.dst not in removed
    )


def _same_interface(a: SkillContract, b: SkillContract) -> bool:
    return (a.preconditions == b.preconditions
            and a.artifact_types == b.artifact_types)


def _apply_merge(lib: Library, action: MaintenanceAction) -> Library:
    by_id = lib.by_id()
    keep = _require(by_id, action.target)
    if not action.drops:
        raise IllegalMerge("merge must absorb at least one skill")
    if action.target in action.drops:
        raise IllegalMerge(f"{action.target} cannot absorb itself")
    keep_hash = body_hash(keep)
    absorbed = []
    for sid in action.drops:
        s = _require(by_id, sid)
        if body_hash(s) != keep_hash:
            raise IllegalMerge(
                f"{sid} does not share {action.target}'s body; merging would"
                " discard an implementation"
            )
        absorbed.append(s)

    dirs = {name: set(keep.artifact_dirs.get(name)) for name in ARTIFACT_DIR_NAMES}
    tags, fmodes = set(keep.tags), set(keep.failure_modes)
    checklist = keep.checklist
    for s in absorbed:
        for name in ARTIFACT_DIR_NAMES:
            dirs[name].update(s.artifact_dirs.get(name))
        tags.update(s.tags)
        fmodes.update(s.failure_modes)
        if not checklist and s.checklist:
            checklist = s.checklist
    merged = replace(
        keep,
        artifact_dirs=ArtifactDirs(
            scripts=tuple(sorted(dirs["scripts"])),
            references=tuple(sorted(dirs["references"])),
            assets=tuple(sorted(dirs["assets"])),
        ),
        tags=frozenset(tags),
        failure_modes=frozenset(fmodes),
        checklist=checklist,
    )
    removed = set(action.drops)
    return Library(
        skills=tuple(
            merged if s.id == keep.id else s
            for s in lib.skills
            if s.id not in removed
        ),
        adapters=_drop_adapters(lib, removed),
    )


def _apply_repair(lib: Library, action: MaintenanceAction) -> Library:
    by_id = lib.by_id()
    target = _require(by_id, action.target)
    if action.source_sibling is None:
        return lib
    sibling = _require(by_id, action.source_sibling)
    if body_hash(sibling) != body_hash(target) and not _same_interface(sibling, target):
        raise IllegalRepair(
            f"{action.source_sibling} is neither a body nor an interface"
            f" sibling of {action.target}"
        )
    scripts = sorted(set(target.artifact_dirs.scripts) | set(sibling.artifact_dirs.scripts))
    references = sorted(
        set(target.artifact_dirs.references) | set(sibling.artifact_dirs.references)
    )
    dirs = ArtifactDirs(
        scripts=tuple(scripts),
        references=tuple(references),
        assets=target.artifact_dirs.assets,
    )
    if dirs == target.artifact_dirs:
        return lib
    patched = replace(target, artifact_dirs=dirs)
    return replace(
        lib,
        skills=tuple(patched if s.id == target.id else s for s in lib.skills),
    )


def _apply_retire(lib: Library, action: MaintenanceAction) -> Library:
    by_id = lib.by_id()
    target = _require(by_id, action.target)
    t_hash = body_hash(target)
    has_duplicate = any(
        s.id != target.id
        and (_same_interface(s, target) or body_hash(s) == t_hash)
        for s in lib.skills
    )
    if not has_duplicate:
        raise RetireRequiresDuplicate(
            f"{action.target} has no surviving duplicate; retiring it would"
            " lose capability"
        )
    removed = {target.id}
    return Library(
        skills=tuple(s for s in lib.skills if s.id != target.id),
        adapters=_drop_adapters(lib, removed),
    )


def _apply_add_validator(lib: Library, action: MaintenanceAction) -> Library:
    by_id = lib.by_id()
    target = _require(by_id, action.target)
    if target.checklist:
        return lib
    if action.source_sibling is not None:
        donor = _require(by_id, action.source_sibling)
        if not donor.checklist:
            raise ConfigInvalid(
                f"validator donor {donor.id} has no checklist to give"
            )
        checklist = donor.checklist
    else:
        checklist = (CANONICAL_CHECKLIST_ITEM,)
    patched = replace(target, checklist=checklist)
    return replace(
        lib,
        skills=tuple(patched if s.id == target.id else s for s in lib.skills),
    )


def _apply_add_adapter(lib: Library, action: MaintenanceAction) -> Library:
    by_id = lib.by_id()
    src = _require(by_id, action.target)
    if action.dst is None:
        raise ConfigInvalid("add_adapter needs a destination skill")
    dst = _require(by_id, action.dst)
    if any(a.src == src.id and a.dst == dst.id for a in lib.adapters):
        return lib
    shim = make_adapter_shim(src, dst)
    return replace(lib, adapters=lib.adapters + (shim,))


def apply_action(lib: Library, action: MaintenanceAction) -> Library:
    """Apply one action, returning a new library.  Unknown ids raise, and a
    merge of differing bodies or a retire without a duplicate is refused."""
    if action.kind == "merge":
        return _apply_merge(lib, action)
    if action.kind == "repair":
        return _apply_repair(lib, action)
    if action.kind == "retire":
        return _apply_retire(lib, action)
    if action.kind == "add_validator":
        return _apply_add_validator(lib, action)
    if action.kind == "add_adapter":
        return _apply_add_adapter(lib, action)
    if action.kind == "instantiate":
        return lib
    raise ConfigInvalid(f"unknown action kind: {action.kind!r}")


# ---------------------------------------------------------------------------
# planning

def _hash_groups(lib: Library) -> dict[str, list[str]]:
    groups: dict[str, list[str]] = {}
    for s in lib.skills:
        groups.setdefault(body_hash(s), []).append(s.id)
    return groups


def _plan_merges(
    lib: Library, health: LibraryHealthReport
) -> list[MaintenanceAction]:
    actions = []
    for members in _hash_groups(lib).values():
        if len(members) < 2:
            continue
        keep = sorted(members, key=lambda sid: (-health.per_skill[sid].U, sid))[0]
        drops = tuple(sorted(m for m in members if m != keep))
        actions.append(
            MaintenanceAction(
                kind="merge",
                target=keep,
                drops=drops,
                reason=f"{len(members)} skills share one body",
            )
        )
    actions.sort(key=lambda a: a.target)
    return actions


def _sibling_index(skills) -> tuple[dict, dict, dict]:
    """(id -> body hash, hash -> skills, interface -> skills), computed once
    so sibling lookups stay linear on clone-heavy libraries."""
    hashes = {s.id: body_hash(s) for s in skills}
    by_hash: dict[str, list[SkillContract]] = {}
    by_iface: dict[tuple, list[SkillContract]] = {}
    for s in skills:
        by_hash.setdefault(hashes[s.id], []).append(s)
        by_iface.setdefault((s.preconditions, s.artifact_types), []).append(s)
    return hashes, by_hash, by_iface


def _repair_source(target: SkillContract, index) -> tuple[str | None, int]:
    """Pick the sibling to copy artifact names from: body siblings first,
    then interface siblings, ascending id, requiring at least one name the
    target is missing."""
    hashes, by_hash, by_iface = index
    body_sibs = [s for s in by_hash[hashes[target.id]] if s.id != target.id]
    iface_key = (target.preconditions, target.artifact_types)
    body_ids = {s.id for s in body_sibs}
    iface_sibs = [
        s
        for s in by_iface.get(iface_key, [])
        if s.id != target.id and s.id not in body_ids
    ]
    for s in sorted(body_sibs, key=lambda s: s.id) + sorted(iface_sibs, key=lambda s: s.id):
        missing = len(set(s.artifact_dirs.scripts) - set(target.artifact_dirs.scripts))
        missing += len(
            set(s.artifact_dirs.references) - set(target.artifact_dirs.references)
        )
        if missing:
            return s.id, missing
    return None, 0


def _plan_repairs(
    work: Library,
    health: LibraryHealthReport,
    risk: dict[str, float],
    cfg: MaintenanceConfig,
) -> list[MaintenanceAction]:
    actions = []
    index = _sibling_index(work.skills)
    for s in sorted(work.skills, key=lambda s: s.id):
        hv = health.per_skill.get(s.id)
        if hv is None:
            continue
        if not (hv.F > cfg.theta_f or risk[s.id] > cfg.theta_risk):
            continue
        sibling, missing = _repair_source(s, index)
        if sibling is None:
            actions.append(
                MaintenanceAction(kind="repair", target=s.id, reason="no-sibling")
            )
        else:
            actions.append(
                MaintenanceAction(
                    kind="repair",
                    target=s.id,
                    source_sibling=sibling,
                    reason=f"restore {missing} artifact names",
                )
            )
    return actions


def _plan_retires(
    work: Library,
    g: Hseg,
    health: LibraryHealthReport,
    cfg: MaintenanceConfig,
) -> list[MaintenanceAction]:
    def utility(sid: str) -> float:
        hv = health.per_skill.get(sid)
        return hv.U if hv is not None else 0.5

    actions = []
    for cluster in g.red_clusters():
        if len(cluster) < 2:
            continue
        top = sorted(cluster, key=lambda sid: (-utility(sid), sid))[0]
        for sid in cluster:
            if sid != top and utility(sid) < cfg.theta_u:
                actions.append(
                    MaintenanceAction(
                        kind="retire",
                        target=sid,
                        reason=f"low-utility duplicate of {top}",
                    )
                )
    actions.sort(key=lambda a: a.target)
    return actions


def _plan_validators(work: Library) -> list[MaintenanceAction]:
    hashes, by_hash, by_iface = _sibling_index(work.skills)
    actions = []
    for s in sorted(work.skills, key=lambda s: s.id):
        if s.checklist:
            continue
        candidates = by_hash[hashes[s.id]] + by_iface.get(
            (s.preconditions, s.artifact_types), []
        )
        donor = min(
            (d.id for d in candidates if d.id != s.id and d.checklist),
            default=None,
        )
        reason = "inherit sibling checklist" if donor else "attach canonical checklist"
        actions.append(
            MaintenanceAction(
                kind="add_validator",
                target=s.id,
                source_sibling=donor,
                reason=reason,
            )
        )
    return actions


def _plan_adapters(work: Library, cfg: MaintenanceConfig) -> list[MaintenanceAction]:
    g = build_hseg(work.skills, cfg.comp_threshold, cfg.dep_mode, work.adapters)
    actions = []
    for src, dst in g.dep_not_comp_pairs():
        if g.is_bridged(src, dst):
            continue
        actions.append(
            MaintenanceAction(
                kind="add_adapter",
                target=src,
                dst=dst,
                reason="dep edge below the compatibility threshold",
            )
        )
    return actions


def plan_actions(
    lib: Library,
    trace: ExecutionTrace = EMPTY_TRACE,
    cfg: MaintenanceConfig = MaintenanceConfig(),
) -> MaintenancePlan:
    """Diagnose the library and produce the full staged action list.

    Stages after the first plan against shadow copies so that each action
    sees the library state its predecessors will have produced.
    """
    cfg.validate()
    g = build_hseg(lib.skills, cfg.comp_threshold, cfg.dep_mode, lib.adapters)
    health = library_health(lib, g, trace, cfg.weights, cfg.window)
    risk = health.local_risks()
    triggered: tuple[str, ...] = ()
    if cfg.cgpd is not None:
        risk = propagate(g, risk, cfg.cgpd).risk
        triggered = tuple(sorted(trigger_set(g, risk, lib, cfg.cgpd.tau)))

    n = len(lib)
    red_conflicts = []
    for cluster in g.red_clusters():
        if len(cluster) < 2:
            continue
        crowding = (len(cluster) - 1) / max(1, n - 1)
        if crowding > cfg.theta_r and len({g.body_hashes[sid] for sid in cluster}) > 1:
            red_conflicts.append(cluster)

    if not cfg.force and health.debt < cfg.debt_gate:
        return MaintenancePlan(
            actions=(),
            red_conflicts=tuple(red_conflicts),
            health_before=health,
            risk=risk,
            cgpd_triggered=triggered,
            gated=True,
        )

    actions: list[MaintenanceAction] = []
    work = lib

    def run_stage(staged: list[MaintenanceAction]) -> None:
        nonlocal work
        for a in staged:
            work = apply_action(work, a)
        actions.extend(staged)

    run_stage(_plan_merges(work, health))
    run_stage(_plan_repairs(work, health, risk, cfg))
    run_stage(
        _plan_retires(
            work,
            build_hseg(work.skills, cfg.comp_threshold, cfg.dep_mode, work.adapters),
            health,
            cfg,
        )
    )
    run_stage(_plan_validators(work))
    run_stage(_plan_adapters(work, cfg))

    return MaintenancePlan(
        actions=tuple(actions),
        red_conflicts=tuple(red_conflicts),
        health_before=health,
        risk=risk,
        cgpd_triggered=triggered,
    )


def _describe(a: MaintenanceAction) -> str:
    if a.kind == "merge":
        return f"merge: kept {a.target}, absorbed {', '.join(a.drops)}"
    if a.kind == "repair":
        if a.source_sibling is None:
            return f"repair: {a.target} skipped ({a.reason})"
        return f"repair: {a.target} copied names from {a.source_sibling}"
    if a.kind == "retire":
        return f"retire: {a.target} ({a.reason})"
    if a.kind == "add_validator":
        donor = a.source_sibling or "canonical"
        return f"add_validator: {a.target} (checklist: {donor})"
    if a.kind == "add_adapter":
        return f"add_adapter: {a.target} -> {a.dst}"
    return f"{a.kind}: {a.target}"


def run_maintenance(
    lib: Library,
    trace: ExecutionTrace = EMPTY_TRACE,
    cfg: MaintenanceConfig = MaintenanceConfig(),
) -> tuple[Library, MaintenanceReport]:
    """One full maintenance pass: plan, apply, re-diagnose.

    With force off and debt below the gate the library is returned untouched
    and the report says so; otherwise every planned action is applied in
    order and the report carries the audit log plus health before and after.
    """
    plan = plan_actions(lib, trace, cfg)
    counts = {kind: 0 for kind in ACTION_KINDS}
    if plan.gated:
        report = MaintenanceReport(
            size_before=len(lib),
            size_after=len(lib),
            action_counts=counts,
            actions=(),
            log=(),
            H_before=plan.health_before.H,
            H_after=plan.health_before.H,
            red_conflicts=plan.red_conflicts,
            cgpd_triggered=plan.cgpd_triggered,
            gated=True,
        )
        return lib, report

    work = lib
    log = []
    for a in plan.actions:
        work = apply_action(work, a)
        counts[a.kind] += 1
        log.append(_describe(a))
    g_after = build_hseg(work.skills, cfg.comp_threshold, cfg.dep_mode, work.adapters)
    health_after = library_health(work, g_after, trace, cfg.weights, cfg.window)
    report = MaintenanceReport(
        size_before=len(lib),
        size_after=len(work),
        action_counts=counts,
        actions=plan.actions,
        log=tuple(log),
        H_before=plan.health_before.H,
        H_after=health_after.H,
        red_conflicts=plan.red_conflicts,
        cgpd_triggered=plan.cgpd_triggered,
    )
    return work, report
