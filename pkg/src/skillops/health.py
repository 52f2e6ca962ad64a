"""Per-skill health vectors and library-level health.

Each skill gets five signals in [0, 1]:

  U  success rate over its most recent window of calls (0.5 when never called)
  R  red-cluster crowding: (cluster size - 1) / max(1, library size - 1)
  C  share of incident dep edges that are compatible or adapter-bridged
     (1.0 when the skill has no dep edges)
  F  failure rate over the same window (0.0 when never called)
  G  1 exactly when the skill has no validator checklist

Library health H is the weighted per-skill score averaged over the library,
debt is 1 - H.  Under uniform weights H equals 1 minus the mean local risk.
Sums use math.fsum so an all-perfect library scores exactly 1.0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from skillops.contract import EmptyLibrary, Library, SkillContract
from skillops.hseg import Hseg
from skillops.planner import ExecutionTrace, TraceEntry

__all__ = [
    "HealthVector",
    "HealthWeights",
    "UNIFORM_WEIGHTS",
    "LibraryHealthReport",
    "health_vector",
    "library_health",
    "local_risk",
    "skill_score",
]

DEFAULT_WINDOW = 100


@dataclass(frozen=True)
class HealthVector:
    U: float
    R: float
    C: float
    F: float
    G: float

    def as_dict(self) -> dict[str, float]:
        return {"U": self.U, "R": self.R, "C": self.C, "F": self.F, "G": self.G}


@dataclass(frozen=True)
class HealthWeights:
    w_u: float = 0.2
    w_r: float = 0.2
    w_c: float = 0.2
    w_f: float = 0.2
    w_g: float = 0.2

    def validate(self) -> None:
        total = math.fsum((self.w_u, self.w_r, self.w_c, self.w_f, self.w_g))
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"health weights must sum to 1, got {total!r}")
        if min(self.w_u, self.w_r, self.w_c, self.w_f, self.w_g) < 0:
            raise ValueError("health weights must be nonnegative")


UNIFORM_WEIGHTS = HealthWeights()


def skill_score(hv: HealthVector, weights: HealthWeights = UNIFORM_WEIGHTS) -> float:
    return math.fsum(
        (
            weights.w_u * hv.U,
            weights.w_r * (1.0 - hv.R),
            weights.w_c * hv.C,
            weights.w_f * (1.0 - hv.F),
            weights.w_g * (1.0 - hv.G),
        )
    )


def local_risk(hv: HealthVector) -> float:
    """Unweighted mean of the five risk directions; the seed for risk
    propagation."""
    return math.fsum(((1.0 - hv.U), hv.R, (1.0 - hv.C), hv.F, hv.G)) / 5.0


def _usage_rates(entries, window: int) -> tuple[float, float]:
    if not entries:
        return 0.5, 0.0
    recent = entries[-window:]
    successes = sum(1 for e in recent if e.outcome == "success")
    return successes / len(recent), (len(recent) - successes) / len(recent)


def _vector(
    s: SkillContract, g: Hseg, entries: tuple[TraceEntry, ...], window: int
) -> HealthVector:
    u, f = _usage_rates(entries, window)
    cluster = len(g.red_cluster_of(s.id))
    r = (cluster - 1) / max(1, len(g.nodes) - 1)
    dep_total, dep_ok = g.incident_dep_counts(s.id)
    c = dep_ok / dep_total if dep_total else 1.0
    return HealthVector(U=u, R=r, C=c, F=f, G=0.0 if s.checklist else 1.0)


def health_vector(
    s: SkillContract,
    g: Hseg,
    trace: ExecutionTrace = ExecutionTrace(),
    window: int = DEFAULT_WINDOW,
) -> HealthVector:
    return _vector(s, g, trace.for_skill(s.id), window)


@dataclass(frozen=True)
class LibraryHealthReport:
    per_skill: dict[str, HealthVector]
    H: float
    debt: float
    weights: HealthWeights = UNIFORM_WEIGHTS
    window: int = DEFAULT_WINDOW

    def local_risks(self) -> dict[str, float]:
        return {sid: local_risk(hv) for sid, hv in self.per_skill.items()}

    def as_dict(self) -> dict:
        per_skill = {}
        for sid in sorted(self.per_skill):
            entry = self.per_skill[sid].as_dict()
            entry["local_risk"] = local_risk(self.per_skill[sid])
            per_skill[sid] = entry
        return {"H": self.H, "debt": self.debt, "per_skill": per_skill}


def library_health(
    lib: Library,
    g: Hseg,
    trace: ExecutionTrace = ExecutionTrace(),
    weights: HealthWeights = UNIFORM_WEIGHTS,
    window: int = DEFAULT_WINDOW,
) -> LibraryHealthReport:
    """Diagnose every skill with one pass over the trace."""
    weights.validate()
    skills = lib.skills if isinstance(lib, Library) else tuple(lib)
    if not skills:
        raise EmptyLibrary("cannot diagnose an empty library")
    buckets: dict[str, list[TraceEntry]] = {s.id: [] for s in skills}
    for entry in trace.entries:
        if entry.skill in buckets:
            buckets[entry.skill].append(entry)
    per_skill = {
        s.id: _vector(s, g, tuple(buckets[s.id]), window) for s in skills
    }
    h = math.fsum(skill_score(hv, weights) for hv in per_skill.values()) / len(
        per_skill
    )
    return LibraryHealthReport(
        per_skill=per_skill, H=h, debt=1.0 - h, weights=weights, window=window
    )
