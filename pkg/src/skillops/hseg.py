"""Typed graph over a skill library.

Four directed edge kinds connect skills i -> j:

  dep   artifacts feed preconditions: A_i subseteq P_j, A_i nonempty
        (or, under dep_mode="overlap", A_i intersects P_j)
  comp  interface compatibility: jaccard(A_i, P_j) >= comp_threshold
  red   interchangeable interfaces: P_i == P_j and A_i == A_j (symmetric)
  alt   same goal, different body hash (symmetric)

Self edges never exist.  Because libraries are clone-heavy, the graph keeps
interface-signature groups instead of a materialized edge set: all pair
predicates are answered from per-skill signatures, and aggregate counts are
computed once per distinct (artifact-set, precondition-set) pair.  Edge
listings for export or brute-force checks are generated on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from skillops.contract import (
    AdapterShim,
    DuplicateSkillId,
    SkillContract,
    body_hash,
)

__all__ = ["AdapterRecord", "Hseg", "build_hseg", "jaccard", "EDGE_KINDS"]

EDGE_KINDS = ("dep", "comp", "red", "alt")


def jaccard(a: frozenset, b: frozenset) -> float:
    """Set similarity in [0, 1]; two empty sets count as disjoint."""
    if not a and not b:
        return 0.0
    return len(a & b) / len(a | b)


@dataclass(frozen=True)
class AdapterRecord:
    src: str
    dst: str
    artifact_types: frozenset[str]


@dataclass
class Hseg:
    """Built by build_hseg; treat as immutable once constructed."""

    nodes: frozenset[str]
    comp_threshold: float
    dep_mode: str
    adapter_records: frozenset[AdapterRecord]

    artifact_sets: dict[str, frozenset] = field(default_factory=dict)
    precondition_sets: dict[str, frozenset] = field(default_factory=dict)
    goals: dict[str, str] = field(default_factory=dict)
    body_hashes: dict[str, str] = field(default_factory=dict)

    _a_groups: dict[frozenset, tuple[str, ...]] = field(default_factory=dict)
    _p_groups: dict[frozenset, tuple[str, ...]] = field(default_factory=dict)
    _iface_groups: dict[tuple, tuple[str, ...]] = field(default_factory=dict)
    _goal_groups: dict[str, tuple[str, ...]] = field(default_factory=dict)
    # per distinct precondition signature, the artifact signatures that feed it
    _parent_sigs: dict[frozenset, tuple[frozenset, ...]] = field(default_factory=dict)
    _out_counts: dict[frozenset, tuple[int, int]] = field(default_factory=dict)
    _in_counts: dict[frozenset, tuple[int, int]] = field(default_factory=dict)
    _bridged_counts: dict[str, int] = field(default_factory=dict)

    # ---- pair predicates -------------------------------------------------

    def _dep_sig(self, a: frozenset, p: frozenset) -> bool:
        if not a:
            return False
        if self.dep_mode == "overlap":
            return bool(a & p)
        return a <= p

    def _comp_sig(self, a: frozenset, p: frozenset) -> bool:
        return jaccard(a, p) >= self.comp_threshold

    def edge_exists(self, kind: str, src: str, dst: str) -> bool:
        if src == dst or src not in self.nodes or dst not in self.nodes:
            return False
        if kind == "dep":
            return self._dep_sig(self.artifact_sets[src], self.precondition_sets[dst])
        if kind == "comp":
            return self._comp_sig(self.artifact_sets[src], self.precondition_sets[dst])
        if kind == "red":
            return (self.precondition_sets[src] == self.precondition_sets[dst]
                    and self.artifact_sets[src] == self.artifact_sets[dst])
        if kind == "alt":
            return (self.goals[src] == self.goals[dst]
                    and self.body_hashes[src] != self.body_hashes[dst])
        raise ValueError(f"unknown edge kind: {kind}")

    def is_bridged(self, src: str, dst: str) -> bool:
        """True when a registered adapter carries this pair and its artifact
        types satisfy the destination's preconditions."""
        p_dst = self.precondition_sets.get(dst)
        if p_dst is None:
            return False
        return any(
            rec.src == src and rec.dst == dst and rec.artifact_types <= p_dst
            for rec in self.adapter_records
        )

    # ---- neighborhoods ---------------------------------------------------

    def parents(self, skill_id: str) -> frozenset[str]:
        """Skills whose artifacts feed skill_id's preconditions (dep in-edges)."""
        p = self.precondition_sets[skill_id]
        out = set()
        for a_sig in self._parent_sigs[p]:
            out.update(self._a_groups[a_sig])
        out.discard(skill_id)
        return frozenset(out)

    def alt_neighbors(self, skill_id: str) -> tuple[str, ...]:
        """Same-goal, different-body skills, ascending id."""
        mine = self.body_hashes[skill_id]
        return tuple(
            other for other in self._goal_groups[self.goals[skill_id]]
            if other != skill_id and self.body_hashes[other] != mine
        )

    def red_clusters(self) -> tuple[tuple[str, ...], ...]:
        """Partition of the nodes into maximal interface-equal groups, each
        sorted ascending, clusters ordered by their smallest member."""
        return tuple(sorted(self._iface_groups.values(), key=lambda c: c[0]))

    def red_cluster_of(self, skill_id: str) -> tuple[str, ...]:
        key = (self.precondition_sets[skill_id], self.artifact_sets[skill_id])
        return self._iface_groups[key]

    # ---- aggregate dep/comp counts for health ----------------------------

    def incident_dep_counts(self, skill_id: str) -> tuple[int, int]:
        """(incident dep edges, incident dep edges that are compatible or
        adapter-bridged) counting both directions, self pairs excluded."""
        a, p = self.artifact_sets[skill_id], self.precondition_sets[skill_id]
        out_dep, out_ok = self._out_counts[a]
        in_dep, in_ok = self._in_counts[p]
        if self._dep_sig(a, p):  # remove the would-be self edge on both sides
            out_dep -= 1
            in_dep -= 1
            if self._comp_sig(a, p):
                out_ok -= 1
                in_ok -= 1
        bridged = self._bridged_counts.get(skill_id, 0)
        return out_dep + in_dep, out_ok + in_ok + bridged

    # ---- listings (on-demand; can be quadratic on clone-heavy graphs) ----

    def iter_edges(self, kinds=EDGE_KINDS):
        if "dep" in kinds or "comp" in kinds:
            for a_sig, srcs in self._a_groups.items():
                for p_sig, dsts in self._p_groups.items():
                    dep = self._dep_sig(a_sig, p_sig)
                    comp = self._comp_sig(a_sig, p_sig)
                    if not dep and not comp:
                        continue
                    for s in srcs:
                        for d in dsts:
                            if s == d:
                                continue
                            if dep and "dep" in kinds:
                                yield (s, d, "dep")
                            if comp and "comp" in kinds:
                                yield (s, d, "comp")
        if "red" in kinds:
            for cluster in self._iface_groups.values():
                for s, d in combinations(cluster, 2):
                    yield (s, d, "red")
                    yield (d, s, "red")
        if "alt" in kinds:
            for members in self._goal_groups.values():
                for s, d in combinations(members, 2):
                    if self.body_hashes[s] != self.body_hashes[d]:
                        yield (s, d, "alt")
                        yield (d, s, "alt")

    def edge_set(self, kinds=EDGE_KINDS) -> frozenset[tuple[str, str, str]]:
        return frozenset(self.iter_edges(kinds))

    def dep_not_comp_pairs(self):
        """Ordered (src, dst) pairs holding a dep edge without comp."""
        pairs = []
        for a_sig, srcs in self._a_groups.items():
            for p_sig, dsts in self._p_groups.items():
                if self._dep_sig(a_sig, p_sig) and not self._comp_sig(a_sig, p_sig):
                    pairs.extend(
                        (s, d) for s in srcs for d in dsts if s != d
                    )
        return sorted(pairs)

    def export(self) -> dict:
        return {
            "nodes": sorted(self.nodes),
            "edges": [
                {"src": s, "dst": d, "kind": k}
                for s, d, k in sorted(self.edge_set(), key=lambda e: (e[2], e[0], e[1]))
            ],
            "adapters": [
                {"src": r.src, "dst": r.dst, "artifact_types": sorted(r.artifact_types)}
                for r in sorted(self.adapter_records, key=lambda r: (r.src, r.dst))
            ],
        }


def _feeding_sigs(p_sig, a_groups, dep_mode) -> tuple[frozenset, ...]:
    """Artifact signatures with a dep relation into p_sig.  Under subset
    mode, enumerating the powerset of p_sig beats scanning every group when
    p_sig is small."""
    if dep_mode == "subset" and 2 ** len(p_sig) <= len(a_groups):
        items = sorted(p_sig)
        found = [
            frozenset(combo)
            for r in range(1, len(items) + 1)
            for combo in combinations(items, r)
            if frozenset(combo) in a_groups
        ]
        return tuple(sorted(found, key=sorted))
    if dep_mode == "subset":
        return tuple(sorted((a for a in a_groups if a and a <= p_sig), key=sorted))
    return tuple(sorted((a for a in a_groups if a & p_sig), key=sorted))


def build_hseg(
    skills,
    comp_threshold: float = 0.3,
    dep_mode: str = "subset",
    adapters: tuple[AdapterShim, ...] = (),
) -> Hseg:
    """Construct the graph for a collection of contracts.

    Pairwise over distinct interface signatures rather than skills, so the
    cost is O(N + distinct_A * distinct_P) instead of O(N^2) on libraries
    full of clones.
    """
    if dep_mode not in ("subset", "overlap"):
        raise ValueError(f"dep_mode must be subset or overlap, got {dep_mode!r}")
    skills = tuple(skills)
    ids = [s.id for s in skills]
    if len(set(ids)) != len(ids):
        dupes = sorted({i for i in ids if ids.count(i) > 1})
        raise DuplicateSkillId(", ".join(dupes))

    records = frozenset(
        AdapterRecord(a.src, a.dst, a.contract.artifact_types) for a in adapters
    )
    g = Hseg(
        nodes=frozenset(ids),
        comp_threshold=comp_threshold,
        dep_mode=dep_mode,
        adapter_records=records,
    )
    a_groups: dict[frozenset, list] = {}
    p_groups: dict[frozenset, list] = {}
    iface_groups: dict[tuple, list] = {}
    goal_groups: dict[str, list] = {}
    for s in sorted(skills, key=lambda s: s.id):
        a, p = s.artifact_types, s.preconditions
        g.artifact_sets[s.id] = a
        g.precondition_sets[s.id] = p
        g.goals[s.id] = s.goal
        g.body_hashes[s.id] = body_hash(s)
        a_groups.setdefault(a, []).append(s.id)
        p_groups.setdefault(p, []).append(s.id)
        iface_groups.setdefault((p, a), []).append(s.id)
        goal_groups.setdefault(s.goal, []).append(s.id)
    g._a_groups = {k: tuple(v) for k, v in a_groups.items()}
    g._p_groups = {k: tuple(v) for k, v in p_groups.items()}
    g._iface_groups = {k: tuple(v) for k, v in iface_groups.items()}
    g._goal_groups = {k: tuple(v) for k, v in goal_groups.items()}

    for p_sig in g._p_groups:
        g._parent_sigs[p_sig] = _feeding_sigs(p_sig, g._a_groups, dep_mode)

    # aggregate dep/comp counts per signature, reused by every member skill
    out_counts: dict[frozenset, tuple[int, int]] = {}
    in_counts: dict[frozenset, tuple[int, int]] = {}
    p_sizes = {sig: len(members) for sig, members in g._p_groups.items()}
    a_sizes = {sig: len(members) for sig, members in g._a_groups.items()}
    for a_sig in g._a_groups:
        dep_n = ok_n = 0
        for p_sig, count in p_sizes.items():
            if g._dep_sig(a_sig, p_sig):
                dep_n += count
                if g._comp_sig(a_sig, p_sig):
                    ok_n += count
        out_counts[a_sig] = (dep_n, ok_n)
    for p_sig in g._p_groups:
        dep_n = ok_n = 0
        for a_sig in g._parent_sigs[p_sig]:
            count = a_sizes[a_sig]
            dep_n += count
            if g._comp_sig(a_sig, p_sig):
                ok_n += count
        in_counts[p_sig] = (dep_n, ok_n)
    g._out_counts.update(out_counts)
    g._in_counts.update(in_counts)

    bridged: dict[str, int] = {}
    for rec in records:
        if rec.src not in g.nodes or rec.dst not in g.nodes:
            continue
        a, p = g.artifact_sets[rec.src], g.precondition_sets[rec.dst]
        if g._dep_sig(a, p) and not g._comp_sig(a, p) and rec.artifact_types <= p:
            bridged[rec.src] = bridged.get(rec.src, 0) + 1
            bridged[rec.dst] = bridged.get(rec.dst, 0) + 1
    g._bridged_counts.update(bridged)
    return g
