import json

import pytest
from hypothesis import given, settings, strategies as st

from skillops.contract import AdapterShim, DuplicateSkillId, make_contract
from skillops.hseg import build_hseg, jaccard


def skill(sid, pre=(), art=(), goal="g", body=None, **kw):
    return make_contract(
        id=sid,
        goal=goal,
        preconditions=frozenset(pre),
        body=body if body is not None else f"body of {sid}",
        artifact_types=frozenset(art),
        **kw,
    )


def brute_force_edges(skills, comp_threshold=0.3, dep_mode="subset"):
    """Definitional O(N^2) oracle."""
    from skillops.contract import body_hash

    edges = set()
    for i in skills:
        for j in skills:
            if i.id == j.id:
                continue
            a, p = i.artifact_types, j.preconditions
            if dep_mode == "subset":
                dep = bool(a) and a <= p
            else:
                dep = bool(a & p)
            if dep:
                edges.add((i.id, j.id, "dep"))
            if jaccard(a, p) >= comp_threshold:
                edges.add((i.id, j.id, "comp"))
            if i.preconditions == j.preconditions and i.artifact_types == j.artifact_types:
                edges.add((i.id, j.id, "red"))
            if i.goal == j.goal and body_hash(i) != body_hash(j):
                edges.add((i.id, j.id, "alt"))
    return edges


def test_dep_and_comp_example():
    i = skill("i", pre=("html",), art=("json",))
    j = skill("j", pre=("json", "table"), art=("csv",))
    g = build_hseg([i, j])
    assert g.edge_exists("dep", "i", "j")
    assert jaccard(frozenset({"json"}), frozenset({"json", "table"})) == 0.5
    assert g.edge_exists("comp", "i", "j")
    # reverse direction: csv not a subset of {html}
    assert not g.edge_exists("dep", "j", "i")
    assert not g.edge_exists("comp", "j", "i")


def test_dep_requires_nonempty_artifacts():
    i = skill("i", pre=("a",), art=())
    j = skill("j", pre=(), art=())
    g = build_hseg([i, j])
    # empty artifact set feeds nothing, even though {} is a subset of anything
    assert not g.edge_exists("dep", "i", "j")
    assert not g.edge_exists("comp", "i", "j")
    assert jaccard(frozenset(), frozenset()) == 0.0


def test_comp_threshold_boundary():
    # jaccard exactly at the threshold counts as compatible
    i = skill("i", art=("a",))
    j = skill("j", pre=("a", "b", "c"))  # 1/3 >= 0.3
    k = skill("k", pre=("a", "b", "c", "d"))  # 1/4 < 0.3
    g = build_hseg([i, j, k])
    assert g.edge_exists("comp", "i", "j")
    assert not g.edge_exists("comp", "i", "k")
    assert g.edge_exists("dep", "i", "k")  # subset holds regardless


def test_red_symmetric_and_no_self_edges():
    a = skill("a", pre=("x",), art=("y",), body="one")
    b = skill("b", pre=("x",), art=("y",), body="two")
    g = build_hseg([a, b])
    assert g.edge_exists("red", "a", "b")
    assert g.edge_exists("red", "b", "a")
    assert not g.edge_exists("red", "a", "a")
    listed = g.edge_set(("red",))
    assert ("a", "b", "red") in listed and ("b", "a", "red") in listed


def test_red_transitive_clique():
    trio = [skill(s, pre=("x",), art=("y",), body=f"b{s}") for s in "abc"]
    g = build_hseg(trio)
    for s in "abc":
        for d in "abc":
            assert g.edge_exists("red", s, d) == (s != d)
    assert g.red_clusters() == (("a", "b", "c"),)


def test_alt_same_goal_different_body():
    a = skill("a", goal="fetch", body="one way", art=("t",))
    b = skill("b", goal="fetch", body="another way", art=("t",))
    c = skill("c", goal="fetch", body="one way", art=("t",))
    g = build_hseg([a, b, c])
    assert g.edge_exists("alt", "a", "b")
    assert g.edge_exists("alt", "b", "a")
    assert not g.edge_exists("alt", "a", "c")  # same body hash
    assert g.alt_neighbors("a") == ("b",)


def test_red_clusters_partition():
    sks = [
        skill("a", pre=("x",), art=("y",)),
        skill("b", pre=("x",), art=("y",)),
        skill("c", pre=("z",), art=("y",)),
    ]
    g = build_hseg(sks)
    clusters = g.red_clusters()
    assert clusters == (("a", "b"), ("c",))
    assert g.red_cluster_of("a") == ("a", "b")
    assert sorted(sid for cl in clusters for sid in cl) == ["a", "b", "c"]


def test_parents():
    up = skill("up", art=("json",))
    down = skill("down", pre=("json",), art=("csv",))
    other = skill("other", art=("xml",))
    g = build_hseg([up, down, other])
    assert g.parents("down") == frozenset({"up"})
    assert g.parents("up") == frozenset()


def test_duplicate_ids_rejected():
    a = skill("a")
    with pytest.raises(DuplicateSkillId):
        build_hseg([a, a])


def test_dep_mode_overlap():
    i = skill("i", art=("json", "log"))
    j = skill("j", pre=("json", "table", "form", "chart"))
    g_sub = build_hseg([i, j])
    g_ovl = build_hseg([i, j], dep_mode="overlap")
    assert not g_sub.edge_exists("dep", "i", "j")
    assert g_ovl.edge_exists("dep", "i", "j")
    # jaccard 1/5 < 0.3: an organically dep-without-comp edge
    assert not g_ovl.edge_exists("comp", "i", "j")
    assert g_ovl.dep_not_comp_pairs() == [("i", "j")]


def test_incident_dep_counts_hand_case():
    i = skill("i", art=("json",))
    j = skill("j", pre=("json", "table"), art=("csv",))
    k = skill("k", pre=("json", "a", "b", "c"))  # dep from i, jaccard 1/4 -> not comp
    g = build_hseg([i, j, k])
    assert g.incident_dep_counts("i") == (2, 1)
    assert g.incident_dep_counts("j") == (1, 1)
    assert g.incident_dep_counts("k") == (1, 0)


def test_adapter_bridging_counts():
    i = skill("i", art=("json",))
    k = skill("k", pre=("json", "a", "b", "c"))
    shim = AdapterShim(
        src="i", dst="k",
        contract=skill("adapt--i--k", pre=("json",), art=("json", "a", "b", "c"),
                       goal="adapt:i:k"),
    )
    g = build_hseg([i, k], adapters=(shim,))
    assert g.is_bridged("i", "k")
    assert not g.is_bridged("k", "i")
    assert g.incident_dep_counts("i") == (1, 1)
    assert g.incident_dep_counts("k") == (1, 1)


def test_export_shape_and_determinism():
    sks = [skill("a", art=("x",)), skill("b", pre=("x",), art=("x",))]
    g1, g2 = build_hseg(sks), build_hseg(list(reversed(sks)))
    ex1, ex2 = g1.export(), g2.export()
    assert json.dumps(ex1, sort_keys=True) == json.dumps(ex2, sort_keys=True)
    assert ex1["nodes"] == ["a", "b"]
    assert {tuple(e.values()) for e in ex1["edges"]} >= {("a", "b", "dep")}
    assert ex1["adapters"] == []


_tags = st.sets(st.sampled_from(["t1", "t2", "t3", "t4", "t5"]), max_size=3)


@st.composite
def libraries(draw):
    n = draw(st.integers(min_value=1, max_value=12))
    out = []
    for i in range(n):
        out.append(
            skill(
                f"s{i:02d}",
                pre=draw(_tags),
                art=draw(_tags),
                goal=draw(st.sampled_from(["g1", "g2", "g3"])),
                body=draw(st.sampled_from(["alpha", "beta", "gamma"])),
            )
        )
    return out


@settings(max_examples=120, deadline=None)
@given(libraries(), st.sampled_from([0.3, 0.5]), st.sampled_from(["subset", "overlap"]))
def test_edges_match_brute_force_oracle(lib, threshold, dep_mode):
    g = build_hseg(lib, comp_threshold=threshold, dep_mode=dep_mode)
    expected = brute_force_edges(lib, threshold, dep_mode)
    assert g.edge_set() == expected
    for i in lib:
        for j in lib:
            for kind in ("dep", "comp", "red", "alt"):
                assert g.edge_exists(kind, i.id, j.id) == (
                    (i.id, j.id, kind) in expected
                )


@settings(max_examples=60, deadline=None)
@given(libraries())
def test_incident_counts_match_oracle(lib):
    g = build_hseg(lib)
    edges = brute_force_edges(lib)
    for s in lib:
        dep_edges = [
            (a, b) for (a, b, k) in edges if k == "dep" and s.id in (a, b)
        ]
        ok = sum(1 for (a, b) in dep_edges if (a, b, "comp") in edges)
        assert g.incident_dep_counts(s.id) == (len(dep_edges), ok)


@settings(max_examples=60, deadline=None)
@given(libraries())
def test_parents_and_clusters_match_oracle(lib):
    g = build_hseg(lib)
    edges = brute_force_edges(lib)
    for s in lib:
        expected = frozenset(a for (a, b, k) in edges if k == "dep" and b == s.id)
        assert g.parents(s.id) == expected
    # red clusters partition the nodes and members are pairwise red-linked
    clusters = g.red_clusters()
    seen = [sid for cl in clusters for sid in cl]
    assert sorted(seen) == sorted(s.id for s in lib)
    for cl in clusters:
        for x in cl:
            for y in cl:
                if x != y:
                    assert (x, y, "red") in edges
