"""Generator tests: RNG stream stability, per-kind degradation effects,
deterministic builds, and coherence between provenance and the body-hash
structure maintenance later relies on."""

import pytest

from skillops.contract import (
    ArtifactDirs,
    ConfigInvalid,
    Library,
    body_hash,
    library_fingerprint,
    make_contract,
)
from skillops.debtgen import (
    DEGRADATION_KINDS,
    VOCABULARY,
    Xorshift64Star,
    build_library,
    derive_seed,
    extract_artifact_links,
    inject_degradation,
)
from skillops.maint import MaintenanceConfig, run_maintenance
from skillops.planner import EMPTY_TRACE


# ---------------------------------------------------------------------------
# generator primitives

def test_xorshift_frozen_stream():
    r = Xorshift64Star(42)
    assert [r.u64() for _ in range(3)] == [
        0x56CE4AB7719BA3A0,
        0xC841EB53EBBB2DDA,
        0xCA466BE0C9980276,
    ]


def test_xorshift_zero_seed_is_remapped():
    r = Xorshift64Star(0)
    assert r.state != 0
    assert r.u64() != 0


def test_xorshift_determinism_and_range():
    a, b = Xorshift64Star(99), Xorshift64Star(99)
    for _ in range(200):
        assert a.u64() == b.u64()
    r = Xorshift64Star(7)
    for _ in range(500):
        x = r.random()
        assert 0.0 <= x < 1.0
    r2 = Xorshift64Star(7)
    for _ in range(500):
        assert 1 <= r2.randint(1, 6) <= 6


def test_xorshift_sample_is_a_permutation_prefix():
    r = Xorshift64Star(5)
    got = r.sample(VOCABULARY, 8)
    assert len(got) == 8
    assert len(set(got)) == 8
    assert set(got) <= set(VOCABULARY)
    with pytest.raises(ValueError):
        Xorshift64Star(5).sample(["a"], 2)


def test_derive_seed_frozen_and_distinct():
    assert derive_seed(7, 0) == 0x9E3779B97F4A7C12
    assert derive_seed(7, 1) == 0x3C6EF372FE94F82D
    seen = {derive_seed(123, i) for i in range(1000)}
    assert len(seen) == 1000


def test_extract_artifact_links():
    body = (
        "Run scripts/run_001.sh first.\n"
        "Then read references/guide_001.md and assets/logo.png."
    )
    assert extract_artifact_links(body) == (
        ("scripts", "run_001.sh"),
        ("references", "guide_001.md"),
        ("assets", "logo.png"),
    )
    assert extract_artifact_links("no links here") == ()


# ---------------------------------------------------------------------------
# per-kind degradation

def _source():
    return make_contract(
        id="s007",
        goal="run-etl-007",
        preconditions=frozenset({"etl", "db"}),
        body=(
            "Run the etl pipeline end to end (marker deadbeefdeadbeef).\n"
            "Execute scripts/run_007.sh with the v3 flags and wait for the summary line.\n"
            "Consult references/guide_007.md before changing any defaults."
        ),
        artifact_types=frozenset({"report"}),
        checklist=("produced artifacts match artifact.type",),
        tags=frozenset({"etl", "db", "report"}),
        artifact_dirs=ArtifactDirs(scripts=("run_007.sh",), references=("guide_007.md",)),
    )


def test_redundant_clone_keeps_everything_but_the_id():
    src = _source()
    d = inject_degradation(src, "redundant_clone", "s007-rc", Xorshift64Star(1))
    assert d.id == "s007-rc"
    assert body_hash(d) == body_hash(src)
    assert (d.preconditions, d.artifact_types) == (src.preconditions, src.artifact_types)
    assert d.checklist == src.checklist


def test_stale_clone_renames_references_and_downgrades_versions():
    src = _source()
    d = inject_degradation(src, "stale_clone", "s007-sc", Xorshift64Star(1))
    assert d.artifact_dirs.references == ("guide_007_deprecated.md",)
    assert d.artifact_dirs.scripts == src.artifact_dirs.scripts
    assert "v0" in d.body and "v3" not in d.body
    assert body_hash(d) != body_hash(src)
    # the body still links to the old file name: that is the rot
    links = dict(extract_artifact_links(d.body))
    assert links["references"] == "guide_007.md"
    assert "guide_007.md" not in d.artifact_dirs.references


def test_missing_validator_strips_the_checklist_only():
    src = _source()
    d = inject_degradation(src, "missing_validator", "s007-mv", Xorshift64Star(1))
    assert d.checklist == ()
    assert d.validator_kind == "none"
    assert body_hash(d) == body_hash(src)


def test_missing_artifact_empties_directories_but_not_the_body():
    src = _source()
    d = inject_degradation(src, "missing_artifact", "s007-ma", Xorshift64Star(1))
    assert d.artifact_dirs.is_empty()
    assert body_hash(d) == body_hash(src)
    assert extract_artifact_links(d.body) == extract_artifact_links(src.body)


def test_wrong_interface_draws_disjoint_artifact_types():
    src = _source()
    d = inject_degradation(src, "wrong_interface", "s007-wi", Xorshift64Star(1))
    assert d.artifact_types
    assert not d.artifact_types & (src.artifact_types | src.preconditions)
    assert d.preconditions == src.preconditions
    assert d.body.startswith(src.body)
    assert "Note: emits [" in d.body.split("\n")[-1]
    assert body_hash(d) != body_hash(src)


def test_wrong_interface_bodies_never_collide():
    src = _source()
    a = inject_degradation(src, "wrong_interface", "w1", Xorshift64Star(1))
    b = inject_degradation(src, "wrong_interface", "w2", Xorshift64Star(2))
    assert body_hash(a) != body_hash(b)


def test_over_specialized_narrows_tags():
    src = _source()
    d = inject_degradation(src, "over_specialized", "s007-os", Xorshift64Star(1))
    assert d.tags == frozenset({"q3-2025-only"})
    assert body_hash(d) == body_hash(src)


def test_unknown_kind_rejected():
    with pytest.raises(ConfigInvalid):
        inject_degradation(_source(), "bit_flip", "x", Xorshift64Star(1))


# ---------------------------------------------------------------------------
# library builds

def test_build_is_deterministic():
    lib1, prov1 = build_library(120, 0.35, seed=9)
    lib2, prov2 = build_library(120, 0.35, seed=9)
    assert library_fingerprint(lib1) == library_fingerprint(lib2)
    assert prov1 == prov2
    lib3, _ = build_library(120, 0.35, seed=10)
    assert library_fingerprint(lib3) != library_fingerprint(lib1)


def test_build_composition_counts():
    lib, prov = build_library(500, 0.60, seed=42)
    assert len(lib) == 500
    assert set(prov) == set(lib.ids())
    degraded = [p for p in prov.values() if p != "clean"]
    assert len(degraded) == 300
    assert sum(1 for p in prov.values() if p == "clean") == 200
    for p in degraded:
        tag, kind, src = p.split(":")
        assert tag == "degraded"
        assert kind in DEGRADATION_KINDS
        assert prov.get(src) == "clean"


def test_clean_sources_have_distinct_interfaces():
    lib, prov = build_library(150, 0.0, seed=4)
    assert all(p == "clean" for p in prov.values())
    ifaces = {(s.preconditions, s.artifact_types) for s in lib.skills}
    assert len(ifaces) == len(lib)
    hashes = {body_hash(s) for s in lib.skills}
    assert len(hashes) == len(lib)


def test_single_fully_degraded_entry():
    lib, prov = build_library(1, 1.0, seed=0)
    assert len(lib) == 1
    (p,) = prov.values()
    assert p.startswith("degraded:")


def test_bad_parameters_rejected():
    with pytest.raises(ConfigInvalid):
        build_library(0, 0.0, seed=1)
    with pytest.raises(ConfigInvalid):
        build_library(10, 1.5, seed=1)


def test_clean_library_needs_no_maintenance():
    lib, _ = build_library(80, 0.0, seed=3)
    before = library_fingerprint(lib)
    new_lib, report = run_maintenance(lib, EMPTY_TRACE, MaintenanceConfig())
    assert report.actions == ()
    assert report.size_after == report.size_before == 80
    assert library_fingerprint(new_lib) == before


def _provenance_body_groups(lib: Library, prov: dict) -> set[frozenset]:
    """Predict the body-hash partition from provenance alone."""
    body_preserving = {
        "redundant_clone",
        "missing_validator",
        "missing_artifact",
        "over_specialized",
    }
    groups: dict[tuple, set] = {}
    for sid, p in prov.items():
        if p == "clean":
            groups.setdefault(("orig", sid), set()).add(sid)
            continue
        _, kind, src = p.split(":")
        if kind in body_preserving:
            groups.setdefault(("orig", src), set()).add(sid)
        elif kind == "stale_clone":
            groups.setdefault(("stale", src), set()).add(sid)
        else:  # wrong_interface carries a unique note line
            groups.setdefault(("solo", sid), set()).add(sid)
    return {frozenset(g) for g in groups.values()}


def test_provenance_predicts_the_body_hash_partition():
    lib, prov = build_library(200, 0.5, seed=11)
    actual: dict[str, set] = {}
    for s in lib.skills:
        actual.setdefault(body_hash(s), set()).add(s.id)
    assert {frozenset(g) for g in actual.values()} == _provenance_body_groups(lib, prov)


def test_maintenance_merges_match_the_provenance_oracle():
    lib, prov = build_library(200, 0.5, seed=11)
    groups = _provenance_body_groups(lib, prov)
    expected_merges = sum(1 for g in groups if len(g) >= 2)
    expected_absorbed = sum(len(g) - 1 for g in groups if len(g) >= 2)
    assert expected_merges > 0

    new_lib, report = run_maintenance(lib, EMPTY_TRACE, MaintenanceConfig())
    assert report.action_counts.get("merge", 0) == expected_merges
    absorbed = sum(len(a.drops) for a in report.actions if a.kind == "merge")
    assert absorbed == expected_absorbed
    assert report.size_after == 200 - expected_absorbed
    # untraced skills sit at the utility prior, so nothing is retired, and
    # generated interfaces keep every dep edge over the threshold
    assert report.action_counts.get("retire", 0) == 0
    assert report.action_counts.get("add_adapter", 0) == 0
    # after merging, no two survivors share a body
    survivors: dict[str, set] = {}
    for s in new_lib.skills:
        survivors.setdefault(body_hash(s), set()).add(s.id)
    assert all(len(members) == 1 for members in survivors.values())


def test_wrong_interface_clones_survive_merging():
    lib, prov = build_library(200, 0.5, seed=11)
    wi_ids = {sid for sid, p in prov.items() if ":wrong_interface:" in p}
    assert wi_ids
    new_lib, _ = run_maintenance(lib, EMPTY_TRACE, MaintenanceConfig())
    assert wi_ids <= set(new_lib.ids())
