"""Skill contracts and the on-disk skill file format.

A skill is stored as a single markdown file with a key/value front matter
block fenced by ``---`` lines, followed by an ``## Operation`` section whose
text is the skill body.  Optional ``## Checklist`` and ``## Failure Modes``
sections carry validator items and known failure tokens.  Front matter keys
the parser does not know are kept verbatim in an extras map so that foreign
files survive a parse/serialize cycle.

Serialization is canonical: fixed key order, sorted list values, unchecked
checklist boxes, empty optional keys omitted.  ``parse_skill_file`` composed
with ``serialize_skill_file`` is the identity on valid contracts, and
serializing the same contract twice yields byte-identical text.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace

__all__ = [
    "SkillOpsError",
    "ContractInvariantError",
    "SkillParseError",
    "MalformedFrontMatter",
    "MissingOperationSection",
    "DuplicateSection",
    "UnknownSection",
    "DuplicateSkillId",
    "ConfigInvalid",
    "UnknownSkillId",
    "EmptyLibrary",
    "ArtifactDirs",
    "SkillContract",
    "AdapterShim",
    "Library",
    "normalize_body",
    "body_hash",
    "parse_skill_file",
    "serialize_skill_file",
    "library_fingerprint",
]


class SkillOpsError(Exception):
    """Base class for every error raised by this package."""


class ContractInvariantError(SkillOpsError):
    """A contract value violates one of its structural invariants."""


class SkillParseError(SkillOpsError):
    """Base class for skill file parse errors."""


class MalformedFrontMatter(SkillParseError):
    pass


class MissingOperationSection(SkillParseError):
    pass


class DuplicateSection(SkillParseError):
    pass


class UnknownSection(SkillParseError):
    pass


class DuplicateSkillId(SkillOpsError):
    pass


class ConfigInvalid(SkillOpsError):
    pass


class UnknownSkillId(SkillOpsError):
    pass


class EmptyLibrary(SkillOpsError):
    pass


_ID_RE = re.compile(r"^[a-z0-9_\-]+$")
_TAG_RE = re.compile(r"^[a-z0-9][a-z0-9_\-.]*$")

ARTIFACT_DIR_NAMES = ("scripts", "references", "assets")

# Canonical front matter keys, in emission order.  artifacts.* keys index the
# sibling directories so a skill file is self-contained for round-tripping.
_KNOWN_KEYS = (
    "id",
    "goal",
    "preconditions",
    "artifact.type",
    "validator.kind",
    "failure_modes",
    "tags",
    "artifacts.scripts",
    "artifacts.references",
    "artifacts.assets",
)

_SECTION_RE = re.compile(r"^## (.+?)\s*$")
_KNOWN_SECTIONS = ("Operation", "Checklist", "Failure Modes")


def normalize_body(text: str) -> str:
    """Canonicalize a skill body.

    Line endings become LF, trailing whitespace is trimmed per line, any run
    of consecutive newlines collapses to a single newline, and one trailing
    newline is stripped.  Idempotent.
    """
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    joined = "\n".join(line.rstrip() for line in text.split("\n"))
    joined = re.sub(r"\n{2,}", "\n", joined)
    return joined.removesuffix("\n")


def _is_token(value: str) -> bool:
    return bool(value) and not any(ch.isspace() for ch in value)


@dataclass(frozen=True)
class ArtifactDirs:
    """File names held in a skill's sibling directories."""

    scripts: tuple[str, ...] = ()
    references: tuple[str, ...] = ()
    assets: tuple[str, ...] = ()

    def get(self, name: str) -> tuple[str, ...]:
        if name not in ARTIFACT_DIR_NAMES:
            raise KeyError(name)
        return getattr(self, name)

    def is_empty(self) -> bool:
        return not (self.scripts or self.references or self.assets)


EMPTY_DIRS = ArtifactDirs()


@dataclass(frozen=True)
class SkillContract:
    """One skill: preconditions, operation body, artifact types, validator,
    failure modes, plus retrieval tags and an index of its artifact files.

    The validator kind is derived: a skill validates by checklist exactly
    when it has at least one checklist item, so kind and item list can never
    disagree.
    """

    id: str
    goal: str
    preconditions: frozenset[str]
    body: str
    artifact_types: frozenset[str]
    checklist: tuple[str, ...] = ()
    failure_modes: frozenset[str] = frozenset()
    tags: frozenset[str] = frozenset()
    artifact_dirs: ArtifactDirs = EMPTY_DIRS
    extras: tuple[tuple[str, str], ...] = ()

    @property
    def validator_kind(self) -> str:
        return "checklist" if self.checklist else "none"

    def validate(self) -> None:
        """Raise ContractInvariantError on any structural violation."""
        if not _ID_RE.match(self.id):
            raise ContractInvariantError(f"bad skill id: {self.id!r}")
        if not _is_token(self.goal):
            raise ContractInvariantError(f"goal must be a single token: {self.goal!r}")
        for tag in self.preconditions | self.artifact_types:
            if not _TAG_RE.match(tag):
                raise ContractInvariantError(f"bad type tag: {tag!r}")
        for tag in self.tags | self.failure_modes:
            if not _is_token(tag):
                raise ContractInvariantError(f"bad token: {tag!r}")
        if self.body != normalize_body(self.body):
            raise ContractInvariantError(f"body of {self.id} is not normalized")
        if not self.body:
            raise ContractInvariantError(f"body of {self.id} is empty")
        for line in self.body.split("\n"):
            if _SECTION_RE.match(line) or line.strip() == "---":
                raise ContractInvariantError(
                    f"body of {self.id} contains a structural marker line: {line!r}"
                )
        for item in self.checklist:
            if not item.strip() or "\n" in item:
                raise ContractInvariantError(f"bad checklist item: {item!r}")
        for key, value in self.extras:
            if not _is_token(key) or "\n" in value:
                raise ContractInvariantError(f"bad extra entry: {key!r}")
        for dirname in ARTIFACT_DIR_NAMES:
            for name in self.artifact_dirs.get(dirname):
                if not name or "/" in name or any(ch.isspace() for ch in name):
                    raise ContractInvariantError(f"bad artifact file name: {name!r}")


def body_hash(contract: SkillContract) -> str:
    """Hex digest of the normalized body.  Metadata never contributes, so
    two skills differing only in id, goal, tags or validator hash equal."""
    return hashlib.sha256(normalize_body(contract.body).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class AdapterShim:
    """A generated bridge skill registered for one dep edge src -> dst."""

    src: str
    dst: str
    contract: SkillContract


@dataclass(frozen=True)
class Library:
    """An ordered collection of skills plus any registered adapter shims.

    Skill ids are unique; adapters live outside the skill list and never
    count toward library size.
    """

    skills: tuple[SkillContract, ...] = ()
    adapters: tuple[AdapterShim, ...] = ()

    def __post_init__(self) -> None:
        seen = set()
        for s in self.skills:
            if s.id in seen:
                raise DuplicateSkillId(s.id)
            seen.add(s.id)

    def by_id(self) -> dict[str, SkillContract]:
        return {s.id: s for s in self.skills}

    def get(self, skill_id: str) -> SkillContract:
        for s in self.skills:
            if s.id == skill_id:
                return s
        raise UnknownSkillId(skill_id)

    def ids(self) -> tuple[str, ...]:
        return tuple(s.id for s in self.skills)

    def __len__(self) -> int:
        return len(self.skills)


def _format_list(values) -> str:
    return "[" + ", ".join(sorted(values)) + "]"


def _parse_list(raw: str, key: str) -> tuple[str, ...]:
    raw = raw.strip()
    if not (raw.startswith("[") and raw.endswith("]")):
        raise MalformedFrontMatter(f"{key}: expected a [a, b] list, got {raw!r}")
    inner = raw[1:-1].strip()
    if not inner:
        return ()
    return tuple(part.strip() for part in inner.split(","))


def serialize_skill_file(contract: SkillContract) -> str:
    """Render a contract to canonical skill file text."""
    contract.validate()
    lines = ["---"]
    lines.append(f"id: {contract.id}")
    lines.append(f"goal: {contract.goal}")
    lines.append(f"preconditions: {_format_list(contract.preconditions)}")
    lines.append(f"artifact.type: {_format_list(contract.artifact_types)}")
    lines.append(f"validator.kind: {contract.validator_kind}")
    if contract.failure_modes:
        lines.append(f"failure_modes: {_format_list(contract.failure_modes)}")
    if contract.tags:
        lines.append(f"tags: {_format_list(contract.tags)}")
    for dirname in ARTIFACT_DIR_NAMES:
        names = contract.artifact_dirs.get(dirname)
        if names:
            lines.append(f"artifacts.{dirname}: {_format_list(names)}")
    for key, value in sorted(contract.extras):
        lines.append(f"{key}: {value}")
    lines.append("---")
    lines.append("## Operation")
    lines.append(contract.body)
    if contract.checklist:
        lines.append("## Checklist")
        for item in contract.checklist:
            lines.append(f"- [ ] {item}")
    return "\n".join(lines) + "\n"


def parse_skill_file(text: str) -> SkillContract:
    """Parse skill file text into a contract.

    Raises MalformedFrontMatter when the fences or required keys are broken,
    MissingOperationSection when the body section is absent, DuplicateSection
    on repeated headers, UnknownSection on headers outside the grammar.
    """
    lines = text.replace("\r\n", "\n").replace("\r", "\n").split("\n")
    if not lines or lines[0].strip() != "---":
        raise MalformedFrontMatter("file must open with a --- fence")
    try:
        close = next(i for i in range(1, len(lines)) if lines[i].strip() == "---")
    except StopIteration:
        raise MalformedFrontMatter("front matter fence is never closed") from None

    fields: dict[str, str] = {}
    for lineno, raw in enumerate(lines[1:close], start=2):
        if not raw.strip():
            continue
        if ":" not in raw:
            raise MalformedFrontMatter(f"line {lineno}: expected 'key: value'")
        key, _, value = raw.partition(":")
        key = key.strip()
        if not key:
            raise MalformedFrontMatter(f"line {lineno}: empty key")
        if key in fields:
            raise MalformedFrontMatter(f"duplicate front matter key: {key}")
        fields[key] = value.strip()

    for required in ("id", "goal", "preconditions", "artifact.type"):
        if required not in fields:
            raise MalformedFrontMatter(f"missing required key: {required}")

    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for raw in lines[close + 1 :]:
        header = _SECTION_RE.match(raw)
        if header:
            name = header.group(1)
            if name not in _KNOWN_SECTIONS:
                raise UnknownSection(name)
            if name in sections:
                raise DuplicateSection(name)
            current = sections.setdefault(name, [])
        elif current is not None:
            current.append(raw)
        elif raw.strip():
            raise MalformedFrontMatter(f"stray content before first section: {raw!r}")

    if "Operation" not in sections:
        raise MissingOperationSection("## Operation section is required")
    body = normalize_body("\n".join(sections["Operation"]))

    checklist = []
    for raw in sections.get("Checklist", ()):
        item = raw.strip()
        if not item:
            continue
        item = item.removeprefix("- ").strip()
        item = item.removeprefix("[ ]").removeprefix("[x]").strip()
        if item:
            checklist.append(item)

    failure_modes = set(_parse_list(fields["failure_modes"], "failure_modes")
                        if "failure_modes" in fields else ())
    for raw in sections.get("Failure Modes", ()):
        item = raw.strip().removeprefix("- ").strip()
        if item:
            failure_modes.add(item)

    def dir_names(key: str) -> tuple[str, ...]:
        if key not in fields:
            return ()
        return tuple(sorted(_parse_list(fields[key], key)))

    extras = tuple(sorted(
        (k, v) for k, v in fields.items() if k not in _KNOWN_KEYS
    ))

    contract = SkillContract(
        id=fields["id"],
        goal=fields["goal"],
        preconditions=frozenset(_parse_list(fields["preconditions"], "preconditions")),
        body=body,
        artifact_types=frozenset(_parse_list(fields["artifact.type"], "artifact.type")),
        checklist=tuple(checklist),
        failure_modes=frozenset(failure_modes),
        tags=frozenset(_parse_list(fields["tags"], "tags") if "tags" in fields else ()),
        artifact_dirs=ArtifactDirs(
            scripts=dir_names("artifacts.scripts"),
            references=dir_names("artifacts.references"),
            assets=dir_names("artifacts.assets"),
        ),
        extras=extras,
    )
    try:
        contract.validate()
    except ContractInvariantError as exc:
        raise MalformedFrontMatter(str(exc)) from exc
    return contract


def library_fingerprint(lib: Library) -> str:
    """Stable digest over every serialized skill and adapter, used to check
    byte-level equality of two library states."""
    h = hashlib.sha256()
    for skill in sorted(lib.skills, key=lambda s: s.id):
        h.update(skill.id.encode())
        h.update(b"\x00")
        h.update(serialize_skill_file(skill).encode())
        h.update(b"\x01")
    for shim in sorted(lib.adapters, key=lambda a: (a.src, a.dst)):
        h.update(f"{shim.src}\x00{shim.dst}\x00".encode())
        h.update(serialize_skill_file(shim.contract).encode())
        h.update(b"\x01")
    return h.hexdigest()


def make_contract(**kwargs) -> SkillContract:
    """Builder that normalizes the body and validates, for hand-built skills."""
    kwargs["body"] = normalize_body(kwargs.get("body", ""))
    contract = SkillContract(**kwargs)
    contract.validate()
    return contract


def with_normalized_body(contract: SkillContract) -> SkillContract:
    return replace(contract, body=normalize_body(contract.body))
