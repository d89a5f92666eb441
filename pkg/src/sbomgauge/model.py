"""Shared domain types: standards, field taxonomy, field values, and records.

Everything here is immutable after construction and safe to share across
concurrent evaluation workers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional, Union


class StandardKind(Enum):
    """The two supported SBOM document standards."""

    SPDX_23 = "spdx"
    CYCLONEDX_15 = "cyclonedx"


class FieldScope(Enum):
    DOCUMENT = "document"
    PACKAGE = "package"


class FieldId(Enum):
    """Every evaluable field, document scope and package scope."""

    # document scope
    SPEC_VERSION = "spec_version"
    SBOM_LICENSE = "sbom_license"
    NAMESPACE = "namespace"
    CREATOR = "creator"
    BOM_FORMAT = "bom_format"
    TIMESTAMP = "timestamp"
    # package scope
    NAME = "name"
    VERSION = "version"
    PURL = "purl"
    LICENSE = "license"
    SUPPLIER = "supplier"
    COPYRIGHT = "copyright"
    RELATIONSHIP = "relationship"
    CHECKSUMS = "checksums"
    FILENAME = "filename"

    @property
    def scope(self) -> FieldScope:
        if self in _DOCUMENT_FIELDS:
            return FieldScope.DOCUMENT
        return FieldScope.PACKAGE


_DOCUMENT_FIELDS = frozenset(
    {
        FieldId.SPEC_VERSION,
        FieldId.SBOM_LICENSE,
        FieldId.NAMESPACE,
        FieldId.CREATOR,
        FieldId.BOM_FORMAT,
        FieldId.TIMESTAMP,
    }
)

PACKAGE_FIELDS: tuple[FieldId, ...] = tuple(
    f for f in FieldId if f.scope is FieldScope.PACKAGE
)

#: Document-scope fields a normalized document carries per standard.
DOCUMENT_FIELDS_BY_STANDARD: dict[StandardKind, tuple[FieldId, ...]] = {
    StandardKind.SPDX_23: (
        FieldId.SPEC_VERSION,
        FieldId.SBOM_LICENSE,
        FieldId.NAMESPACE,
        FieldId.CREATOR,
        FieldId.TIMESTAMP,
    ),
    StandardKind.CYCLONEDX_15: (
        FieldId.BOM_FORMAT,
        FieldId.SPEC_VERSION,
        FieldId.CREATOR,
        FieldId.TIMESTAMP,
    ),
}


@dataclass(frozen=True)
class _Absent:
    """Sentinel for a field that did not exist in the source document.

    Distinct from ``Scalar("")``: an empty scalar means the field existed
    and was empty.
    """

    def __repr__(self) -> str:
        return "ABSENT"

    def __bool__(self) -> bool:
        return False


ABSENT = _Absent()


@dataclass(frozen=True)
class Scalar:
    text: str


@dataclass(frozen=True)
class LicenseSet:
    """Deduplicated, lexicographically sorted atomic license identifiers."""

    ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "ids", tuple(sorted(set(self.ids))))

    def __iter__(self):
        return iter(self.ids)

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, item: object) -> bool:
        return item in self.ids


@dataclass(frozen=True)
class Checksum:
    algorithm: str
    digest: str


@dataclass(frozen=True)
class Checksums:
    entries: tuple[Checksum, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple(self.entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


FieldValue = Union[_Absent, Scalar, LicenseSet, Checksums]


def is_absent(value: FieldValue) -> bool:
    return isinstance(value, _Absent)


@dataclass(frozen=True)
class PackageRecord:
    """One software component with canonicalized field values.

    ``name`` is never empty: nameless entries are dropped at extraction and
    counted in the extraction diagnostics. ``name`` is the canonical form
    (package-manager prefix stripped); ``raw_name`` preserves the source.
    """

    name: str
    raw_name: str
    version: FieldValue = ABSENT
    purl: FieldValue = ABSENT
    license: FieldValue = ABSENT
    supplier: FieldValue = ABSENT
    copyright: FieldValue = ABSENT
    has_relationship: bool = False
    checksums: FieldValue = ABSENT
    extra: Mapping[FieldId, FieldValue] = field(default_factory=dict)

    def field_value(self, f: FieldId) -> FieldValue:
        """Effective value for any package-scope field, possibly ABSENT."""
        if f.scope is not FieldScope.PACKAGE:
            raise ValueError(f"{f.value} is not a package-scope field")
        if f is FieldId.NAME:
            return Scalar(self.name)
        if f is FieldId.VERSION:
            return self.version
        if f is FieldId.PURL:
            return self.purl
        if f is FieldId.LICENSE:
            return self.license
        if f is FieldId.SUPPLIER:
            return self.supplier
        if f is FieldId.COPYRIGHT:
            return self.copyright
        if f is FieldId.RELATIONSHIP:
            return Scalar("true") if self.has_relationship else ABSENT
        if f is FieldId.CHECKSUMS:
            return self.checksums
        return self.extra.get(f, ABSENT)


@dataclass(frozen=True)
class FileRecord:
    """A file entry from an SPDX ``files`` section."""

    filename: str
    checksums: tuple[Checksum, ...] = ()


@dataclass(frozen=True)
class NormalizedSbom:
    """The uniform document every standard is flattened into.

    ``metadata`` has an entry (possibly ABSENT) for every document-scope
    field applicable to ``standard``; ``packages`` preserves source order.
    """

    standard: StandardKind
    tool_id: str
    repo_id: str
    language: str
    metadata: Mapping[FieldId, FieldValue]
    packages: tuple[PackageRecord, ...]
    files: Optional[tuple[FileRecord, ...]] = None
    tool_version: Optional[str] = None


@dataclass(frozen=True)
class GroupMember:
    field: FieldId
    scope: FieldScope


@dataclass(frozen=True)
class FieldGroup:
    """A named set of fields evaluated together for structural compliance.

    ``applicable_standard`` of None means the group applies to both
    standards.
    """

    name: str
    members: tuple[GroupMember, ...]
    applicable_standard: Optional[StandardKind] = None

    def document_fields(self) -> tuple[FieldId, ...]:
        return tuple(m.field for m in self.members if m.scope is FieldScope.DOCUMENT)

    def package_fields(self) -> tuple[FieldId, ...]:
        return tuple(m.field for m in self.members if m.scope is FieldScope.PACKAGE)


def _doc(f: FieldId) -> GroupMember:
    return GroupMember(f, FieldScope.DOCUMENT)


def _pkg(f: FieldId) -> GroupMember:
    return GroupMember(f, FieldScope.PACKAGE)


MANDATORY_SPDX = FieldGroup(
    name="mandatory-spdx",
    members=(
        _doc(FieldId.SPEC_VERSION),
        _doc(FieldId.SBOM_LICENSE),
        _doc(FieldId.NAMESPACE),
        _doc(FieldId.CREATOR),
    ),
    applicable_standard=StandardKind.SPDX_23,
)

MANDATORY_CYCLONEDX = FieldGroup(
    name="mandatory-cyclonedx",
    members=(
        _doc(FieldId.BOM_FORMAT),
        _doc(FieldId.SPEC_VERSION),
    ),
    applicable_standard=StandardKind.CYCLONEDX_15,
)

NTIA_PLUS = FieldGroup(
    name="ntia-plus",
    members=(
        _doc(FieldId.CREATOR),
        _doc(FieldId.TIMESTAMP),
        _pkg(FieldId.NAME),
        _pkg(FieldId.VERSION),
        _pkg(FieldId.SUPPLIER),
        _pkg(FieldId.LICENSE),
        _pkg(FieldId.COPYRIGHT),
        _pkg(FieldId.PURL),
        _pkg(FieldId.RELATIONSHIP),
    ),
)

BUILTIN_GROUPS: dict[str, FieldGroup] = {
    g.name: g for g in (MANDATORY_SPDX, MANDATORY_CYCLONEDX, NTIA_PLUS)
}


@dataclass(frozen=True)
class MatchConfig:
    """Weights and threshold for the package correspondence score.

    ``accuracy_mode`` reduces matching to name+version with tau forced to
    1.0, for scoring against ground truth. Name agreement is always
    required regardless of weights.
    """

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    tau: float = 2.0
    accuracy_mode: bool = False

    def __post_init__(self) -> None:
        if min(self.alpha, self.beta, self.gamma) < 0:
            raise ValueError("weights must be non-negative")
        if not 0 <= self.tau <= self.alpha + self.beta + self.gamma:
            raise ValueError("tau must satisfy 0 <= tau <= alpha + beta + gamma")

    @property
    def effective_gamma(self) -> float:
        return 0.0 if self.accuracy_mode else self.gamma

    @property
    def effective_tau(self) -> float:
        return 1.0 if self.accuracy_mode else self.tau


@dataclass(frozen=True)
class GroundTruthEntry:
    """One verified package. ``version=None`` is semantic absence: the
    repository genuinely pins no version, and a correct tool reports none.
    For ``supplier``/``license``, None merely means unverifiable."""

    name: str
    version: Optional[str] = None
    supplier: Optional[str] = None
    license: Optional[tuple[str, ...]] = None


@dataclass(frozen=True)
class GroundTruthDataset:
    repo_id: str
    entries: tuple[GroundTruthEntry, ...]

    def __post_init__(self) -> None:
        names = [e.name for e in self.entries]
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate ground-truth names: {', '.join(dupes)}")


_LICENSE_OPERATOR_SPLIT = re.compile(r"\s+(?:AND|OR|WITH)\s+", re.IGNORECASE)


def canonical_license_list(expr: str) -> LicenseSet:
    """Break a license expression into its sorted set of atomic identifiers.

    Splits on the whitespace-delimited operators AND/OR/WITH
    (case-insensitive) and strips parentheses; identifiers keep their
    original casing. Text that yields no identifiers comes back verbatim as
    a single-element set, so the operation never fails.
    """
    trimmed = expr.strip()
    if not trimmed:
        return LicenseSet(())
    parts = []
    for fragment in _LICENSE_OPERATOR_SPLIT.split(trimmed):
        ident = fragment.strip().strip("()").strip()
        if ident:
            parts.append(ident)
    if not parts:
        return LicenseSet((trimmed,))
    return LicenseSet(tuple(parts))
