"""Structural compliance scoring over configurable field groups.

A package field is compliant when it carries a real value (not absent,
not empty); the score for a field is the mean over documents of its
per-document presence rate. Document-scope fields get binary per-document
treatment, since a per-package denominator is meaningless for them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .model import (
    Checksums,
    FieldGroup,
    FieldId,
    FieldScope,
    FieldValue,
    LicenseSet,
    NormalizedSbom,
    PackageRecord,
    Scalar,
    StandardKind,
    is_absent,
)


@dataclass(frozen=True)
class ComplianceReport:
    tool_id: str
    language: str
    standard: StandardKind
    group: str
    per_field: Mapping[FieldId, float]
    #: pooled-package variant of the same rates, emitted for diagnostics
    per_field_micro: Mapping[FieldId, float]
    sbom_count: int
    zero_package_sboms: int


def _value_present(value: FieldValue) -> bool:
    if is_absent(value):
        return False
    if isinstance(value, Scalar):
        return bool(value.text.strip())
    if isinstance(value, LicenseSet):
        return len(value) > 0
    if isinstance(value, Checksums):
        return len(value) > 0
    return False


def field_presence(p: PackageRecord, f: FieldId) -> int:
    """1 iff the package populates the field with an actual value."""
    if f.scope is not FieldScope.PACKAGE:
        raise ValueError(f"{f.value} is not a package-scope field")
    if f is FieldId.RELATIONSHIP:
        return 1 if p.has_relationship else 0
    return 1 if _value_present(p.field_value(f)) else 0


def document_field_presence(s: NormalizedSbom, f: FieldId) -> int:
    """1 iff the document metadata populates the field."""
    if f.scope is not FieldScope.DOCUMENT:
        raise ValueError(f"{f.value} is not a document-scope field")
    value = s.metadata.get(f)
    return 1 if value is not None and _value_present(value) else 0


def compliance_score(
    sboms: Sequence[NormalizedSbom], group: FieldGroup
) -> ComplianceReport:
    """Average field-presence rates for one tool's document stream.

    Documents with zero packages are excluded from package-scope averages
    (and counted); the result is order-invariant on both the document list
    and the packages within each document.
    """
    if not sboms:
        raise ValueError("compliance_score requires at least one SBOM")
    standards = {s.standard for s in sboms}
    tools = {s.tool_id for s in sboms}
    if len(standards) > 1 or len(tools) > 1:
        raise ValueError("all SBOMs must share tool_id and standard")
    standard = next(iter(standards))
    if group.applicable_standard is not None and group.applicable_standard != standard:
        raise ValueError(
            f"group {group.name!r} does not apply to {standard.value} documents"
        )

    languages = {s.language for s in sboms}
    with_packages = [s for s in sboms if s.packages]

    per_field: dict[FieldId, float] = {}
    per_field_micro: dict[FieldId, float] = {}
    for member in group.members:
        f = member.field
        if member.scope is FieldScope.DOCUMENT:
            hits = [document_field_presence(s, f) for s in sboms]
            per_field[f] = sum(hits) / len(sboms)
            per_field_micro[f] = per_field[f]
        else:
            rates = []
            present = 0
            total = 0
            for s in with_packages:
                count = sum(field_presence(p, f) for p in s.packages)
                rates.append(count / len(s.packages))
                present += count
                total += len(s.packages)
            per_field[f] = sum(rates) / len(rates) if rates else 0.0
            per_field_micro[f] = present / total if total else 0.0

    return ComplianceReport(
        tool_id=next(iter(tools)),
        language=next(iter(languages)) if len(languages) == 1 else "mixed",
        standard=standard,
        group=group.name,
        per_field=per_field,
        per_field_micro=per_field_micro,
        sbom_count=len(sboms),
        zero_package_sboms=len(sboms) - len(with_packages),
    )
