"""Validation, schema dispatch, and flattening of raw SBOM documents.

Each input is checked for well-formed JSON, dispatched on its declared
schema, and normalized into a :class:`~sbomgauge.model.NormalizedSbom`
with explicit ABSENT markers for fields the source never carried.
All functions are pure; one extraction per worker parallelizes freely.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Optional

from .model import (
    ABSENT,
    Checksum,
    Checksums,
    DOCUMENT_FIELDS_BY_STANDARD,
    FieldId,
    FieldValue,
    FileRecord,
    LicenseSet,
    NormalizedSbom,
    PackageRecord,
    Scalar,
    StandardKind,
    canonical_license_list,
)

#: Package-manager prefixes stripped from names, e.g. "pip:requests".
DEFAULT_NAME_PREFIXES: tuple[str, ...] = (
    "pip",
    "maven",
    "npm",
    "gem",
    "docker",
    "actions",
    "go",
    "nuget",
    "cargo",
    "composer",
)

_SPDX_NON_VALUES = frozenset({"NOASSERTION", "NONE"})


class ExtractionOutcome(Enum):
    OK = "ok"
    EMPTY_FILE = "empty_file"
    MALFORMED_JSON = "malformed_json"
    UNKNOWN_SCHEMA = "unknown_schema"
    INCOMPLETE_DOCUMENT = "incomplete_document"


@dataclass(frozen=True)
class ExtractionDiagnostics:
    input_path: str
    outcome: ExtractionOutcome
    dropped_nameless_packages: int = 0
    warnings: tuple[str, ...] = ()


class ExtractionError(Exception):
    """Raised with the diagnostic outcome when a document cannot be used."""

    def __init__(self, outcome: ExtractionOutcome, message: str):
        super().__init__(message)
        self.outcome = outcome


@dataclass(frozen=True)
class ExtractSettings:
    """Knobs the corpus configuration feeds into extraction.

    ``include_root_package=None`` keeps the per-standard default: SPDX
    keeps its "describes" root package, CycloneDX leaves the
    metadata.component out of the package list.
    """

    name_prefixes: tuple[str, ...] = DEFAULT_NAME_PREFIXES
    include_root_package: Optional[bool] = None


DEFAULT_EXTRACT_SETTINGS = ExtractSettings()


def validate(raw: bytes) -> Any:
    """Parse raw bytes as JSON, or raise the matching diagnostic error."""
    if not raw or not raw.strip():
        raise ExtractionError(ExtractionOutcome.EMPTY_FILE, "empty or whitespace-only file")
    try:
        return json.loads(raw.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ExtractionError(ExtractionOutcome.MALFORMED_JSON, str(exc)) from exc


def identify_schema(doc: Any) -> StandardKind:
    """Dispatch a parsed document on its declared schema discriminator."""
    if isinstance(doc, dict):
        if doc.get("bomFormat") == "CycloneDX":
            return StandardKind.CYCLONEDX_15
        if "spdxVersion" in doc:
            return StandardKind.SPDX_23
    raise ExtractionError(
        ExtractionOutcome.UNKNOWN_SCHEMA, "neither bomFormat nor spdxVersion present"
    )


def normalize_name(raw: str, prefixes: tuple[str, ...] = DEFAULT_NAME_PREFIXES) -> str:
    """Strip a single recognized package-manager prefix and trim whitespace.

    Everything else is preserved byte-for-byte; idempotent.
    """
    s = raw.strip()
    m = re.match(r"^([A-Za-z][\w.-]*):(.*)$", s)
    if m and m.group(1).lower() in {p.lower() for p in prefixes}:
        stripped = m.group(2).strip()
        if stripped:
            return stripped
    return s


def _scalar_or_absent(value: Any) -> FieldValue:
    if value is None:
        return ABSENT
    text = str(value)
    return Scalar(text)


def _spdx_value(value: Any) -> FieldValue:
    """SPDX scalar with NOASSERTION/NONE treated as not populated."""
    if value is None or str(value) in _SPDX_NON_VALUES:
        return ABSENT
    return Scalar(str(value))


def _join_or_absent(parts: list[str]) -> FieldValue:
    parts = [p for p in parts if p]
    return Scalar(", ".join(parts)) if parts else ABSENT


def _checksums_from(entries: Any, algo_key: str, digest_key: str) -> FieldValue:
    if not isinstance(entries, list):
        return ABSENT
    out = []
    for e in entries:
        if isinstance(e, dict) and e.get(algo_key) and e.get(digest_key):
            out.append(Checksum(str(e[algo_key]), str(e[digest_key])))
    return Checksums(tuple(out)) if out else ABSENT


def _complete_metadata(
    metadata: dict[FieldId, FieldValue], standard: StandardKind
) -> dict[FieldId, FieldValue]:
    return {
        f: metadata.get(f, ABSENT) for f in DOCUMENT_FIELDS_BY_STANDARD[standard]
    }


def extract_cyclonedx(
    doc: dict,
    *,
    tool_id: str = "",
    repo_id: str = "",
    language: str = "",
    tool_version: Optional[str] = None,
    input_path: str = "",
    settings: ExtractSettings = DEFAULT_EXTRACT_SETTINGS,
) -> tuple[NormalizedSbom, ExtractionDiagnostics]:
    """Flatten a CycloneDX 1.5 document; nested sub-components are walked
    depth-first. The metadata.component enters the package list only when
    ``settings.include_root_package`` is True."""
    warnings: list[str] = []
    declared = doc.get("specVersion")
    if declared != "1.5":
        warnings.append(f"declared CycloneDX version {declared!r}, parsing as 1.5")

    meta = doc.get("metadata") if isinstance(doc.get("metadata"), dict) else {}
    metadata: dict[FieldId, FieldValue] = {
        FieldId.BOM_FORMAT: _scalar_or_absent(doc.get("bomFormat")),
        FieldId.SPEC_VERSION: _scalar_or_absent(declared),
        FieldId.TIMESTAMP: _scalar_or_absent(meta.get("timestamp")),
        FieldId.CREATOR: _cdx_creator(meta),
    }

    components = doc.get("components", [])
    if components is None:
        components = []
    if not isinstance(components, list):
        raise ExtractionError(
            ExtractionOutcome.INCOMPLETE_DOCUMENT, "components is not a list"
        )

    related = _cdx_related_refs(doc.get("dependencies"))
    dropped = 0
    packages: list[PackageRecord] = []

    roots: list[Any] = []
    if settings.include_root_package is True and isinstance(meta.get("component"), dict):
        roots.append(meta["component"])

    stack = list(reversed(components))
    for root in reversed(roots):
        stack.append(root)
    # LIFO walk emits source order, descending into nested components first
    while stack:
        comp = stack.pop()
        if not isinstance(comp, dict):
            dropped += 1
            continue
        nested = comp.get("components")
        if isinstance(nested, list):
            stack.extend(reversed(nested))
        record = _cdx_package(comp, related, settings)
        if record is None:
            dropped += 1
        else:
            packages.append(record)

    sbom = NormalizedSbom(
        standard=StandardKind.CYCLONEDX_15,
        tool_id=tool_id,
        repo_id=repo_id,
        language=language,
        metadata=_complete_metadata(metadata, StandardKind.CYCLONEDX_15),
        packages=tuple(packages),
        files=None,
        tool_version=tool_version,
    )
    diag = ExtractionDiagnostics(
        input_path=input_path,
        outcome=ExtractionOutcome.OK,
        dropped_nameless_packages=dropped,
        warnings=tuple(warnings),
    )
    return sbom, diag


def _cdx_creator(meta: dict) -> FieldValue:
    tools = meta.get("tools")
    names: list[str] = []
    entries: list[Any] = []
    if isinstance(tools, list):
        entries = tools
    elif isinstance(tools, dict):
        for key in ("components", "services"):
            if isinstance(tools.get(key), list):
                entries.extend(tools[key])
    for entry in entries:
        if not isinstance(entry, dict):
            continue
        label = " ".join(
            str(entry[k]) for k in ("vendor", "name", "version") if entry.get(k)
        )
        if label:
            names.append(label)
    if not names and isinstance(meta.get("authors"), list):
        names = [
            str(a.get("name"))
            for a in meta["authors"]
            if isinstance(a, dict) and a.get("name")
        ]
    return _join_or_absent(names)


def _cdx_related_refs(dependencies: Any) -> frozenset[str]:
    refs: set[str] = set()
    if isinstance(dependencies, list):
        for dep in dependencies:
            if not isinstance(dep, dict):
                continue
            if dep.get("ref"):
                refs.add(str(dep["ref"]))
            depends = dep.get("dependsOn")
            if isinstance(depends, list):
                refs.update(str(d) for d in depends)
    return frozenset(refs)


def _cdx_package(
    comp: dict, related: frozenset[str], settings: ExtractSettings
) -> Optional[PackageRecord]:
    raw_name = str(comp.get("name") or "").strip()
    if not raw_name:
        return None

    license_value: FieldValue = ABSENT
    licenses = comp.get("licenses")
    if isinstance(licenses, list):
        ids: list[str] = []
        for entry in licenses:
            if not isinstance(entry, dict):
                continue
            lic = entry.get("license")
            if isinstance(lic, dict):
                text = lic.get("id") or lic.get("name")
                if text:
                    ids.extend(canonical_license_list(str(text)).ids)
            if entry.get("expression"):
                ids.extend(canonical_license_list(str(entry["expression"])).ids)
        license_value = LicenseSet(tuple(ids))

    supplier = comp.get("supplier")
    supplier_value: FieldValue = ABSENT
    if isinstance(supplier, dict) and supplier.get("name") is not None:
        supplier_value = Scalar(str(supplier["name"]))
    elif comp.get("publisher") is not None:
        supplier_value = Scalar(str(comp["publisher"]))

    bom_ref = str(comp.get("bom-ref") or "")
    return PackageRecord(
        name=normalize_name(raw_name, settings.name_prefixes),
        raw_name=raw_name,
        version=_scalar_or_absent(comp.get("version")),
        purl=_scalar_or_absent(comp.get("purl")),
        license=license_value,
        supplier=supplier_value,
        copyright=_scalar_or_absent(comp.get("copyright")),
        has_relationship=bool(bom_ref) and bom_ref in related,
        checksums=_checksums_from(comp.get("hashes"), "alg", "content"),
    )


def extract_spdx(
    doc: dict,
    *,
    tool_id: str = "",
    repo_id: str = "",
    language: str = "",
    tool_version: Optional[str] = None,
    input_path: str = "",
    settings: ExtractSettings = DEFAULT_EXTRACT_SETTINGS,
) -> tuple[NormalizedSbom, ExtractionDiagnostics]:
    """Flatten an SPDX 2.3 document, including its files section.

    License precedence is licenseConcluded over licenseDeclared;
    NOASSERTION/NONE never count as populated values.
    """
    warnings: list[str] = []
    declared = doc.get("spdxVersion")
    if declared != "SPDX-2.3":
        warnings.append(f"declared SPDX version {declared!r}, parsing as SPDX-2.3")

    creation = doc.get("creationInfo") if isinstance(doc.get("creationInfo"), dict) else {}
    creators = creation.get("creators")
    metadata: dict[FieldId, FieldValue] = {
        FieldId.SPEC_VERSION: _scalar_or_absent(declared),
        FieldId.SBOM_LICENSE: _scalar_or_absent(doc.get("dataLicense")),
        FieldId.NAMESPACE: _scalar_or_absent(doc.get("documentNamespace")),
        FieldId.CREATOR: _join_or_absent(
            [str(c) for c in creators] if isinstance(creators, list) else []
        ),
        FieldId.TIMESTAMP: _scalar_or_absent(creation.get("created")),
    }

    raw_packages = doc.get("packages", [])
    if raw_packages is None:
        raw_packages = []
    if not isinstance(raw_packages, list):
        raise ExtractionError(
            ExtractionOutcome.INCOMPLETE_DOCUMENT, "packages is not a list"
        )

    described = _spdx_described_ids(doc)
    related = _spdx_related_ids(doc)
    dropped = 0
    packages: list[PackageRecord] = []
    for pkg in raw_packages:
        if not isinstance(pkg, dict):
            dropped += 1
            continue
        spdx_id = str(pkg.get("SPDXID") or "")
        if settings.include_root_package is False and spdx_id in described:
            continue
        record = _spdx_package(pkg, spdx_id, related, settings)
        if record is None:
            dropped += 1
        else:
            packages.append(record)

    files: list[FileRecord] = []
    raw_files = doc.get("files")
    if isinstance(raw_files, list):
        for f in raw_files:
            if not isinstance(f, dict) or not f.get("fileName"):
                continue
            sums = _checksums_from(f.get("checksums"), "algorithm", "checksumValue")
            files.append(
                FileRecord(
                    filename=str(f["fileName"]),
                    checksums=sums.entries if isinstance(sums, Checksums) else (),
                )
            )
    elif raw_files is not None:
        warnings.append("files section is not a list; ignored")

    sbom = NormalizedSbom(
        standard=StandardKind.SPDX_23,
        tool_id=tool_id,
        repo_id=repo_id,
        language=language,
        metadata=_complete_metadata(metadata, StandardKind.SPDX_23),
        packages=tuple(packages),
        files=tuple(files),
        tool_version=tool_version,
    )
    diag = ExtractionDiagnostics(
        input_path=input_path,
        outcome=ExtractionOutcome.OK,
        dropped_nameless_packages=dropped,
        warnings=tuple(warnings),
    )
    return sbom, diag


def _spdx_described_ids(doc: dict) -> frozenset[str]:
    ids: set[str] = set()
    describes = doc.get("documentDescribes")
    if isinstance(describes, list):
        ids.update(str(d) for d in describes)
    relationships = doc.get("relationships")
    if isinstance(relationships, list):
        for rel in relationships:
            if (
                isinstance(rel, dict)
                and rel.get("relationshipType") == "DESCRIBES"
                and str(rel.get("spdxElementId") or "") == "SPDXRef-DOCUMENT"
                and rel.get("relatedSpdxElement")
            ):
                ids.add(str(rel["relatedSpdxElement"]))
    return frozenset(ids)


def _spdx_related_ids(doc: dict) -> frozenset[str]:
    ids: set[str] = set()
    relationships = doc.get("relationships")
    if isinstance(relationships, list):
        for rel in relationships:
            if not isinstance(rel, dict):
                continue
            for key in ("spdxElementId", "relatedSpdxElement"):
                if rel.get(key):
                    ids.add(str(rel[key]))
    describes = doc.get("documentDescribes")
    if isinstance(describes, list):
        ids.update(str(d) for d in describes)
    return frozenset(ids)


def _spdx_package(
    pkg: dict, spdx_id: str, related: frozenset[str], settings: ExtractSettings
) -> Optional[PackageRecord]:
    raw_name = str(pkg.get("name") or "").strip()
    if not raw_name:
        return None

    license_value: FieldValue = ABSENT
    for key in ("licenseConcluded", "licenseDeclared"):
        candidate = _spdx_value(pkg.get(key))
        if isinstance(candidate, Scalar):
            license_value = canonical_license_list(candidate.text)
            break

    purl_value: FieldValue = ABSENT
    ext_refs = pkg.get("externalRefs")
    if isinstance(ext_refs, list):
        for ref in ext_refs:
            if (
                isinstance(ref, dict)
                and ref.get("referenceType") == "purl"
                and ref.get("referenceLocator")
            ):
                purl_value = Scalar(str(ref["referenceLocator"]))
                break

    return PackageRecord(
        name=normalize_name(raw_name, settings.name_prefixes),
        raw_name=raw_name,
        version=_scalar_or_absent(pkg.get("versionInfo")),
        purl=purl_value,
        license=license_value,
        supplier=_spdx_value(pkg.get("supplier")),
        copyright=_spdx_value(pkg.get("copyrightText")),
        has_relationship=bool(spdx_id) and spdx_id in related,
        checksums=_checksums_from(pkg.get("checksums"), "algorithm", "checksumValue"),
    )


def extract_document(
    doc: Any,
    *,
    tool_id: str = "",
    repo_id: str = "",
    language: str = "",
    tool_version: Optional[str] = None,
    input_path: str = "",
    settings: ExtractSettings = DEFAULT_EXTRACT_SETTINGS,
) -> tuple[NormalizedSbom, ExtractionDiagnostics]:
    """Schema dispatch plus the matching standard-specific extractor."""
    kind = identify_schema(doc)
    extractor = (
        extract_cyclonedx if kind is StandardKind.CYCLONEDX_15 else extract_spdx
    )
    return extractor(
        doc,
        tool_id=tool_id,
        repo_id=repo_id,
        language=language,
        tool_version=tool_version,
        input_path=input_path,
        settings=settings,
    )


def extract_bytes(
    raw: bytes,
    *,
    tool_id: str = "",
    repo_id: str = "",
    language: str = "",
    tool_version: Optional[str] = None,
    input_path: str = "",
    settings: ExtractSettings = DEFAULT_EXTRACT_SETTINGS,
) -> tuple[Optional[NormalizedSbom], ExtractionDiagnostics]:
    """Full pipeline over raw bytes; failures come back as diagnostics
    instead of exceptions."""
    try:
        doc = validate(raw)
        return extract_document(
            doc,
            tool_id=tool_id,
            repo_id=repo_id,
            language=language,
            tool_version=tool_version,
            input_path=input_path,
            settings=settings,
        )
    except ExtractionError as exc:
        return None, ExtractionDiagnostics(
            input_path=input_path, outcome=exc.outcome, warnings=(str(exc),)
        )


def extract_file(
    path: str | Path,
    *,
    tool_id: str = "",
    repo_id: str = "",
    language: str = "",
    tool_version: Optional[str] = None,
    settings: ExtractSettings = DEFAULT_EXTRACT_SETTINGS,
) -> tuple[Optional[NormalizedSbom], ExtractionDiagnostics]:
    return extract_bytes(
        Path(path).read_bytes(),
        tool_id=tool_id,
        repo_id=repo_id,
        language=language,
        tool_version=tool_version,
        input_path=str(path),
        settings=settings,
    )
