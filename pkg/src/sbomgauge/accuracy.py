"""Scoring against a verified ground-truth package list.

Package detection is precision/recall over a name+version pairing with an
exact-name requirement; field accuracy reuses the consistency metrics on
true positives. A ground-truth entry without a version is a statement
that the repository pins none, so only a silent tool is correct there;
missing supplier/license in the ground truth merely means unverifiable
and drops the pair from that field's denominator.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

from .model import (
    ABSENT,
    FieldId,
    GroundTruthDataset,
    GroundTruthEntry,
    LicenseSet,
    MatchConfig,
    NormalizedSbom,
    PackageRecord,
    Scalar,
    StandardKind,
    is_absent,
)
from .extract import DEFAULT_NAME_PREFIXES, normalize_name
from .pairing import pair_packages
from .similarity import (
    DEFAULT_METRIC_SETTINGS,
    MetricSettings,
    field_similarity,
    version_similarity,
)

ACCURACY_FIELDS: tuple[FieldId, ...] = (
    FieldId.SUPPLIER,
    FieldId.LICENSE,
    FieldId.VERSION,
)


@dataclass(frozen=True)
class GtMatch:
    """Pairing of one SBOM against its ground truth."""

    repo_id: str
    tp: tuple[tuple[PackageRecord, GroundTruthEntry], ...]
    fp: tuple[PackageRecord, ...]
    fn: tuple[GroundTruthEntry, ...]


@dataclass(frozen=True)
class RepoAccuracy:
    repo_id: str
    tp: int
    fp: int
    fn: int
    precision: Optional[float]
    recall: Optional[float]
    per_field: Mapping[FieldId, Optional[float]]


@dataclass(frozen=True)
class AccuracyReport:
    tool_id: str
    standard: StandardKind
    evaluated_sboms: int
    precision: Optional[float]
    recall: Optional[float]
    #: macro-averaged over repos; same shape micro-pooled over pairs
    per_field: Mapping[FieldId, Optional[float]]
    per_field_micro: Mapping[FieldId, Optional[float]]
    per_repo_series: tuple[RepoAccuracy, ...]


class GroundTruthError(ValueError):
    """The ground-truth document violates the expected schema."""


def validate_ground_truth(
    doc: object, prefixes: tuple[str, ...] = DEFAULT_NAME_PREFIXES
) -> GroundTruthDataset:
    """Check a parsed ground-truth document and build the dataset.

    Expected shape: {"repo_id": str, "entries": [{"name": str,
    "version": str|null, "supplier": str|null, "license": [str]|null}]}
    """
    if not isinstance(doc, dict):
        raise GroundTruthError("ground truth must be a JSON object")
    repo_id = doc.get("repo_id")
    if not isinstance(repo_id, str) or not repo_id:
        raise GroundTruthError("repo_id must be a non-empty string")
    raw_entries = doc.get("entries")
    if not isinstance(raw_entries, list):
        raise GroundTruthError("entries must be a list")

    entries = []
    for idx, raw in enumerate(raw_entries):
        if not isinstance(raw, dict):
            raise GroundTruthError(f"entries[{idx}] must be an object")
        name = raw.get("name")
        if not isinstance(name, str) or not name.strip():
            raise GroundTruthError(f"entries[{idx}].name must be a non-empty string")
        version = raw.get("version")
        if version is not None and not isinstance(version, str):
            raise GroundTruthError(f"entries[{idx}].version must be a string or null")
        supplier = raw.get("supplier")
        if supplier is not None and not isinstance(supplier, str):
            raise GroundTruthError(f"entries[{idx}].supplier must be a string or null")
        license_ids = raw.get("license")
        if license_ids is not None and (
            not isinstance(license_ids, list)
            or any(not isinstance(x, str) for x in license_ids)
        ):
            raise GroundTruthError(f"entries[{idx}].license must be a string list or null")
        entries.append(
            GroundTruthEntry(
                name=normalize_name(name, prefixes),
                version=version,
                supplier=supplier,
                license=tuple(license_ids) if license_ids is not None else None,
            )
        )
    try:
        return GroundTruthDataset(repo_id=repo_id, entries=tuple(entries))
    except ValueError as exc:
        raise GroundTruthError(str(exc)) from exc


def load_ground_truth(
    path: str | Path, prefixes: tuple[str, ...] = DEFAULT_NAME_PREFIXES
) -> GroundTruthDataset:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise GroundTruthError(f"{path}: {exc}") from exc
    return validate_ground_truth(doc, prefixes)


def _entry_record(entry: GroundTruthEntry) -> PackageRecord:
    return PackageRecord(
        name=entry.name,
        raw_name=entry.name,
        version=Scalar(entry.version) if entry.version is not None else ABSENT,
        supplier=Scalar(entry.supplier) if entry.supplier is not None else ABSENT,
        license=LicenseSet(entry.license) if entry.license is not None else ABSENT,
    )


def match_against_gt(
    s: NormalizedSbom,
    gt: GroundTruthDataset,
    cfg: Optional[MatchConfig] = None,
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> GtMatch:
    """Pair SBOM packages with ground-truth entries in accuracy mode."""
    if s.repo_id and gt.repo_id != s.repo_id:
        raise ValueError(f"repo mismatch: SBOM {s.repo_id!r} vs GT {gt.repo_id!r}")
    if cfg is None:
        cfg = MatchConfig(accuracy_mode=True)
    elif not cfg.accuracy_mode:
        cfg = MatchConfig(
            alpha=cfg.alpha,
            beta=cfg.beta,
            gamma=cfg.gamma,
            tau=cfg.tau,
            accuracy_mode=True,
        )
    gt_records = [_entry_record(e) for e in gt.entries]
    pairing = pair_packages(list(s.packages), gt_records, cfg, settings)
    return GtMatch(
        repo_id=gt.repo_id,
        tp=tuple((s.packages[i], gt.entries[j]) for i, j, _ in pairing.pairs),
        fp=tuple(s.packages[i] for i in pairing.unmatched_x),
        fn=tuple(gt.entries[j] for j in pairing.unmatched_y),
    )


def precision_recall(
    tp: int, fp: int, fn: int
) -> tuple[Optional[float], Optional[float]]:
    """Detection precision and recall; a zero denominator yields None
    (undefined), which is distinct from 0."""
    precision = tp / (tp + fp) if tp + fp > 0 else None
    recall = tp / (tp + fn) if tp + fn > 0 else None
    return precision, recall


def version_accuracy(
    pairs: Sequence[tuple[PackageRecord, GroundTruthEntry]],
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> Optional[float]:
    """Mean version correctness over true-positive pairs.

    With a ground-truth version, the version metric applies (absence
    scoring 0); without one, only an absent or empty reported version is
    correct, since anything else cannot be verified.
    """
    if not pairs:
        return None
    scores = []
    for record, entry in pairs:
        if entry.version is None:
            silent = is_absent(record.version) or (
                isinstance(record.version, Scalar) and not record.version.text.strip()
            )
            scores.append(1.0 if silent else 0.0)
        else:
            scores.append(
                version_similarity(record.version, Scalar(entry.version), settings)
            )
    return sum(scores) / len(scores)


def field_accuracy(
    pairs: Sequence[tuple[PackageRecord, GroundTruthEntry]],
    f: FieldId,
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> Optional[float]:
    """Mean metric score against ground truth over pairs where the ground
    truth provides the field; None when no pair does."""
    if f is FieldId.VERSION:
        return version_accuracy(pairs, settings)
    if f not in (FieldId.SUPPLIER, FieldId.LICENSE):
        raise ValueError(f"no ground-truth accuracy defined for {f.value}")
    scores = []
    for record, entry in pairs:
        gt_value = entry.supplier if f is FieldId.SUPPLIER else entry.license
        if gt_value is None:
            continue
        expected = (
            Scalar(gt_value) if f is FieldId.SUPPLIER else LicenseSet(tuple(gt_value))
        )
        scores.append(field_similarity(f, record.field_value(f), expected, settings))
    if not scores:
        return None
    return sum(scores) / len(scores)


def accuracy_report(
    matches: Sequence[GtMatch],
    *,
    tool_id: str,
    standard: StandardKind,
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> AccuracyReport:
    """Pool detection counts across repositories and average field scores.

    Precision/recall pool TP/FP/FN counts globally; field accuracies are
    macro-averaged over repos, with the pair-pooled value alongside.
    """
    if not matches:
        raise ValueError("accuracy_report requires at least one evaluated SBOM")
    ordered = sorted(matches, key=lambda m: m.repo_id)

    series = []
    total_tp = total_fp = total_fn = 0
    for m in ordered:
        tp, fp, fn = len(m.tp), len(m.fp), len(m.fn)
        total_tp += tp
        total_fp += fp
        total_fn += fn
        p, r = precision_recall(tp, fp, fn)
        series.append(
            RepoAccuracy(
                repo_id=m.repo_id,
                tp=tp,
                fp=fp,
                fn=fn,
                precision=p,
                recall=r,
                per_field={f: field_accuracy(m.tp, f, settings) for f in ACCURACY_FIELDS},
            )
        )

    per_field: dict[FieldId, Optional[float]] = {}
    per_field_micro: dict[FieldId, Optional[float]] = {}
    for f in ACCURACY_FIELDS:
        repo_values = [
            r.per_field[f] for r in series if r.per_field[f] is not None
        ]
        per_field[f] = (
            sum(repo_values) / len(repo_values) if repo_values else None
        )
        all_pairs = [pair for m in ordered for pair in m.tp]
        per_field_micro[f] = field_accuracy(all_pairs, f, settings)

    precision, recall = precision_recall(total_tp, total_fp, total_fn)
    return AccuracyReport(
        tool_id=tool_id,
        standard=standard,
        evaluated_sboms=len(ordered),
        precision=precision,
        recall=recall,
        per_field=per_field,
        per_field_micro=per_field_micro,
        per_repo_series=tuple(series),
    )
