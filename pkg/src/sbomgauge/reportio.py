"""Deterministic report emission.

JSON reports sort keys and fix floats at six decimal places so that
re-running an identical corpus and config yields byte-identical bundles;
CSV renderers print percentages with two decimals to mirror tabular
output conventions.
"""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Any, Optional

from .accuracy import AccuracyReport
from .compliance import ComplianceReport
from .consistency import ChecksumFinding, ConsistencyReport
from .model import (
    Checksums,
    FieldId,
    FieldValue,
    LicenseSet,
    NormalizedSbom,
    Scalar,
    is_absent,
)

#: Serialized stand-in for a field the source document never carried.
ABSENT_TOKEN = "NE"


def canonical_json(obj: Any, indent: int = 2) -> str:
    """Render with sorted keys and floats as fixed 6-decimal literals."""
    out = io.StringIO()
    _write(obj, out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _write(obj: Any, out: io.StringIO, indent: int, level: int) -> None:
    pad = " " * (indent * (level + 1))
    closing = " " * (indent * level)
    if obj is None:
        out.write("null")
    elif isinstance(obj, bool):
        out.write("true" if obj else "false")
    elif isinstance(obj, int):
        out.write(str(obj))
    elif isinstance(obj, float):
        out.write(format(obj, ".6f"))
    elif isinstance(obj, str):
        out.write(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.write("[]")
            return
        out.write("[\n")
        for i, item in enumerate(obj):
            out.write(pad)
            _write(item, out, indent, level + 1)
            out.write(",\n" if i + 1 < len(obj) else "\n")
        out.write(closing + "]")
    elif isinstance(obj, dict):
        if not obj:
            out.write("{}")
            return
        keys = sorted(obj)
        out.write("{\n")
        for i, key in enumerate(keys):
            if not isinstance(key, str):
                raise TypeError(f"non-string report key: {key!r}")
            out.write(pad + json.dumps(key, ensure_ascii=False) + ": ")
            _write(obj[key], out, indent, level + 1)
            out.write(",\n" if i + 1 < len(keys) else "\n")
        out.write(closing + "}")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_json(path: Path, obj: Any) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(canonical_json(obj), encoding="utf-8")


def write_csv(path: Path, header: list[str], rows: list[list[str]]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def pct(value: Optional[float]) -> str:
    return "" if value is None else format(100.0 * value, ".2f")


def field_value_obj(value: FieldValue) -> Any:
    if is_absent(value):
        return ABSENT_TOKEN
    if isinstance(value, Scalar):
        return value.text
    if isinstance(value, LicenseSet):
        return list(value.ids)
    if isinstance(value, Checksums):
        return [{"algorithm": c.algorithm, "digest": c.digest} for c in value]
    raise TypeError(f"unexpected field value {value!r}")


def sbom_to_obj(s: NormalizedSbom) -> dict[str, Any]:
    """The unified single-object encoding of a normalized document."""
    obj: dict[str, Any] = {
        "standard": s.standard.value,
        "tool_id": s.tool_id,
        "tool_version": s.tool_version,
        "repo_id": s.repo_id,
        "language": s.language,
        "metadata": {f.value: field_value_obj(v) for f, v in s.metadata.items()},
        "packages": [
            {
                "name": p.name,
                "raw_name": p.raw_name,
                "version": field_value_obj(p.version),
                "purl": field_value_obj(p.purl),
                "license": field_value_obj(p.license),
                "supplier": field_value_obj(p.supplier),
                "copyright": field_value_obj(p.copyright),
                "relationship": p.has_relationship,
                "checksums": field_value_obj(p.checksums),
            }
            for p in s.packages
        ],
    }
    if s.files is not None:
        obj["files"] = [
            {
                "filename": f.filename,
                "checksums": [
                    {"algorithm": c.algorithm, "digest": c.digest} for c in f.checksums
                ],
            }
            for f in s.files
        ]
    return obj


def compliance_to_obj(report: ComplianceReport) -> dict[str, Any]:
    return {
        "tool_id": report.tool_id,
        "language": report.language,
        "standard": report.standard.value,
        "group": report.group,
        "sbom_count": report.sbom_count,
        "zero_package_sboms": report.zero_package_sboms,
        "per_field": {f.value: v for f, v in report.per_field.items()},
        "per_field_micro": {f.value: v for f, v in report.per_field_micro.items()},
    }


def compliance_to_csv(report: ComplianceReport) -> tuple[list[str], list[list[str]]]:
    header = ["tool", "language", "standard", "group", "field", "score_pct", "micro_pct"]
    rows = [
        [
            report.tool_id,
            report.language,
            report.standard.value,
            report.group,
            f.value,
            pct(report.per_field[f]),
            pct(report.per_field_micro[f]),
        ]
        for f in sorted(report.per_field, key=lambda f: f.value)
    ]
    return header, rows


def consistency_to_obj(report: ConsistencyReport) -> dict[str, Any]:
    return {
        "pair": {
            "tool_x": report.pair_id.tool_x,
            "tool_y": report.pair_id.tool_y,
            "standard_x": report.pair_id.standard_x,
            "standard_y": report.pair_id.standard_y,
        },
        "language": report.language,
        "repo_count": report.repo_count,
        "package_consistency": report.package_consistency,
        "per_field": {f.value: v for f, v in report.per_field.items()},
        "per_field_coverage": {
            f.value: v for f, v in report.per_field_coverage.items()
        },
        "per_repo_series": [
            {
                "repo_id": r.repo_id,
                "package_consistency": r.package_consistency,
                "pair_count": r.pair_count,
                "package_count_x": r.package_count_x,
                "package_count_y": r.package_count_y,
                "per_field": {f.value: v for f, v in r.per_field.items()},
            }
            for r in report.per_repo_series
        ],
    }


def consistency_series_csv(
    report: ConsistencyReport,
) -> tuple[list[str], list[list[str]]]:
    fields = sorted(report.per_field, key=lambda f: f.value)
    header = ["repo_id", "package_consistency"] + [f.value for f in fields]
    rows = []
    for r in report.per_repo_series:
        rows.append(
            [r.repo_id, pct(r.package_consistency)]
            + [pct(r.per_field.get(f)) for f in fields]
        )
    return header, rows


def findings_to_csv(
    findings: list[ChecksumFinding],
) -> tuple[list[str], list[list[str]]]:
    header = ["repo", "filename_x", "filename_y", "algorithm", "digest_x", "digest_y"]
    rows = [
        [f.repo_id, f.filename_x, f.filename_y, f.algorithm, f.digest_x, f.digest_y]
        for f in findings
    ]
    return header, rows


def findings_to_obj(findings: list[ChecksumFinding]) -> list[dict[str, Any]]:
    return [
        {
            "repo": f.repo_id,
            "filename_x": f.filename_x,
            "filename_y": f.filename_y,
            "algorithm": f.algorithm,
            "digest_x": f.digest_x,
            "digest_y": f.digest_y,
        }
        for f in findings
    ]


def accuracy_to_obj(report: AccuracyReport) -> dict[str, Any]:
    return {
        "tool_id": report.tool_id,
        "standard": report.standard.value,
        "evaluated_sboms": report.evaluated_sboms,
        "precision": report.precision,
        "recall": report.recall,
        "per_field": {f.value: v for f, v in report.per_field.items()},
        "per_field_micro": {f.value: v for f, v in report.per_field_micro.items()},
        "per_repo_series": [
            {
                "repo_id": r.repo_id,
                "tp": r.tp,
                "fp": r.fp,
                "fn": r.fn,
                "precision": r.precision,
                "recall": r.recall,
                "per_field": {f.value: v for f, v in r.per_field.items()},
            }
            for r in report.per_repo_series
        ],
    }


def accuracy_to_csv(report: AccuracyReport) -> tuple[list[str], list[list[str]]]:
    header = ["tool", "standard", "count", "precision", "recall", "supplier", "license", "version"]
    rows = [
        [
            report.tool_id,
            report.standard.value,
            str(report.evaluated_sboms),
            pct(report.precision),
            pct(report.recall),
            pct(report.per_field.get(FieldId.SUPPLIER)),
            pct(report.per_field.get(FieldId.LICENSE)),
            pct(report.per_field.get(FieldId.VERSION)),
        ]
    ]
    return header, rows
