"""Corpus ingestion and job orchestration.

A corpus is either an explicit manifest file or a directory tree laid out
as <tool>/<standard>/<language>/<repo_id>.json (a tool directory may carry
a version suffix, e.g. syft@1.14.1). Every referenced document is
extracted eagerly so the common-repository sets behind consistency scores
are known before any pairing starts. Jobs over independent combinations
run on a worker pool; reductions are ordered, so report bundles are
byte-identical regardless of the parallelism bound.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

from .accuracy import (
    GroundTruthError,
    accuracy_report,
    load_ground_truth,
    match_against_gt,
)
from .compliance import compliance_score
from .config import EvalConfig
from .consistency import (
    checksum_findings,
    consistency_report,
    cross_standard_consistency,
)
from .extract import ExtractionDiagnostics, extract_file
from .model import MatchConfig, NormalizedSbom, StandardKind
from .pairing import duplication_ratios
from . import reportio

LANGUAGES: tuple[str, ...] = ("c-cpp", "java", "python", "other")

DEFAULT_TAU_GRID: tuple[float, ...] = (1.0, 1.5, 2.0, 2.5, 3.0)

ALL_JOBS: tuple[str, ...] = (
    "extract",
    "compliance",
    "consistency",
    "accuracy",
    "duplication",
    "checksums",
    "tau-sweep",
)


class CorpusError(Exception):
    """Fatal corpus problem: nothing usable to evaluate."""


@dataclass(frozen=True)
class ManifestEntry:
    repo_id: str
    language: str
    tool_id: str
    standard: StandardKind
    path: str
    tool_version: Optional[str] = None

    @property
    def stream_key(self) -> tuple[str, Optional[str], StandardKind, str]:
        return (self.tool_id, self.tool_version, self.standard, self.language)


@dataclass(frozen=True)
class CorpusManifest:
    entries: tuple[ManifestEntry, ...]

    def __post_init__(self) -> None:
        seen = set()
        for e in self.entries:
            key = (e.repo_id, e.tool_id, e.standard, e.tool_version)
            if key in seen:
                raise CorpusError(
                    f"duplicate manifest entry for repo={e.repo_id} tool={e.tool_id} "
                    f"standard={e.standard.value} version={e.tool_version}"
                )
            seen.add(key)


def load_manifest(path: str | Path) -> CorpusManifest:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise CorpusError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict) or not isinstance(doc.get("entries"), list):
        raise CorpusError(f"{path}: manifest must be an object with an entries list")
    base = Path(path).parent
    entries = []
    for idx, raw in enumerate(doc["entries"]):
        if not isinstance(raw, dict):
            raise CorpusError(f"{path}: entries[{idx}] must be an object")
        try:
            standard = StandardKind(str(raw.get("standard")))
        except ValueError as exc:
            raise CorpusError(
                f"{path}: entries[{idx}] has unknown standard {raw.get('standard')!r}"
            ) from exc
        language = str(raw.get("language", "other"))
        if language not in LANGUAGES:
            raise CorpusError(
                f"{path}: entries[{idx}] language must be one of {', '.join(LANGUAGES)}"
            )
        repo_id = str(raw.get("repo_id", "")).strip()
        tool_id = str(raw.get("tool_id", "")).strip()
        rel = str(raw.get("path", "")).strip()
        if not repo_id or not tool_id or not rel:
            raise CorpusError(f"{path}: entries[{idx}] needs repo_id, tool_id, path")
        entry_path = Path(rel)
        if not entry_path.is_absolute():
            entry_path = base / entry_path
        version = raw.get("tool_version")
        entries.append(
            ManifestEntry(
                repo_id=repo_id,
                language=language,
                tool_id=tool_id,
                standard=standard,
                path=str(entry_path),
                tool_version=str(version) if version is not None else None,
            )
        )
    if not entries:
        raise CorpusError(f"{path}: manifest lists no entries")
    return CorpusManifest(tuple(entries))


def discover_corpus(root: str | Path) -> CorpusManifest:
    """Walk a <tool>/<standard>/<language>/<repo_id>.json tree."""
    root = Path(root)
    if not root.is_dir():
        raise CorpusError(f"{root}: not a directory")
    entries = []
    for file in sorted(root.glob("*/*/*/*.json")):
        tool_dir, standard_dir, language_dir = file.parts[-4:-1]
        try:
            standard = StandardKind(standard_dir)
        except ValueError:
            continue
        language = language_dir if language_dir in LANGUAGES else "other"
        tool_id, _, tool_version = tool_dir.partition("@")
        entries.append(
            ManifestEntry(
                repo_id=file.stem,
                language=language,
                tool_id=tool_id,
                standard=standard,
                path=str(file),
                tool_version=tool_version or None,
            )
        )
    if not entries:
        raise CorpusError(f"{root}: no SBOM files found under tool/standard/language/")
    return CorpusManifest(tuple(entries))


@dataclass(frozen=True)
class IngestedEntry:
    entry: ManifestEntry
    sbom: Optional[NormalizedSbom]
    diagnostics: ExtractionDiagnostics

    @property
    def ok(self) -> bool:
        return self.sbom is not None


@dataclass
class Corpus:
    entries: list[IngestedEntry]
    missing: tuple[str, ...] = ()

    def ok_entries(self) -> list[IngestedEntry]:
        return [e for e in self.entries if e.ok]

    def diagnostics_summary(self) -> dict[str, dict[str, int]]:
        """Extraction outcome counts per tool, missing files included."""
        summary: dict[str, dict[str, int]] = {}
        for e in self.entries:
            per_tool = summary.setdefault(e.entry.tool_id, {})
            key = e.diagnostics.outcome.value
            per_tool[key] = per_tool.get(key, 0) + 1
        for path in self.missing:
            tool = _tool_of_missing(path)
            per_tool = summary.setdefault(tool, {})
            per_tool["missing_file"] = per_tool.get("missing_file", 0) + 1
        return summary


def _tool_of_missing(path: str) -> str:
    parts = Path(path).parts
    return parts[-4] if len(parts) >= 4 else "unknown"


def ingest(
    manifest: CorpusManifest, config: EvalConfig, max_workers: int = 1
) -> Corpus:
    """Extract every manifest entry eagerly.

    Missing files are listed and skipped; extraction failures become
    diagnostics. Only a corpus with no readable entries at all is fatal.
    """
    settings = config.extract_settings()
    present = [e for e in manifest.entries if Path(e.path).is_file()]
    missing = tuple(e.path for e in manifest.entries if not Path(e.path).is_file())

    def work(entry: ManifestEntry) -> IngestedEntry:
        sbom, diag = extract_file(
            entry.path,
            tool_id=entry.tool_id,
            repo_id=entry.repo_id,
            language=entry.language,
            tool_version=entry.tool_version,
            settings=settings,
        )
        return IngestedEntry(entry=entry, sbom=sbom, diagnostics=diag)

    results = _ordered_map(work, present, max_workers)
    if not results:
        raise CorpusError("corpus is empty: no referenced SBOM file exists")
    return Corpus(entries=results, missing=missing)


def _ordered_map(fn: Callable, items: Sequence, max_workers: int) -> list:
    if max_workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        return list(pool.map(fn, items))


@dataclass
class RunResult:
    out_dir: Path
    reports: list[str] = field(default_factory=list)
    failures: list[dict[str, str]] = field(default_factory=list)
    summary_path: Optional[Path] = None


def _streams(corpus: Corpus) -> dict[tuple, list[IngestedEntry]]:
    streams: dict[tuple, list[IngestedEntry]] = {}
    for e in corpus.ok_entries():
        streams.setdefault(e.entry.stream_key, []).append(e)
    for members in streams.values():
        members.sort(key=lambda e: e.entry.repo_id)
    return dict(sorted(streams.items(), key=lambda kv: _stream_sort_key(kv[0])))


def _stream_sort_key(key: tuple) -> tuple:
    tool_id, tool_version, standard, language = key
    return (tool_id, tool_version or "", standard.value, language)


def _stream_name(key: tuple) -> str:
    tool_id, tool_version, standard, language = key
    tool = f"{tool_id}@{tool_version}" if tool_version else tool_id
    return f"{tool}_{standard.value}_{language}"


def _tool_label(key: tuple) -> str:
    tool_id, tool_version = key[0], key[1]
    return f"{tool_id}@{tool_version}" if tool_version else tool_id


def _common_repos(
    xs: list[IngestedEntry], ys: list[IngestedEntry]
) -> list[tuple[str, NormalizedSbom, NormalizedSbom]]:
    by_repo_x = {e.entry.repo_id: e.sbom for e in xs}
    by_repo_y = {e.entry.repo_id: e.sbom for e in ys}
    common = sorted(set(by_repo_x) & set(by_repo_y))
    return [(r, by_repo_x[r], by_repo_y[r]) for r in common]


def run_suite(
    config: EvalConfig,
    corpus: Corpus,
    jobs: Sequence[str],
    out_dir: str | Path,
    *,
    fmt: str = "json",
    max_workers: int = 1,
    gt_dir: Optional[str | Path] = None,
    tool_filter: Optional[str] = None,
    pair_filter: Optional[tuple[str, str]] = None,
    standard_filter: Optional[StandardKind] = None,
    group_names: Optional[Sequence[str]] = None,
    tau_grid: Sequence[float] = DEFAULT_TAU_GRID,
) -> RunResult:
    """Execute the requested jobs over every applicable combination.

    Emits one report file per job per combination plus a run summary
    carrying the config hash. Per-combination failures are isolated and
    reported, never aborting the rest of the run.
    """
    if not jobs:
        raise ValueError("run_suite requires at least one job")
    unknown = [j for j in jobs if j not in ALL_JOBS]
    if unknown:
        raise ValueError(f"unknown jobs: {', '.join(unknown)}")
    out_dir = Path(out_dir)
    result = RunResult(out_dir=out_dir)
    streams = _streams(corpus)

    tasks: list[tuple[str, str, Callable[[], list[tuple[Path, str]]]]] = []

    def stream_selected(key: tuple) -> bool:
        if tool_filter and _tool_label(key) != tool_filter and key[0] != tool_filter:
            return False
        if standard_filter and key[2] != standard_filter:
            return False
        return True

    if "extract" in jobs:
        for key, members in streams.items():
            if not stream_selected(key):
                continue
            for m in members:
                tasks.append(
                    (
                        "extract",
                        f"{_stream_name(key)}/{m.entry.repo_id}",
                        _extract_task(out_dir, key, m),
                    )
                )

    if "compliance" in jobs:
        selected_groups = _select_groups(config, group_names)
        for key, members in streams.items():
            if not stream_selected(key):
                continue
            for group_name in selected_groups:
                group = config.groups()[group_name]
                if (
                    group.applicable_standard is not None
                    and group.applicable_standard != key[2]
                ):
                    continue
                tasks.append(
                    (
                        "compliance",
                        f"{_stream_name(key)}:{group_name}",
                        _compliance_task(out_dir, fmt, config, key, members, group_name),
                    )
                )

    pair_jobs = [j for j in ("consistency", "checksums", "tau-sweep") if j in jobs]
    if pair_jobs:
        for job, combo, task in _pair_tasks(
            config, streams, out_dir, fmt, pair_jobs, pair_filter,
            standard_filter, tau_grid,
        ):
            tasks.append((job, combo, task))

    if "duplication" in jobs:
        for key, members in streams.items():
            if not stream_selected(key):
                continue
            tasks.append(
                (
                    "duplication",
                    _stream_name(key),
                    _duplication_task(out_dir, fmt, key, members),
                )
            )

    if "accuracy" in jobs:
        if gt_dir is None:
            raise ValueError("the accuracy job requires a ground-truth directory")
        by_tool_standard: dict[tuple, list[IngestedEntry]] = {}
        for key, members in streams.items():
            if not stream_selected(key):
                continue
            by_tool_standard.setdefault((key[0], key[1], key[2]), []).extend(members)
        for ts_key in sorted(
            by_tool_standard, key=lambda k: (k[0], k[1] or "", k[2].value)
        ):
            tasks.append(
                (
                    "accuracy",
                    f"{ts_key[0]}_{ts_key[2].value}",
                    _accuracy_task(
                        out_dir, fmt, config, ts_key, by_tool_standard[ts_key], Path(gt_dir)
                    ),
                )
            )

    def run_task(task: tuple[str, str, Callable]) -> tuple[str, str, Any, Optional[str]]:
        job, combo, fn = task
        try:
            return job, combo, fn(), None
        except Exception as exc:  # noqa: BLE001 - failures isolate per combo
            return job, combo, None, f"{type(exc).__name__}: {exc}"

    outcomes = _ordered_map(run_task, tasks, max_workers)

    job_counts: dict[str, int] = {}
    for job, combo, payload, error in outcomes:
        if error is not None:
            result.failures.append({"job": job, "combination": combo, "error": error})
            continue
        job_counts[job] = job_counts.get(job, 0) + 1
        for path, text in payload:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
            result.reports.append(str(path.relative_to(out_dir)))

    summary = {
        "config_hash": config.config_hash(),
        "jobs": sorted(jobs),
        "completed_combinations": dict(sorted(job_counts.items())),
        "entries": len(corpus.entries),
        "ok_entries": len(corpus.ok_entries()),
        "missing_files": list(corpus.missing),
        "diagnostics_by_tool": corpus.diagnostics_summary(),
        "failures": sorted(
            result.failures, key=lambda f: (f["job"], f["combination"])
        ),
        "reports": sorted(result.reports),
    }
    summary_path = out_dir / "run_summary.json"
    reportio.write_json(summary_path, summary)
    result.summary_path = summary_path
    result.reports.sort()
    return result


def _select_groups(
    config: EvalConfig, group_names: Optional[Sequence[str]]
) -> list[str]:
    available = config.groups()
    if group_names:
        missing = [g for g in group_names if g not in available]
        if missing:
            raise ValueError(f"unknown field groups: {', '.join(missing)}")
        return list(group_names)
    return sorted(available)


def _extract_task(out_dir: Path, key: tuple, member: IngestedEntry) -> Callable:
    def task() -> list[tuple[Path, str]]:
        path = (
            out_dir
            / "extracted"
            / _tool_label(key)
            / key[2].value
            / key[3]
            / f"{member.entry.repo_id}.json"
        )
        return [(path, reportio.canonical_json(reportio.sbom_to_obj(member.sbom)))]

    return task


def _compliance_task(
    out_dir: Path,
    fmt: str,
    config: EvalConfig,
    key: tuple,
    members: list[IngestedEntry],
    group_name: str,
) -> Callable:
    def task() -> list[tuple[Path, str]]:
        group = config.groups()[group_name]
        report = compliance_score([m.sbom for m in members], group)
        stem = out_dir / "compliance" / f"{_stream_name(key)}_{group_name}"
        if fmt == "csv":
            header, rows = reportio.compliance_to_csv(report)
            return [(stem.with_suffix(".csv"), _csv_text(header, rows))]
        return [
            (
                stem.with_suffix(".json"),
                reportio.canonical_json(reportio.compliance_to_obj(report)),
            )
        ]

    return task


def _pair_tasks(
    config: EvalConfig,
    streams: dict[tuple, list[IngestedEntry]],
    out_dir: Path,
    fmt: str,
    pair_jobs: list[str],
    pair_filter: Optional[tuple[str, str]],
    standard_filter: Optional[StandardKind],
    tau_grid: Sequence[float],
) -> Iterable[tuple[str, str, Callable]]:
    settings = config.metric_settings()

    # inter-tool pairs within one standard and language
    by_std_lang: dict[tuple, list[tuple]] = {}
    for key in streams:
        by_std_lang.setdefault((key[2], key[3]), []).append(key)
    for (standard, language), keys in sorted(
        by_std_lang.items(), key=lambda kv: (kv[0][0].value, kv[0][1])
    ):
        if standard_filter and standard != standard_filter:
            continue
        keys = sorted(keys, key=_stream_sort_key)
        for i, key_x in enumerate(keys):
            for key_y in keys[i + 1 :]:
                if (key_x[0], key_x[1]) == (key_y[0], key_y[1]):
                    continue
                if pair_filter and not _pair_matches(pair_filter, key_x, key_y):
                    continue
                repo_pairs = _common_repos(streams[key_x], streams[key_y])
                if not repo_pairs:
                    continue
                combo = f"{_tool_label(key_x)}_vs_{_tool_label(key_y)}_{standard.value}_{language}"
                if "consistency" in pair_jobs:
                    yield (
                        "consistency",
                        combo,
                        _consistency_task(
                            out_dir / "consistency" / combo, fmt, config, settings,
                            repo_pairs, language, cross=False,
                        ),
                    )
                if "tau-sweep" in pair_jobs:
                    yield (
                        "tau-sweep",
                        combo,
                        _sweep_task(
                            out_dir / "tau_sweep" / combo, fmt, config, settings,
                            repo_pairs, tau_grid,
                        ),
                    )
                if "checksums" in pair_jobs and standard is StandardKind.SPDX_23:
                    yield (
                        "checksums",
                        combo,
                        _checksums_task(out_dir / "checksums" / combo, fmt, repo_pairs),
                    )

    # cross-standard self pairs: one tool, both standards, same language
    if not pair_filter:
        by_tool_lang: dict[tuple, dict[StandardKind, tuple]] = {}
        for key in streams:
            by_tool_lang.setdefault((key[0], key[1], key[3]), {})[key[2]] = key
        for (tool_id, tool_version, language), kinds in sorted(
            by_tool_lang.items(), key=lambda kv: (kv[0][0], kv[0][1] or "", kv[0][2])
        ):
            if len(kinds) < 2:
                continue
            key_x = kinds[StandardKind.SPDX_23]
            key_y = kinds[StandardKind.CYCLONEDX_15]
            repo_pairs = _common_repos(streams[key_x], streams[key_y])
            if not repo_pairs:
                continue
            label = f"{tool_id}@{tool_version}" if tool_version else tool_id
            combo = f"{label}_cross_standard_{language}"
            if "consistency" in pair_jobs:
                yield (
                    "consistency",
                    combo,
                    _consistency_task(
                        out_dir / "consistency" / combo, fmt, config, settings,
                        repo_pairs, language, cross=True,
                    ),
                )


def _pair_matches(pair_filter: tuple[str, str], key_x: tuple, key_y: tuple) -> bool:
    wanted = set(pair_filter)
    have = {_tool_label(key_x), _tool_label(key_y)}
    bare = {key_x[0], key_y[0]}
    return wanted == have or wanted == bare


def _consistency_task(
    stem: Path,
    fmt: str,
    config: EvalConfig,
    settings,
    repo_pairs,
    language: str,
    cross: bool,
) -> Callable:
    def task() -> list[tuple[Path, str]]:
        builder = cross_standard_consistency if cross else consistency_report
        report = builder(
            repo_pairs, config.match, settings, language=language
        )
        outputs = [
            (
                stem.with_suffix(".json"),
                reportio.canonical_json(reportio.consistency_to_obj(report)),
            )
        ]
        if fmt == "csv":
            header, rows = reportio.consistency_series_csv(report)
            outputs.append((stem.with_suffix(".csv"), _csv_text(header, rows)))
        return outputs

    return task


def _sweep_task(
    stem: Path, fmt: str, config: EvalConfig, settings, repo_pairs, tau_grid
) -> Callable:
    def task() -> list[tuple[Path, str]]:
        series = []
        for tau in tau_grid:
            cfg = MatchConfig(
                alpha=config.match.alpha,
                beta=config.match.beta,
                gamma=config.match.gamma,
                tau=tau,
                accuracy_mode=config.match.accuracy_mode,
            )
            report = consistency_report(repo_pairs, cfg, settings, fields=())
            series.append({"tau": tau, "package_consistency": report.package_consistency})
        obj = {"tau_series": series, "repo_count": len(repo_pairs)}
        if fmt == "csv":
            header = ["tau", "package_consistency_pct"]
            rows = [
                [format(s["tau"], ".1f"), reportio.pct(s["package_consistency"])]
                for s in series
            ]
            return [(stem.with_suffix(".csv"), _csv_text(header, rows))]
        return [(stem.with_suffix(".json"), reportio.canonical_json(obj))]

    return task


def _checksums_task(stem: Path, fmt: str, repo_pairs) -> Callable:
    def task() -> list[tuple[Path, str]]:
        findings = []
        for repo_id, x, y in repo_pairs:
            findings.extend(checksum_findings(x, y))
        if fmt == "csv":
            header, rows = reportio.findings_to_csv(findings)
            return [(stem.with_suffix(".csv"), _csv_text(header, rows))]
        return [
            (
                stem.with_suffix(".json"),
                reportio.canonical_json(reportio.findings_to_obj(findings)),
            )
        ]

    return task


def _duplication_task(
    out_dir: Path, fmt: str, key: tuple, members: list[IngestedEntry]
) -> Callable:
    def task() -> list[tuple[Path, str]]:
        per_sbom = []
        pooled_dup = [0, 0, 0]
        pooled_total = 0
        for m in members:
            ratios = duplication_ratios(m.sbom)
            count = len(m.sbom.packages)
            per_sbom.append(
                {
                    "repo_id": m.entry.repo_id,
                    "packages": count,
                    "name": ratios[0],
                    "name_version": ratios[1],
                    "name_version_purl": ratios[2],
                }
            )
            pooled_total += count
            for idx in range(3):
                pooled_dup[idx] += round(ratios[idx] * count)
        pooled = [
            (d / pooled_total if pooled_total else 0.0) for d in pooled_dup
        ]
        obj = {
            "tool": _tool_label(key),
            "standard": key[2].value,
            "language": key[3],
            "sbom_count": len(members),
            "pooled": {
                "name": pooled[0],
                "name_version": pooled[1],
                "name_version_purl": pooled[2],
            },
            "per_sbom": per_sbom,
        }
        stem = out_dir / "duplication" / _stream_name(key)
        if fmt == "csv":
            header = ["tool", "standard", "language", "N_pct", "NV_pct", "NVP_pct"]
            rows = [
                [
                    _tool_label(key),
                    key[2].value,
                    key[3],
                    reportio.pct(pooled[0]),
                    reportio.pct(pooled[1]),
                    reportio.pct(pooled[2]),
                ]
            ]
            return [(stem.with_suffix(".csv"), _csv_text(header, rows))]
        return [(stem.with_suffix(".json"), reportio.canonical_json(obj))]

    return task


def _accuracy_task(
    out_dir: Path,
    fmt: str,
    config: EvalConfig,
    ts_key: tuple,
    members: list[IngestedEntry],
    gt_dir: Path,
) -> Callable:
    def task() -> list[tuple[Path, str]]:
        settings = config.metric_settings()
        matches = []
        for m in sorted(members, key=lambda e: e.entry.repo_id):
            gt_path = gt_dir / f"{m.entry.repo_id}.json"
            if not gt_path.is_file():
                continue
            try:
                gt = load_ground_truth(gt_path, config.prefix_list)
            except GroundTruthError:
                continue
            matches.append(match_against_gt(m.sbom, gt, config.match, settings))
        if not matches:
            raise ValueError(
                f"no ground-truth files match any repo of {ts_key[0]} ({ts_key[2].value})"
            )
        tool = f"{ts_key[0]}@{ts_key[1]}" if ts_key[1] else ts_key[0]
        report = accuracy_report(
            matches, tool_id=tool, standard=ts_key[2], settings=settings
        )
        stem = out_dir / "accuracy" / f"{tool}_{ts_key[2].value}"
        if fmt == "csv":
            header, rows = reportio.accuracy_to_csv(report)
            return [(stem.with_suffix(".csv"), _csv_text(header, rows))]
        return [
            (
                stem.with_suffix(".json"),
                reportio.canonical_json(reportio.accuracy_to_obj(report)),
            )
        ]

    return task


def _csv_text(header: list[str], rows: list[list[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()
