"""Package- and field-level agreement between two SBOM streams.

Works for any two streams over common repositories: different tools,
different standards from one tool, or different versions of one tool.
Also joins SPDX file sections to surface checksum mismatches for the same
file under the same hash algorithm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .model import FieldId, MatchConfig, NormalizedSbom, is_absent
from .pairing import PairingResult, pair_packages
from .similarity import DEFAULT_METRIC_SETTINGS, MetricSettings, field_similarity

#: Package fields scored between paired packages. Name is the pairing
#: foundation and relationship graphs are out of scope, so neither is here.
DEFAULT_CONSISTENCY_FIELDS: tuple[FieldId, ...] = (
    FieldId.VERSION,
    FieldId.PURL,
    FieldId.LICENSE,
    FieldId.SUPPLIER,
    FieldId.COPYRIGHT,
)


@dataclass(frozen=True)
class PairId:
    tool_x: str
    tool_y: str
    standard_x: str
    standard_y: str

    @property
    def label(self) -> str:
        left = self.tool_x
        right = self.tool_y
        if self.standard_x == self.standard_y:
            return f"{left}<->{right}@{self.standard_x}"
        return f"{left}@{self.standard_x}<->{right}@{self.standard_y}"


@dataclass(frozen=True)
class RepoScores:
    repo_id: str
    package_consistency: float
    #: None when the repo has no paired packages to score the field on
    per_field: Mapping[FieldId, Optional[float]] = field(default_factory=dict)
    pair_count: int = 0
    package_count_x: int = 0
    package_count_y: int = 0


@dataclass(frozen=True)
class ConsistencyReport:
    pair_id: PairId
    language: str
    package_consistency: float
    per_field: Mapping[FieldId, float]
    #: fraction of scored pairs where both sides populated the field
    per_field_coverage: Mapping[FieldId, float]
    per_repo_series: tuple[RepoScores, ...]
    repo_count: int


@dataclass(frozen=True)
class ChecksumFinding:
    """Two digests for the same file under the same algorithm."""

    repo_id: str
    filename_x: str
    filename_y: str
    algorithm: str
    digest_x: str
    digest_y: str


def package_consistency(
    pairing: PairingResult, x: NormalizedSbom, y: NormalizedSbom
) -> float:
    """Paired fraction of the larger package list; empty-vs-empty is fully
    consistent, empty-vs-nonempty fully inconsistent."""
    nx, ny = len(x.packages), len(y.packages)
    if nx == 0 and ny == 0:
        return 1.0
    return len(pairing.pairs) / max(nx, ny)


def field_consistency(
    per_repo: Sequence[tuple[PairingResult, NormalizedSbom, NormalizedSbom]],
    f: FieldId,
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> float:
    """Mean over repositories of the mean field score across paired
    packages. A pair where either side omits the field scores 0; repos
    without any pairs are left out of the average."""
    repo_means = []
    for pairing, x, y in per_repo:
        scores = [
            field_similarity(f, x.packages[i].field_value(f), y.packages[j].field_value(f), settings)
            for i, j, _ in pairing.pairs
        ]
        if scores:
            repo_means.append(sum(scores) / len(scores))
    return sum(repo_means) / len(repo_means) if repo_means else 0.0


def consistency_report(
    repo_pairs: Sequence[tuple[str, NormalizedSbom, NormalizedSbom]],
    cfg: MatchConfig = MatchConfig(),
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
    fields: tuple[FieldId, ...] = DEFAULT_CONSISTENCY_FIELDS,
    language: str = "",
) -> ConsistencyReport:
    """Score one stream pair across its common repositories.

    ``repo_pairs`` holds (repo_id, x, y) per commonly analyzed repo; the X
    and Y documents of every entry must come from the same two streams.
    """
    if not repo_pairs:
        raise ValueError("consistency_report requires at least one common repo")
    ordered = sorted(repo_pairs, key=lambda r: r[0])

    series: list[RepoScores] = []
    per_repo_pairings: list[tuple[PairingResult, NormalizedSbom, NormalizedSbom]] = []
    for repo_id, x, y in ordered:
        pairing = pair_packages(x, y, cfg, settings)
        per_repo_pairings.append((pairing, x, y))
        per_field_repo: dict[FieldId, Optional[float]] = {}
        for f in fields:
            if pairing.pairs:
                vals = [
                    field_similarity(
                        f, x.packages[i].field_value(f), y.packages[j].field_value(f), settings
                    )
                    for i, j, _ in pairing.pairs
                ]
                per_field_repo[f] = sum(vals) / len(vals)
            else:
                per_field_repo[f] = None
        series.append(
            RepoScores(
                repo_id=repo_id,
                package_consistency=package_consistency(pairing, x, y),
                per_field=per_field_repo,
                pair_count=len(pairing.pairs),
                package_count_x=len(x.packages),
                package_count_y=len(y.packages),
            )
        )

    per_field: dict[FieldId, float] = {}
    per_field_coverage: dict[FieldId, float] = {}
    for f in fields:
        per_field[f] = field_consistency(per_repo_pairings, f, settings)
        covered = 0
        total = 0
        for pairing, x, y in per_repo_pairings:
            for i, j, _ in pairing.pairs:
                total += 1
                if not is_absent(x.packages[i].field_value(f)) and not is_absent(
                    y.packages[j].field_value(f)
                ):
                    covered += 1
        per_field_coverage[f] = covered / total if total else 0.0

    first_x, first_y = ordered[0][1], ordered[0][2]
    return ConsistencyReport(
        pair_id=PairId(
            tool_x=_stream_label(first_x),
            tool_y=_stream_label(first_y),
            standard_x=first_x.standard.value,
            standard_y=first_y.standard.value,
        ),
        language=language or first_x.language,
        package_consistency=(
            sum(r.package_consistency for r in series) / len(series)
        ),
        per_field=per_field,
        per_field_coverage=per_field_coverage,
        per_repo_series=tuple(series),
        repo_count=len(series),
    )


def _stream_label(s: NormalizedSbom) -> str:
    if s.tool_version:
        return f"{s.tool_id}@{s.tool_version}"
    return s.tool_id


def cross_standard_consistency(
    repo_pairs: Sequence[tuple[str, NormalizedSbom, NormalizedSbom]],
    cfg: MatchConfig = MatchConfig(),
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
    fields: tuple[FieldId, ...] = DEFAULT_CONSISTENCY_FIELDS,
    language: str = "",
) -> ConsistencyReport:
    """Same machinery as inter-tool consistency for one tool's two
    standards; the pair id records the standard difference."""
    for repo_id, x, y in repo_pairs:
        if x.tool_id != y.tool_id:
            raise ValueError(f"repo {repo_id}: streams come from different tools")
        if x.standard == y.standard:
            raise ValueError(f"repo {repo_id}: streams share one standard")
    return consistency_report(repo_pairs, cfg, settings, fields, language)


def _normalize_filename(name: str) -> str:
    return name[2:] if name.startswith("./") else name


def _normalize_algorithm(algo: str) -> str:
    return algo.upper().replace("-", "")


def checksum_findings(x: NormalizedSbom, y: NormalizedSbom) -> list[ChecksumFinding]:
    """Join file sections on normalized filename and report digest
    mismatches per shared hash algorithm.

    Filename normalization strips only a leading "./"; deeper path
    canonicalization would manufacture matches the tools did not assert.
    """
    if not x.files or not y.files:
        return []
    by_name: dict[str, list] = {}
    for fy in y.files:
        by_name.setdefault(_normalize_filename(fy.filename), []).append(fy)

    findings: list[ChecksumFinding] = []
    seen: set[tuple] = set()
    for fx in x.files:
        for fy in by_name.get(_normalize_filename(fx.filename), ()):
            digests_y = {
                _normalize_algorithm(c.algorithm): c for c in fy.checksums
            }
            for cx in fx.checksums:
                cy = digests_y.get(_normalize_algorithm(cx.algorithm))
                if cy is None:
                    continue
                if cx.digest.lower() == cy.digest.lower():
                    continue
                key = (fx.filename, fy.filename, _normalize_algorithm(cx.algorithm), cx.digest, cy.digest)
                if key in seen:
                    continue
                seen.add(key)
                findings.append(
                    ChecksumFinding(
                        repo_id=x.repo_id,
                        filename_x=fx.filename,
                        filename_y=fy.filename,
                        algorithm=_normalize_algorithm(cx.algorithm),
                        digest_x=cx.digest,
                        digest_y=cy.digest,
                    )
                )
    return findings
