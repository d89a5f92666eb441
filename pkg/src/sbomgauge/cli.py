"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 fatal corpus problem, 3 the run
finished but some combinations failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from .config import ConfigError, EvalConfig, load_config
from .corpus import (
    ALL_JOBS,
    Corpus,
    CorpusError,
    DEFAULT_TAU_GRID,
    discover_corpus,
    ingest,
    load_manifest,
    run_suite,
)
from .model import MatchConfig, StandardKind
from .reportio import write_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CORPUS = 2
EXIT_PARTIAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # exit 1 on usage errors, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="sbomgauge",
        description=(
            "Measure SBOM quality: structural compliance, cross-tool "
            "consistency, and accuracy against ground truth."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_common(p: argparse.ArgumentParser) -> None:
        source = p.add_mutually_exclusive_group(required=True)
        source.add_argument("--manifest", help="explicit corpus manifest (JSON)")
        source.add_argument(
            "--corpus", help="corpus directory tree tool/standard/language/repo.json"
        )
        p.add_argument("--config", help="evaluation config file (JSON)")
        p.add_argument("--out", default="reports", help="output directory")
        p.add_argument(
            "--format", choices=("json", "csv"), default="json", dest="fmt"
        )
        p.add_argument("--jobs", type=int, default=1, help="worker pool size")
        p.add_argument("--tau", type=float, help="pairing threshold override")
        p.add_argument(
            "--weights", help="pairing weights override as alpha,beta,gamma"
        )
        p.add_argument(
            "--include-root-package",
            choices=("auto", "yes", "no"),
            default=None,
            help="count the primary/root package as a package (auto: SPDX yes, CycloneDX no)",
        )

    p_extract = sub.add_parser("extract", help="normalize every SBOM to unified JSON")
    add_common(p_extract)

    p_compliance = sub.add_parser("compliance", help="field-presence scores per tool")
    add_common(p_compliance)
    p_compliance.add_argument(
        "--group",
        action="append",
        dest="groups",
        help="field group to evaluate (repeatable; default: all applicable)",
    )

    p_consistency = sub.add_parser(
        "consistency", help="agreement between two SBOM streams"
    )
    add_common(p_consistency)
    p_consistency.add_argument("--pair", help="restrict to one tool pair: toolA:toolB")
    p_consistency.add_argument(
        "--standard", choices=("spdx", "cyclonedx"), help="restrict to one standard"
    )
    p_consistency.add_argument(
        "--emit-series", help="also write the per-repo score series to this CSV"
    )

    p_accuracy = sub.add_parser("accuracy", help="precision/recall vs ground truth")
    add_common(p_accuracy)
    p_accuracy.add_argument("--gt-dir", required=True, help="directory of <repo_id>.json ground-truth files")
    p_accuracy.add_argument("--tool", help="restrict to one tool")

    p_duplication = sub.add_parser(
        "duplication", help="intra-SBOM duplicate key ratios (N / NV / NVP)"
    )
    add_common(p_duplication)

    p_checksums = sub.add_parser(
        "checksums", help="checksum mismatches for identical files (SPDX)"
    )
    add_common(p_checksums)
    p_checksums.add_argument("--pair", help="restrict to one tool pair: toolA:toolB")

    p_sweep = sub.add_parser(
        "sweep", help="package consistency across a threshold grid"
    )
    add_common(p_sweep)
    p_sweep.add_argument("--pair", help="restrict to one tool pair: toolA:toolB")
    p_sweep.add_argument(
        "--standard", choices=("spdx", "cyclonedx"), help="restrict to one standard"
    )
    p_sweep.add_argument(
        "--tau-sweep",
        default=",".join(str(t) for t in DEFAULT_TAU_GRID),
        help="comma-separated threshold grid",
    )

    return parser


_COMMAND_JOBS = {
    "extract": "extract",
    "compliance": "compliance",
    "consistency": "consistency",
    "accuracy": "accuracy",
    "duplication": "duplication",
    "checksums": "checksums",
    "sweep": "tau-sweep",
}


def _load_config(args: argparse.Namespace) -> EvalConfig:
    cfg = load_config(args.config) if args.config else EvalConfig()
    match = cfg.match
    if args.tau is not None or args.weights:
        alpha, beta, gamma = match.alpha, match.beta, match.gamma
        if args.weights:
            parts = args.weights.split(",")
            if len(parts) != 3:
                raise ConfigError("--weights expects alpha,beta,gamma")
            try:
                alpha, beta, gamma = (float(p) for p in parts)
            except ValueError as exc:
                raise ConfigError(f"bad --weights: {exc}") from exc
        tau = match.tau if args.tau is None else args.tau
        match = MatchConfig(
            alpha=alpha,
            beta=beta,
            gamma=gamma,
            tau=tau,
            accuracy_mode=match.accuracy_mode,
        )
    include_root = cfg.include_root_package
    if args.include_root_package is not None:
        include_root = {"auto": None, "yes": True, "no": False}[
            args.include_root_package
        ]
    return EvalConfig(
        match=match,
        semver_weights=cfg.semver_weights,
        metric_overrides=cfg.metric_overrides,
        prefix_list=cfg.prefix_list,
        field_groups=cfg.field_groups,
        include_root_package=include_root,
        license_binary_mode=cfg.license_binary_mode,
    )


def _load_corpus(args: argparse.Namespace, config: EvalConfig) -> Corpus:
    manifest = (
        load_manifest(args.manifest)
        if args.manifest
        else discover_corpus(args.corpus)
    )
    return ingest(manifest, config, max_workers=max(1, args.jobs))


def _parse_pair(raw: Optional[str]) -> Optional[tuple[str, str]]:
    if not raw:
        return None
    left, sep, right = raw.partition(":")
    if not sep or not left or not right:
        raise ConfigError("--pair expects toolA:toolB")
    return (left, right)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        config = _load_config(args)
        tau_grid: Sequence[float] = DEFAULT_TAU_GRID
        if getattr(args, "tau_sweep", None):
            tau_grid = tuple(float(t) for t in args.tau_sweep.split(",") if t.strip())
            if not tau_grid:
                raise ConfigError("--tau-sweep lists no thresholds")
        pair_filter = _parse_pair(getattr(args, "pair", None))
    except (ConfigError, ValueError) as exc:
        print(f"sbomgauge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        corpus = _load_corpus(args, config)
    except (CorpusError, OSError) as exc:
        print(f"sbomgauge: fatal: {exc}", file=sys.stderr)
        return EXIT_CORPUS

    standard_filter = None
    if getattr(args, "standard", None):
        standard_filter = StandardKind(args.standard)

    try:
        result = run_suite(
            config,
            corpus,
            jobs=[_COMMAND_JOBS[args.command]],
            out_dir=args.out,
            fmt=args.fmt,
            max_workers=max(1, args.jobs),
            gt_dir=getattr(args, "gt_dir", None),
            tool_filter=getattr(args, "tool", None),
            pair_filter=pair_filter,
            standard_filter=standard_filter,
            group_names=getattr(args, "groups", None),
            tau_grid=tau_grid,
        )
    except ValueError as exc:
        print(f"sbomgauge: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if getattr(args, "emit_series", None):
        _emit_series(result.out_dir, Path(args.emit_series), result.reports)

    for line in _summary_lines(corpus, result):
        print(line)
    return EXIT_PARTIAL if result.failures else EXIT_OK


def _emit_series(out_dir: Path, target: Path, reports: list[str]) -> None:
    """Concatenate the per-repo series of every consistency report into
    one CSV (the raw data behind distribution plots)."""
    rows: list[list[str]] = []
    header: Optional[list[str]] = None
    for rel in sorted(reports):
        if not rel.startswith("consistency/") or not rel.endswith(".json"):
            continue
        doc = json.loads((out_dir / rel).read_text(encoding="utf-8"))
        series = doc.get("per_repo_series", [])
        field_names = sorted(doc.get("per_field", {}))
        if header is None:
            header = ["pair", "repo_id", "package_consistency"] + field_names
        pair = doc["pair"]
        label = f"{pair['tool_x']}<->{pair['tool_y']}"
        for row in series:
            rows.append(
                [label, row["repo_id"], _pct_text(row["package_consistency"])]
                + [_pct_text(row["per_field"].get(f)) for f in field_names]
            )
    if header is None:
        header = ["pair", "repo_id", "package_consistency"]
    write_csv(target, header, rows)


def _pct_text(value) -> str:
    return "" if value is None else format(100.0 * float(value), ".2f")


def _summary_lines(corpus: Corpus, result) -> list[str]:
    lines = [
        f"extracted {len(corpus.ok_entries())}/{len(corpus.entries)} SBOMs"
        + (f", {len(corpus.missing)} missing file(s)" if corpus.missing else ""),
        f"wrote {len(result.reports)} report(s) to {result.out_dir}",
    ]
    for failure in result.failures:
        lines.append(
            f"FAILED {failure['job']} [{failure['combination']}]: {failure['error']}"
        )
    return lines


if __name__ == "__main__":
    raise SystemExit(main())
