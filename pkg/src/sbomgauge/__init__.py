"""sbomgauge: measure how well SBOM generators live up to their standards.

The library normalizes heterogeneous SPDX 2.3 / CycloneDX 1.5 documents
into one uniform shape, then scores them on three axes: structural
compliance (are the prescribed fields populated), consistency (do two
streams describe the same software the same way), and accuracy (does a
stream agree with verified ground truth).
"""

from .model import (
    ABSENT,
    BUILTIN_GROUPS,
    Checksum,
    Checksums,
    FieldGroup,
    FieldId,
    FieldScope,
    FieldValue,
    FileRecord,
    GroundTruthDataset,
    GroundTruthEntry,
    GroupMember,
    LicenseSet,
    MatchConfig,
    NormalizedSbom,
    PackageRecord,
    Scalar,
    StandardKind,
    canonical_license_list,
    is_absent,
)
from .extract import (
    ExtractionDiagnostics,
    ExtractionOutcome,
    ExtractSettings,
    extract_bytes,
    extract_file,
    identify_schema,
    normalize_name,
    validate,
)
from .similarity import (
    MetricKind,
    MetricSettings,
    SemVerWeights,
    sim_exact,
    sim_jaro_winkler,
    sim_license,
    sim_purl,
    sim_semver,
)
from .pairing import PairingResult, duplication_ratios, match_score, pair_packages
from .compliance import ComplianceReport, compliance_score, field_presence
from .consistency import (
    ChecksumFinding,
    ConsistencyReport,
    checksum_findings,
    consistency_report,
    cross_standard_consistency,
    field_consistency,
    package_consistency,
)
from .accuracy import (
    AccuracyReport,
    GtMatch,
    accuracy_report,
    field_accuracy,
    load_ground_truth,
    match_against_gt,
    precision_recall,
    validate_ground_truth,
    version_accuracy,
)
from .config import EvalConfig, load_config
from .corpus import Corpus, CorpusManifest, discover_corpus, ingest, load_manifest, run_suite

__version__ = "0.1.0"

__all__ = [
    "ABSENT",
    "AccuracyReport",
    "BUILTIN_GROUPS",
    "Checksum",
    "ChecksumFinding",
    "Checksums",
    "ComplianceReport",
    "ConsistencyReport",
    "Corpus",
    "CorpusManifest",
    "EvalConfig",
    "ExtractSettings",
    "ExtractionDiagnostics",
    "ExtractionOutcome",
    "FieldGroup",
    "FieldId",
    "FieldScope",
    "FieldValue",
    "FileRecord",
    "GroundTruthDataset",
    "GroundTruthEntry",
    "GroupMember",
    "GtMatch",
    "LicenseSet",
    "MatchConfig",
    "MetricKind",
    "MetricSettings",
    "NormalizedSbom",
    "PackageRecord",
    "PairingResult",
    "Scalar",
    "SemVerWeights",
    "StandardKind",
    "accuracy_report",
    "canonical_license_list",
    "checksum_findings",
    "compliance_score",
    "consistency_report",
    "cross_standard_consistency",
    "discover_corpus",
    "duplication_ratios",
    "extract_bytes",
    "extract_file",
    "field_accuracy",
    "field_consistency",
    "field_presence",
    "identify_schema",
    "ingest",
    "is_absent",
    "load_config",
    "load_ground_truth",
    "load_manifest",
    "match_against_gt",
    "match_score",
    "normalize_name",
    "package_consistency",
    "pair_packages",
    "precision_recall",
    "run_suite",
    "sim_exact",
    "sim_jaro_winkler",
    "sim_license",
    "sim_purl",
    "sim_semver",
    "validate",
    "validate_ground_truth",
    "version_accuracy",
]
