"""Field-type-specific similarity metrics.

Three families: exact specifiers (binary after normalization), structured
data compared segment by segment (semantic versions, package URLs), and
unstructured text scored with Jaro-Winkler. All metrics are symmetric,
stateless, and return values in [0, 1].
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional
from urllib.parse import unquote

from .model import (
    ABSENT,
    FieldId,
    FieldValue,
    LicenseSet,
    Scalar,
    canonical_license_list,
    is_absent,
)


class MetricKind(Enum):
    EXACT_NORMALIZED = "exact_normalized"
    SEMVER_SEGMENTED = "semver_segmented"
    PURL_SEGMENTED = "purl_segmented"
    JARO_WINKLER = "jaro_winkler"
    LICENSE_SET_MATCH = "license_set_match"


#: Default metric per package field. Version falls back to Jaro-Winkler
#: when either side is not a semantic version; supplier folds case.
DEFAULT_FIELD_METRICS: dict[FieldId, MetricKind] = {
    FieldId.NAME: MetricKind.EXACT_NORMALIZED,
    FieldId.VERSION: MetricKind.SEMVER_SEGMENTED,
    FieldId.PURL: MetricKind.PURL_SEGMENTED,
    FieldId.LICENSE: MetricKind.LICENSE_SET_MATCH,
    FieldId.SUPPLIER: MetricKind.EXACT_NORMALIZED,
    FieldId.COPYRIGHT: MetricKind.JARO_WINKLER,
    FieldId.CHECKSUMS: MetricKind.EXACT_NORMALIZED,
}

_CASE_FOLDED_FIELDS = frozenset({FieldId.SUPPLIER})


@dataclass(frozen=True)
class SemVerWeights:
    """Stage weights (major, minor, patch); must sum to 1.0."""

    major: float = 0.7
    minor: float = 0.2
    patch: float = 0.1

    def __post_init__(self) -> None:
        if min(self.major, self.minor, self.patch) < 0:
            raise ValueError("stage weights must be non-negative")
        if abs(self.major + self.minor + self.patch - 1.0) > 1e-9:
            raise ValueError("stage weights must sum to 1.0")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.major, self.minor, self.patch)


DEFAULT_SEMVER_WEIGHTS = SemVerWeights()

# Semantic Versioning 2.0.0 grammar (semver.org); exactly three numeric
# stages, optional pre-release / build metadata.
_SEMVER_RE = re.compile(
    r"^(0|[1-9]\d*)\.(0|[1-9]\d*)\.(0|[1-9]\d*)"
    r"(?:-(?:0|[1-9]\d*|\d*[a-zA-Z-][0-9a-zA-Z-]*)"
    r"(?:\.(?:0|[1-9]\d*|\d*[a-zA-Z-][0-9a-zA-Z-]*))*)?"
    r"(?:\+[0-9a-zA-Z-]+(?:\.[0-9a-zA-Z-]+)*)?$"
)


def parse_semver(text: str) -> Optional[tuple[int, int, int]]:
    """Numeric (major, minor, patch) stages, or None if the string is not
    a semantic version. Pre-release and build metadata are accepted but
    ignored."""
    m = _SEMVER_RE.match(text.strip())
    if m is None:
        return None
    return (int(m.group(1)), int(m.group(2)), int(m.group(3)))


def sim_semver(
    v1: str, v2: str, weights: SemVerWeights = DEFAULT_SEMVER_WEIGHTS
) -> Optional[float]:
    """Weighted segment-by-segment similarity of two semantic versions.

    Each stage contributes weight * (1 - |a-b| / max(a, b)); once a stage
    mismatches, all later stages contribute nothing. Equal-zero stages
    count as full matches. Returns None when either string does not parse,
    signalling the caller to fall back to unstructured text comparison.
    """
    s1 = parse_semver(v1)
    s2 = parse_semver(v2)
    if s1 is None or s2 is None:
        return None
    terms = []
    for a, b, w in zip(s1, s2, weights.as_tuple()):
        biggest = max(a, b)
        terms.append(w * (1.0 - (abs(a - b) / biggest if biggest else 0.0)))
        if a != b:
            break
    # correctly rounded sum keeps hand-derived decimals bit-exact
    return math.fsum(terms)


def sim_jaro_winkler(a: str, b: str) -> float:
    """Jaro-Winkler similarity with prefix scale 0.1 and max prefix 4."""
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0

    window = max(la, lb) // 2 - 1
    matched_a = [False] * la
    matched_b = [False] * lb
    matches = 0
    for i in range(la):
        lo = max(0, i - window)
        hi = min(i + window + 1, lb)
        for j in range(lo, hi):
            if matched_b[j] or a[i] != b[j]:
                continue
            matched_a[i] = True
            matched_b[j] = True
            matches += 1
            break
    if matches == 0:
        return 0.0

    transpositions = 0
    k = 0
    for i in range(la):
        if not matched_a[i]:
            continue
        while not matched_b[k]:
            k += 1
        if a[i] != b[k]:
            transpositions += 1
        k += 1
    transpositions //= 2

    jaro = (
        matches / la + matches / lb + (matches - transpositions) / matches
    ) / 3.0

    prefix = 0
    for ca, cb in zip(a[:4], b[:4]):
        if ca != cb:
            break
        prefix += 1
    return jaro + prefix * 0.1 * (1.0 - jaro)


@dataclass(frozen=True)
class Purl:
    """Decomposed package URL: pkg:type/namespace/name@version?qualifiers#subpath"""

    scheme: str
    type: str
    namespace: Optional[str]
    name: str
    version: Optional[str]
    qualifiers: tuple[tuple[str, str], ...]
    subpath: Optional[str]


def parse_purl(text: str) -> Optional[Purl]:
    """Split a package URL into its seven segments, percent-decoded.

    Returns None for strings that do not carry the pkg scheme or lack a
    type or name.
    """
    s = text.strip()
    if not s.lower().startswith("pkg:"):
        return None
    rest = s[4:].lstrip("/")

    subpath: Optional[str] = None
    if "#" in rest:
        rest, _, sub = rest.partition("#")
        sub = sub.strip("/")
        if sub:
            subpath = unquote(sub)

    qualifiers: tuple[tuple[str, str], ...] = ()
    if "?" in rest:
        rest, _, qs = rest.partition("?")
        pairs = []
        for chunk in qs.split("&"):
            if not chunk:
                continue
            key, _, value = chunk.partition("=")
            if key:
                pairs.append((key.lower(), unquote(value)))
        qualifiers = tuple(sorted(pairs))

    version: Optional[str] = None
    if "@" in rest:
        rest, _, ver = rest.rpartition("@")
        version = unquote(ver)

    segments = [p for p in rest.split("/") if p]
    if len(segments) < 2:
        return None
    ptype = segments[0].lower()
    name = unquote(segments[-1])
    namespace = "/".join(unquote(p) for p in segments[1:-1]) or None
    if not ptype or not name:
        return None
    return Purl("pkg", ptype, namespace, name, version, qualifiers, subpath)


def sim_purl(p1: str, p2: str) -> float:
    """Segment-by-segment package URL similarity.

    A segment is compared when present on at least one side and matches on
    string equality after percent-decoding; the score is the matched
    fraction of compared segments. Unparseable purls fall back to
    Jaro-Winkler over the raw strings.
    """
    a = parse_purl(p1)
    b = parse_purl(p2)
    if a is None or b is None:
        return sim_jaro_winkler(p1.strip(), p2.strip())

    compared = 0
    matched = 0
    for va, vb in (
        (a.scheme, b.scheme),
        (a.type, b.type),
        (a.namespace, b.namespace),
        (a.name, b.name),
        (a.version, b.version),
        (a.qualifiers or None, b.qualifiers or None),
        (a.subpath, b.subpath),
    ):
        if va is None and vb is None:
            continue
        compared += 1
        if va == vb:
            matched += 1
    return matched / compared if compared else 1.0


def sim_license(l1: LicenseSet, l2: LicenseSet, binary: bool = False) -> float:
    """Jaccard overlap of two canonical license sets.

    Two empty-but-present sets agree fully. ``binary`` switches to strict
    whole-set equality for sensitivity checks.
    """
    s1, s2 = set(l1.ids), set(l2.ids)
    if not s1 and not s2:
        return 1.0
    if binary:
        return 1.0 if s1 == s2 else 0.0
    return len(s1 & s2) / len(s1 | s2)


def sim_exact(a: str, b: str, fold_case: bool = False) -> int:
    """1 iff the strings agree after trimming (and optional case folding)."""
    x, y = a.strip(), b.strip()
    if fold_case:
        x, y = x.casefold(), y.casefold()
    return 1 if x == y else 0


@dataclass(frozen=True)
class MetricSettings:
    """Knobs shared by every field comparison site."""

    semver_weights: SemVerWeights = DEFAULT_SEMVER_WEIGHTS
    overrides: Mapping[FieldId, MetricKind] = field(default_factory=dict)
    license_binary: bool = False


DEFAULT_METRIC_SETTINGS = MetricSettings()


def version_similarity(
    a: FieldValue, b: FieldValue, settings: MetricSettings = DEFAULT_METRIC_SETTINGS
) -> float:
    """Version metric over field values: SemVer segments when both parse,
    Jaro-Winkler on the raw strings otherwise; absence scores 0."""
    if is_absent(a) or is_absent(b):
        return 0.0
    ta, tb = _scalar_text(a), _scalar_text(b)
    score = sim_semver(ta, tb, settings.semver_weights)
    if score is None:
        return sim_jaro_winkler(ta.strip(), tb.strip())
    return score


def _scalar_text(v: FieldValue) -> str:
    if isinstance(v, Scalar):
        return v.text
    if isinstance(v, LicenseSet):
        return " AND ".join(v.ids)
    return str(v)


def _as_license_set(v: FieldValue) -> LicenseSet:
    if isinstance(v, LicenseSet):
        return v
    return canonical_license_list(_scalar_text(v))


def field_similarity(
    f: FieldId,
    a: FieldValue,
    b: FieldValue,
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> float:
    """Dispatch to the metric registered for a package field.

    Absence on either side scores 0: a value one tool reports and the
    other omits is a disagreement, not a skip.
    """
    if is_absent(a) or is_absent(b):
        return 0.0
    kind = settings.overrides.get(f, DEFAULT_FIELD_METRICS.get(f))
    if kind is None:
        kind = MetricKind.EXACT_NORMALIZED

    if kind is MetricKind.SEMVER_SEGMENTED:
        return version_similarity(a, b, settings)
    if kind is MetricKind.PURL_SEGMENTED:
        return sim_purl(_scalar_text(a), _scalar_text(b))
    if kind is MetricKind.JARO_WINKLER:
        return sim_jaro_winkler(_scalar_text(a).strip(), _scalar_text(b).strip())
    if kind is MetricKind.LICENSE_SET_MATCH:
        return sim_license(
            _as_license_set(a), _as_license_set(b), binary=settings.license_binary
        )
    # exact match; checksum sets compare as normalized (algorithm, digest) pairs
    if f is FieldId.CHECKSUMS:
        return 1.0 if _checksum_key(a) == _checksum_key(b) else 0.0
    return float(
        sim_exact(_scalar_text(a), _scalar_text(b), fold_case=f in _CASE_FOLDED_FIELDS)
    )


def _checksum_key(v: FieldValue) -> frozenset[tuple[str, str]]:
    from .model import Checksums

    if isinstance(v, Checksums):
        return frozenset(
            (c.algorithm.upper().replace("-", ""), c.digest.lower()) for c in v
        )
    return frozenset()
