"""Triple-factor best matching between two package lists.

A candidate pair scores alpha*name + beta*version + gamma*purl; the name
factor is binary on canonical names and is the foundation: without it the
pair scores 0 no matter the weights. Pairs at or above the threshold are
assigned greedily in descending score order under a one-to-one
constraint, with deterministic index tie-breaking.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

from .model import MatchConfig, NormalizedSbom, PackageRecord, is_absent
from .similarity import (
    DEFAULT_METRIC_SETTINGS,
    MetricSettings,
    sim_purl,
    version_similarity,
)

Packages = Union[NormalizedSbom, Sequence[PackageRecord]]


@dataclass(frozen=True)
class PairingResult:
    """One-to-one correspondence: (x index, y index, score) triples plus
    the leftovers on each side, all in source order."""

    pairs: tuple[tuple[int, int, float], ...]
    unmatched_x: tuple[int, ...]
    unmatched_y: tuple[int, ...]


def _packages(value: Packages) -> Sequence[PackageRecord]:
    if isinstance(value, NormalizedSbom):
        return value.packages
    return value


def match_score(
    p1: PackageRecord,
    p2: PackageRecord,
    cfg: MatchConfig,
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> float:
    """Composite correspondence score of two package records.

    A factor with an absent value on either side contributes 0; a name
    mismatch zeroes the whole score.
    """
    if p1.name != p2.name:
        return 0.0
    score = cfg.alpha
    score += cfg.beta * version_similarity(p1.version, p2.version, settings)
    gamma = cfg.effective_gamma
    if gamma and not is_absent(p1.purl) and not is_absent(p2.purl):
        score += gamma * sim_purl(p1.purl.text, p2.purl.text)
    return score


def pair_packages(
    x: Packages,
    y: Packages,
    cfg: MatchConfig,
    settings: MetricSettings = DEFAULT_METRIC_SETTINGS,
) -> PairingResult:
    """Deterministic greedy assignment of best-scoring package pairs.

    Candidates below the effective threshold or failing the name
    foundation never pair; ties break on (score desc, x index, y index).
    """
    xs = _packages(x)
    ys = _packages(y)
    tau = cfg.effective_tau

    by_name: dict[str, list[int]] = {}
    for j, q in enumerate(ys):
        by_name.setdefault(q.name, []).append(j)

    candidates: list[tuple[float, int, int]] = []
    for i, p in enumerate(xs):
        for j in by_name.get(p.name, ()):
            score = match_score(p, ys[j], cfg, settings)
            if score >= tau:
                candidates.append((score, i, j))
    candidates.sort(key=lambda c: (-c[0], c[1], c[2]))

    taken_x: set[int] = set()
    taken_y: set[int] = set()
    pairs: list[tuple[int, int, float]] = []
    for score, i, j in candidates:
        if i in taken_x or j in taken_y:
            continue
        taken_x.add(i)
        taken_y.add(j)
        pairs.append((i, j, score))
    pairs.sort()

    return PairingResult(
        pairs=tuple(pairs),
        unmatched_x=tuple(i for i in range(len(xs)) if i not in taken_x),
        unmatched_y=tuple(j for j in range(len(ys)) if j not in taken_y),
    )


def duplication_ratios(s: Packages) -> tuple[float, float, float]:
    """Intra-SBOM duplicate fractions at name, name+version, and
    name+version+purl key granularity.

    Each value is the fraction of packages whose key is shared with at
    least one other package in the same document; absent fields are keys
    in their own right, so two versionless duplicates still collide.
    """
    packages = _packages(s)
    if not packages:
        return (0.0, 0.0, 0.0)

    def shared_fraction(keys: list) -> float:
        counts: dict = {}
        for k in keys:
            counts[k] = counts.get(k, 0) + 1
        dup = sum(1 for k in keys if counts[k] > 1)
        return dup / len(keys)

    names = [p.name for p in packages]
    name_version = [(p.name, p.version) for p in packages]
    name_version_purl = [(p.name, p.version, p.purl) for p in packages]
    return (
        shared_fraction(names),
        shared_fraction(name_version),
        shared_fraction(name_version_purl),
    )
