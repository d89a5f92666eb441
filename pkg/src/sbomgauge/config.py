"""Evaluation configuration: one JSON document controls every knob.

Defaults reproduce the documented defaults of every module, so an empty
config file (or none at all) runs the reference setup. The config hash
feeds the run summary so identical runs are provably identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

from .extract import DEFAULT_NAME_PREFIXES, ExtractSettings
from .model import (
    BUILTIN_GROUPS,
    FieldGroup,
    FieldId,
    FieldScope,
    GroupMember,
    MatchConfig,
    StandardKind,
)
from .similarity import MetricKind, MetricSettings, SemVerWeights


class ConfigError(ValueError):
    """The configuration document is malformed."""


@dataclass(frozen=True)
class EvalConfig:
    match: MatchConfig = MatchConfig()
    semver_weights: SemVerWeights = SemVerWeights()
    metric_overrides: Mapping[FieldId, MetricKind] = field(default_factory=dict)
    prefix_list: tuple[str, ...] = DEFAULT_NAME_PREFIXES
    #: extra user groups; built-ins stay available and immutable
    field_groups: tuple[FieldGroup, ...] = ()
    include_root_package: Optional[bool] = None
    license_binary_mode: bool = False

    def metric_settings(self) -> MetricSettings:
        return MetricSettings(
            semver_weights=self.semver_weights,
            overrides=dict(self.metric_overrides),
            license_binary=self.license_binary_mode,
        )

    def extract_settings(self) -> ExtractSettings:
        return ExtractSettings(
            name_prefixes=self.prefix_list,
            include_root_package=self.include_root_package,
        )

    def groups(self) -> dict[str, FieldGroup]:
        out = dict(BUILTIN_GROUPS)
        for g in self.field_groups:
            if g.name in BUILTIN_GROUPS:
                raise ConfigError(f"group {g.name!r} shadows a built-in group")
            out[g.name] = g
        return out

    def to_json_obj(self) -> dict[str, Any]:
        return {
            "match": {
                "alpha": self.match.alpha,
                "beta": self.match.beta,
                "gamma": self.match.gamma,
                "tau": self.match.tau,
                "accuracy_mode": self.match.accuracy_mode,
            },
            "semver_weights": list(self.semver_weights.as_tuple()),
            "metric_overrides": {
                f.value: kind.value for f, kind in sorted(
                    self.metric_overrides.items(), key=lambda kv: kv[0].value
                )
            },
            "prefix_list": list(self.prefix_list),
            "field_groups": [
                {
                    "name": g.name,
                    "members": [
                        {"field": m.field.value, "scope": m.scope.value}
                        for m in g.members
                    ],
                    "applicable_standard": (
                        g.applicable_standard.value if g.applicable_standard else None
                    ),
                }
                for g in self.field_groups
            ],
            "flags": {
                "include_root_package": self.include_root_package,
                "license_binary_mode": self.license_binary_mode,
            },
        }

    def config_hash(self) -> str:
        payload = json.dumps(self.to_json_obj(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _field_id(name: str) -> FieldId:
    try:
        return FieldId(name)
    except ValueError as exc:
        raise ConfigError(f"unknown field id {name!r}") from exc


def _standard(name: Optional[str]) -> Optional[StandardKind]:
    if name is None:
        return None
    try:
        return StandardKind(name)
    except ValueError as exc:
        raise ConfigError(f"unknown standard {name!r}") from exc


def config_from_obj(doc: Any) -> EvalConfig:
    """Build an EvalConfig from a parsed JSON document; missing keys keep
    their defaults."""
    if doc is None:
        return EvalConfig()
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")

    match_doc = doc.get("match", {})
    if not isinstance(match_doc, dict):
        raise ConfigError("match must be an object")
    try:
        match = MatchConfig(
            alpha=float(match_doc.get("alpha", 1.0)),
            beta=float(match_doc.get("beta", 1.0)),
            gamma=float(match_doc.get("gamma", 1.0)),
            tau=float(match_doc.get("tau", 2.0)),
            accuracy_mode=bool(match_doc.get("accuracy_mode", False)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad match config: {exc}") from exc

    weights_doc = doc.get("semver_weights", [0.7, 0.2, 0.1])
    if not isinstance(weights_doc, list) or len(weights_doc) != 3:
        raise ConfigError("semver_weights must be a list of 3 numbers")
    try:
        weights = SemVerWeights(*(float(w) for w in weights_doc))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad semver_weights: {exc}") from exc

    overrides_doc = doc.get("metric_overrides", {})
    if not isinstance(overrides_doc, dict):
        raise ConfigError("metric_overrides must be an object")
    overrides: dict[FieldId, MetricKind] = {}
    for key, value in overrides_doc.items():
        try:
            overrides[_field_id(key)] = MetricKind(value)
        except ValueError as exc:
            raise ConfigError(f"unknown metric kind {value!r}") from exc

    prefixes_doc = doc.get("prefix_list", list(DEFAULT_NAME_PREFIXES))
    if not isinstance(prefixes_doc, list) or any(
        not isinstance(p, str) for p in prefixes_doc
    ):
        raise ConfigError("prefix_list must be a list of strings")

    groups_doc = doc.get("field_groups", [])
    if not isinstance(groups_doc, list):
        raise ConfigError("field_groups must be a list")
    groups = []
    for g in groups_doc:
        if not isinstance(g, dict) or not isinstance(g.get("name"), str):
            raise ConfigError("each field group needs a name")
        members_doc = g.get("members")
        if not isinstance(members_doc, list) or not members_doc:
            raise ConfigError(f"group {g['name']!r} needs members")
        members = []
        for m in members_doc:
            if not isinstance(m, dict):
                raise ConfigError(f"group {g['name']!r} members must be objects")
            fid = _field_id(str(m.get("field")))
            scope_name = m.get("scope", fid.scope.value)
            try:
                scope = FieldScope(scope_name)
            except ValueError as exc:
                raise ConfigError(f"unknown scope {scope_name!r}") from exc
            members.append(GroupMember(fid, scope))
        groups.append(
            FieldGroup(
                name=g["name"],
                members=tuple(members),
                applicable_standard=_standard(g.get("applicable_standard")),
            )
        )

    flags = doc.get("flags", {})
    if not isinstance(flags, dict):
        raise ConfigError("flags must be an object")
    include_root = flags.get("include_root_package")
    if include_root is not None and not isinstance(include_root, bool):
        raise ConfigError("include_root_package must be true, false, or null")

    cfg = EvalConfig(
        match=match,
        semver_weights=weights,
        metric_overrides=overrides,
        prefix_list=tuple(prefixes_doc),
        field_groups=tuple(groups),
        include_root_package=include_root,
        license_binary_mode=bool(flags.get("license_binary_mode", False)),
    )
    cfg.groups()  # surfaces built-in shadowing early
    return cfg


def load_config(path: str | Path) -> EvalConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_obj(doc)
