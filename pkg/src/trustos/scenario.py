"""Scenario fixtures: the declarative state of the simulated provider fleet.

A fixture file is UTF-8 JSON with exactly the documented keys; unknown keys
are rejected so stale fixtures fail loudly. All flags are explicit booleans
(no defaults) and counts are range-checked at load time.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ParseError, ValidationError
from .model import ProviderKind

PROVIDER_BLOCKS = ("iam", "s3", "github", "okta", "stripe", "vercel",
                   "traces", "model_inventory")

_TOP_KEYS = {"scenario_id", "workspace_id", "declared_registry",
             "probe_delay_ms", *PROVIDER_BLOCKS}


@dataclass(frozen=True)
class TraceRecord:
    trace_id: str
    source_system_id: str
    project: str
    tracing_enabled: bool
    pii_scrubbing_in_logs: bool
    evals_configured: bool
    model_ref: str
    logged_text: str  # transient; examined only inside probe workers


@dataclass(frozen=True)
class AccessKey:
    age_days: int


@dataclass(frozen=True)
class IamUser:
    name: str
    mfa_enabled: bool
    access_keys: tuple[AccessKey, ...]


@dataclass(frozen=True)
class IamState:
    users: tuple[IamUser, ...]
    root_mfa: bool
    password_policy_strong: bool


@dataclass(frozen=True)
class Bucket:
    bucket: str
    public: bool
    encrypted: bool


@dataclass(frozen=True)
class GithubState:
    branch_protection: bool
    signed_commits: bool


@dataclass(frozen=True)
class OktaPolicy:
    mfa_required: bool
    session_lifetime_unlimited: bool
    pct_users_without_mfa: int


@dataclass(frozen=True)
class ActiveModel:
    name: str
    fine_tuned: bool


@dataclass(frozen=True)
class ModelInventory:
    region: str
    foundation_models_available: int
    active_models: tuple[ActiveModel, ...]


@dataclass(frozen=True)
class ScenarioFixture:
    scenario_id: str
    workspace_id: str
    iam: IamState
    s3: tuple[Bucket, ...]
    github: GithubState
    okta: OktaPolicy
    stripe_webhook_signing: bool
    vercel_https_only: bool
    traces: tuple[TraceRecord, ...]
    model_inventory: ModelInventory
    declared_registry: tuple[str, ...]
    probe_delay_ms: dict = field(default_factory=dict)


def _require_keys(obj: dict, allowed: set, required: set, where: str):
    unknown = set(obj) - allowed
    if unknown:
        raise ValidationError(where, f"unknown keys {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise ValidationError(where, f"missing keys {sorted(missing)}")


def _flag(obj: dict, key: str, where: str) -> bool:
    v = obj.get(key)
    if not isinstance(v, bool):
        raise ValidationError(f"{where}.{key}", "must be an explicit boolean")
    return v


def _count(obj: dict, key: str, where: str, lo=0, hi=None) -> int:
    v = obj.get(key)
    if not isinstance(v, int) or isinstance(v, bool) or v < lo \
            or (hi is not None and v > hi):
        bound = f"an integer >= {lo}" if hi is None else f"an integer in [{lo},{hi}]"
        raise ValidationError(f"{where}.{key}", f"must be {bound}")
    return v


def _text(obj: dict, key: str, where: str, allow_empty=False) -> str:
    v = obj.get(key)
    if not isinstance(v, str) or (not allow_empty and not v):
        raise ValidationError(f"{where}.{key}", "must be a non-empty string")
    return v


def _parse_iam(obj, where="iam") -> IamState:
    if not isinstance(obj, dict) or not obj:
        raise ValidationError(where, "provider block must be a non-empty object")
    _require_keys(obj, {"users", "root_mfa", "password_policy_strong"},
                  {"users", "root_mfa", "password_policy_strong"}, where)
    users = []
    if not isinstance(obj["users"], list):
        raise ValidationError(f"{where}.users", "must be a list")
    for i, u in enumerate(obj["users"]):
        w = f"{where}.users[{i}]"
        _require_keys(u, {"name", "mfa_enabled", "access_keys"},
                      {"name", "mfa_enabled", "access_keys"}, w)
        keys = tuple(AccessKey(_count(k, "age_days", f"{w}.access_keys[{j}]"))
                     for j, k in enumerate(u["access_keys"]))
        users.append(IamUser(_text(u, "name", w), _flag(u, "mfa_enabled", w), keys))
    return IamState(tuple(users), _flag(obj, "root_mfa", where),
                    _flag(obj, "password_policy_strong", where))


def _parse_s3(obj, where="s3") -> tuple[Bucket, ...]:
    if not isinstance(obj, list) or not obj:
        raise ValidationError(where, "provider block must be a non-empty list")
    out = []
    for i, b in enumerate(obj):
        w = f"{where}[{i}]"
        _require_keys(b, {"bucket", "public", "encrypted"},
                      {"bucket", "public", "encrypted"}, w)
        out.append(Bucket(_text(b, "bucket", w), _flag(b, "public", w),
                          _flag(b, "encrypted", w)))
    return tuple(out)


def _parse_okta(obj, where="okta") -> OktaPolicy:
    if not isinstance(obj, dict) or not obj:
        raise ValidationError(where, "provider block must be a non-empty object")
    _require_keys(obj, {"default_policy"}, {"default_policy"}, where)
    p = obj["default_policy"]
    w = f"{where}.default_policy"
    _require_keys(p, {"mfa_required", "session_lifetime_unlimited",
                      "pct_users_without_mfa"},
                  {"mfa_required", "session_lifetime_unlimited",
                   "pct_users_without_mfa"}, w)
    return OktaPolicy(_flag(p, "mfa_required", w),
                      _flag(p, "session_lifetime_unlimited", w),
                      _count(p, "pct_users_without_mfa", w, 0, 100))


def _parse_traces(obj, where="traces") -> tuple[TraceRecord, ...]:
    if not isinstance(obj, list):
        raise ValidationError(where, "must be a list")
    fields = {"trace_id", "source_system_id", "project", "tracing_enabled",
              "pii_scrubbing_in_logs", "evals_configured", "model_ref",
              "logged_text"}
    out = []
    for i, t in enumerate(obj):
        w = f"{where}[{i}]"
        _require_keys(t, fields, fields, w)
        out.append(TraceRecord(
            _text(t, "trace_id", w), _text(t, "source_system_id", w),
            _text(t, "project", w), _flag(t, "tracing_enabled", w),
            _flag(t, "pii_scrubbing_in_logs", w), _flag(t, "evals_configured", w),
            _text(t, "model_ref", w), _text(t, "logged_text", w, allow_empty=True)))
    return tuple(out)


def _parse_inventory(obj, where="model_inventory") -> ModelInventory:
    if not isinstance(obj, dict) or not obj:
        raise ValidationError(where, "provider block must be a non-empty object")
    _require_keys(obj, {"region", "foundation_models_available", "active_models"},
                  {"region", "foundation_models_available", "active_models"}, where)
    models = []
    for i, m in enumerate(obj["active_models"]):
        w = f"{where}.active_models[{i}]"
        _require_keys(m, {"name", "fine_tuned"}, {"name", "fine_tuned"}, w)
        models.append(ActiveModel(_text(m, "name", w), _flag(m, "fine_tuned", w)))
    return ModelInventory(_text(obj, "region", where),
                          _count(obj, "foundation_models_available", where),
                          tuple(models))


def parse_fixture(doc: dict) -> ScenarioFixture:
    if not isinstance(doc, dict):
        raise ValidationError("$", "fixture must be a JSON object")
    required = {"scenario_id", "workspace_id", "declared_registry", *PROVIDER_BLOCKS}
    _require_keys(doc, _TOP_KEYS, required, "$")
    for block in ("stripe", "vercel", "github"):
        if not isinstance(doc[block], dict) or not doc[block]:
            raise ValidationError(block, "provider block must be a non-empty object")
    _require_keys(doc["stripe"], {"webhook_signing"}, {"webhook_signing"}, "stripe")
    _require_keys(doc["vercel"], {"https_only"}, {"https_only"}, "vercel")
    _require_keys(doc["github"], {"branch_protection", "signed_commits"},
                  {"branch_protection", "signed_commits"}, "github")
    declared = doc["declared_registry"]
    if not isinstance(declared, list) or not all(isinstance(x, str) and x
                                                 for x in declared):
        raise ValidationError("declared_registry", "must be a list of names")
    delays = doc.get("probe_delay_ms", {})
    if not isinstance(delays, dict):
        raise ValidationError("probe_delay_ms", "must be an object")
    valid_kinds = {k.value for k in ProviderKind}
    for k, v in delays.items():
        if k not in valid_kinds:
            raise ValidationError(f"probe_delay_ms.{k}", "unknown provider kind")
        if not isinstance(v, int) or isinstance(v, bool) or v < 0:
            raise ValidationError(f"probe_delay_ms.{k}", "must be a non-negative int")
    return ScenarioFixture(
        scenario_id=_text(doc, "scenario_id", "$"),
        workspace_id=_text(doc, "workspace_id", "$"),
        iam=_parse_iam(doc["iam"]),
        s3=_parse_s3(doc["s3"]),
        github=GithubState(_flag(doc["github"], "branch_protection", "github"),
                           _flag(doc["github"], "signed_commits", "github")),
        okta=_parse_okta(doc["okta"]),
        stripe_webhook_signing=_flag(doc["stripe"], "webhook_signing", "stripe"),
        vercel_https_only=_flag(doc["vercel"], "https_only", "vercel"),
        traces=_parse_traces(doc["traces"]),
        model_inventory=_parse_inventory(doc["model_inventory"]),
        declared_registry=tuple(declared),
        probe_delay_ms=dict(delays),
    )


def load_scenario(path) -> ScenarioFixture:
    """Load and fully validate a fixture file."""
    p = Path(path)
    try:
        raw = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {p}: {exc}") from exc
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: {exc}") from exc
    return parse_fixture(doc)


def fixture_to_doc(fx: ScenarioFixture) -> dict:
    """Inverse of parse_fixture, used by the fixture builder."""
    return {
        "scenario_id": fx.scenario_id,
        "workspace_id": fx.workspace_id,
        "iam": {
            "users": [{"name": u.name, "mfa_enabled": u.mfa_enabled,
                       "access_keys": [{"age_days": k.age_days}
                                       for k in u.access_keys]}
                      for u in fx.iam.users],
            "root_mfa": fx.iam.root_mfa,
            "password_policy_strong": fx.iam.password_policy_strong,
        },
        "s3": [{"bucket": b.bucket, "public": b.public, "encrypted": b.encrypted}
               for b in fx.s3],
        "github": {"branch_protection": fx.github.branch_protection,
                   "signed_commits": fx.github.signed_commits},
        "okta": {"default_policy": {
            "mfa_required": fx.okta.mfa_required,
            "session_lifetime_unlimited": fx.okta.session_lifetime_unlimited,
            "pct_users_without_mfa": fx.okta.pct_users_without_mfa,
        }},
        "stripe": {"webhook_signing": fx.stripe_webhook_signing},
        "vercel": {"https_only": fx.vercel_https_only},
        "traces": [{
            "trace_id": t.trace_id,
            "source_system_id": t.source_system_id,
            "project": t.project,
            "tracing_enabled": t.tracing_enabled,
            "pii_scrubbing_in_logs": t.pii_scrubbing_in_logs,
            "evals_configured": t.evals_configured,
            "model_ref": t.model_ref,
            "logged_text": t.logged_text,
        } for t in fx.traces],
        "model_inventory": {
            "region": fx.model_inventory.region,
            "foundation_models_available":
                fx.model_inventory.foundation_models_available,
            "active_models": [{"name": m.name, "fine_tuned": m.fine_tuned}
                              for m in fx.model_inventory.active_models],
        },
        "declared_registry": list(fx.declared_registry),
        "probe_delay_ms": dict(fx.probe_delay_ms),
    }
