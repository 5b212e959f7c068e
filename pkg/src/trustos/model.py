"""Domain model: the fifteen persisted entity types plus probe-layer value types.

Every persisted entity carries exactly one workspace_id; the store refuses
records without it. Entities are plain dataclasses serialized to JSON rows,
with enums stored by value.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from enum import Enum
from typing import Optional


def utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def iso_z(dt: datetime) -> str:
    """Render a UTC timestamp as e.g. 2026-04-06T00:14:32Z."""
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_iso_z(s: str) -> datetime:
    return datetime.fromisoformat(s.replace("Z", "+00:00"))


def new_id(prefix: str) -> str:
    return f"{prefix}_{uuid.uuid4().hex[:12]}"


ASSERTION_EXPIRY = timedelta(days=90)


class Role(str, Enum):
    FOUNDER = "Founder"
    ADMINISTRATOR = "Administrator"
    AUDITOR = "Auditor"
    READ_ONLY = "ReadOnly"


#: Roles allowed to mutate workspace state.
WRITE_ROLES = frozenset({Role.FOUNDER, Role.ADMINISTRATOR})


class FrameworkId(str, Enum):
    SOC2 = "SOC2"
    ISO27001 = "ISO27001"
    ISO42001 = "ISO42001"
    EU_AI_ACT = "EUAIAct"
    HIPAA = "HIPAA"
    GDPR = "GDPR"


class ProviderKind(str, Enum):
    AWS_IAM = "AWS_IAM"
    AWS_S3 = "AWS_S3"
    GITHUB = "GITHUB"
    OKTA = "OKTA"
    STRIPE = "STRIPE"
    VERCEL = "VERCEL"
    TRACE_STORE = "TRACE_STORE"
    MODEL_INVENTORY = "MODEL_INVENTORY"


#: Integration name as it appears in dashboards and reports.
INTEGRATION_DISPLAY = {
    ProviderKind.AWS_IAM: "AWS IAM",
    ProviderKind.AWS_S3: "AWS S3",
    ProviderKind.GITHUB: "GitHub",
    ProviderKind.OKTA: "Okta",
    ProviderKind.STRIPE: "Stripe",
    ProviderKind.VERCEL: "Vercel",
    ProviderKind.TRACE_STORE: "LangSmith",
    ProviderKind.MODEL_INVENTORY: "AWS Bedrock",
}

#: Integration name as it appears in the auditor CSV export.
INTEGRATION_EXPORT = {
    ProviderKind.AWS_IAM: "AWS_IAM",
    ProviderKind.AWS_S3: "AWS_S3",
    ProviderKind.GITHUB: "GITHUB",
    ProviderKind.OKTA: "OKTA",
    ProviderKind.STRIPE: "STRIPE",
    ProviderKind.VERCEL: "VERCEL",
    ProviderKind.TRACE_STORE: "LANGSMITH",
    ProviderKind.MODEL_INVENTORY: "BEDROCK",
}


class CredentialMethod(str, Enum):
    STS_ASSUME_ROLE_READ_ONLY = "STS_AssumeRole_ReadOnly"
    SCOPED_API_TOKEN = "ScopedApiToken"


class AssertionStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    WARN = "WARN"
    PARTIAL_PASS = "PARTIAL_PASS"
    UNTESTED = "UNTESTED"


class Severity(str, Enum):
    CRITICAL = "Critical"
    HIGH = "High"
    MEDIUM = "Medium"


class ModelType(str, Enum):
    FOUNDATION = "Foundation"
    FINE_TUNED = "FineTuned"
    PIPELINE = "Pipeline"
    AGENT = "Agent"


class RiskTier(str, Enum):
    UNACCEPTABLE = "Unacceptable"
    HIGH = "High"
    LIMITED = "Limited"
    MINIMAL = "Minimal"
    UNCLASSIFIED = "Unclassified"


class DiscoverySource(str, Enum):
    DECLARED = "DECLARED"
    OBSERVABILITY_AUTO_DISCOVERED = "OBSERVABILITY_AUTO_DISCOVERED"


class ReviewStatus(str, Enum):
    ACTIVE = "ACTIVE"
    PENDING_REVIEW = "PENDING_REVIEW"


class IncidentVector(str, Enum):
    PROMPT_INJECTION = "PromptInjection"
    JAILBREAK = "Jailbreak"
    INDIRECT_INJECTION = "IndirectInjection"
    DATA_EXFILTRATION = "DataExfiltration"


class IncidentOutcome(str, Enum):
    BLOCKED = "Blocked"
    SUCCEEDED = "Succeeded"
    INCONCLUSIVE = "Inconclusive"


class AgreementKind(str, Enum):
    BAA = "BAA"
    DPA = "DPA"


class ProbeKind(str, Enum):
    IAM_AUDIT = "IamAudit"
    S3_AUDIT = "S3Audit"
    GITHUB_AUDIT = "GitHubAudit"
    OKTA_AUDIT = "OktaAudit"
    STRIPE_AUDIT = "StripeAudit"
    VERCEL_AUDIT = "VercelAudit"
    TRACE_PII_AUDIT = "TracePiiAudit"
    MODEL_INVENTORY_AUDIT = "ModelInventoryAudit"
    DISCOVERY_CYCLE = "DiscoveryCycle"


PROBE_FOR_PROVIDER = {
    ProviderKind.AWS_IAM: ProbeKind.IAM_AUDIT,
    ProviderKind.AWS_S3: ProbeKind.S3_AUDIT,
    ProviderKind.GITHUB: ProbeKind.GITHUB_AUDIT,
    ProviderKind.OKTA: ProbeKind.OKTA_AUDIT,
    ProviderKind.STRIPE: ProbeKind.STRIPE_AUDIT,
    ProviderKind.VERCEL: ProbeKind.VERCEL_AUDIT,
    ProviderKind.TRACE_STORE: ProbeKind.TRACE_PII_AUDIT,
    ProviderKind.MODEL_INVENTORY: ProbeKind.MODEL_INVENTORY_AUDIT,
}


class ScanTrigger(str, Enum):
    SCHEDULED = "Scheduled"
    MANUAL = "Manual"
    RECHECK = "Recheck"


class ProbeOutcomeKind(str, Enum):
    COMPLETED = "Completed"
    FAILED = "Failed"


class ActionItemState(str, Enum):
    OPEN = "Open"
    CLOSED = "Closed"


class Classification(str, Enum):
    COMPLIANT = "Compliant"
    SUBSTANTIALLY_COMPLIANT = "SubstantiallyCompliant"
    PARTIALLY_COMPLIANT = "PartiallyCompliant"
    NON_COMPLIANT = "NonCompliant"


CLASSIFICATION_DISPLAY = {
    Classification.COMPLIANT: "Compliant",
    Classification.SUBSTANTIALLY_COMPLIANT: "Substantially Compliant",
    Classification.PARTIALLY_COMPLIANT: "Partially Compliant",
    Classification.NON_COMPLIANT: "Non-Compliant",
}


@dataclass
class Workspace:
    workspace_id: str
    name: str
    active_frameworks: frozenset[FrameworkId]

    def to_record(self) -> dict:
        return {
            "workspace_id": self.workspace_id,
            "name": self.name,
            "active_frameworks": sorted(f.value for f in self.active_frameworks),
        }

    @classmethod
    def from_record(cls, d: dict) -> "Workspace":
        return cls(d["workspace_id"], d["name"],
                   frozenset(FrameworkId(f) for f in d["active_frameworks"]))


@dataclass
class UserAccount:
    user_id: str
    workspace_id: str
    role: Role

    def to_record(self) -> dict:
        return {"user_id": self.user_id, "workspace_id": self.workspace_id,
                "role": self.role.value}

    @classmethod
    def from_record(cls, d: dict) -> "UserAccount":
        return cls(d["user_id"], d["workspace_id"], Role(d["role"]))


@dataclass
class ProviderConnection:
    connection_id: str
    workspace_id: str
    provider_kind: ProviderKind
    credential_ref: str
    credential_method: CredentialMethod
    external_id: Optional[str] = None

    def __post_init__(self):
        sts = self.credential_method is CredentialMethod.STS_ASSUME_ROLE_READ_ONLY
        if sts and not self.external_id:
            raise ValueError("STS connections require an external_id")
        if not sts and self.external_id:
            raise ValueError("external_id is only valid for STS connections")

    def to_record(self) -> dict:
        return {
            "connection_id": self.connection_id,
            "workspace_id": self.workspace_id,
            "provider_kind": self.provider_kind.value,
            "credential_ref": self.credential_ref,
            "credential_method": self.credential_method.value,
            "external_id": self.external_id,
        }

    @classmethod
    def from_record(cls, d: dict) -> "ProviderConnection":
        return cls(d["connection_id"], d["workspace_id"],
                   ProviderKind(d["provider_kind"]), d["credential_ref"],
                   CredentialMethod(d["credential_method"]), d.get("external_id"))


@dataclass
class ProbeRun:
    probe_run_id: str
    workspace_id: str
    connection_id: str
    probe_kind: ProbeKind
    started_at: datetime
    duration_ms: int
    outcome: ProbeOutcomeKind
    systems_discovered: int = 0

    def to_record(self) -> dict:
        return {
            "probe_run_id": self.probe_run_id,
            "workspace_id": self.workspace_id,
            "connection_id": self.connection_id,
            "probe_kind": self.probe_kind.value,
            "started_at": iso_z(self.started_at),
            "duration_ms": self.duration_ms,
            "outcome": self.outcome.value,
            "systems_discovered": self.systems_discovered,
        }

    @classmethod
    def from_record(cls, d: dict) -> "ProbeRun":
        return cls(d["probe_run_id"], d["workspace_id"], d["connection_id"],
                   ProbeKind(d["probe_kind"]), parse_iso_z(d["started_at"]),
                   d["duration_ms"], ProbeOutcomeKind(d["outcome"]),
                   d["systems_discovered"])


@dataclass(frozen=True)
class Finding:
    severity: Severity
    description: str
    framework_refs: tuple = ()  # of (framework value, clause) pairs
    check_id: str = ""

    def to_record(self) -> dict:
        return {
            "severity": self.severity.value,
            "description": self.description,
            "framework_refs": [list(r) for r in self.framework_refs],
            "check_id": self.check_id,
        }

    @classmethod
    def from_record(cls, d: dict) -> "Finding":
        return cls(Severity(d["severity"]), d["description"],
                   tuple(tuple(r) for r in d["framework_refs"]),
                   d.get("check_id", ""))


def severity_counts(findings) -> tuple[int, int, int]:
    """(critical, high, medium) counts for a findings iterable."""
    c = sum(1 for f in findings if f.severity is Severity.CRITICAL)
    h = sum(1 for f in findings if f.severity is Severity.HIGH)
    m = sum(1 for f in findings if f.severity is Severity.MEDIUM)
    return c, h, m


@dataclass
class ControlAssertion:
    assertion_id: str           # "ea_"-prefixed
    workspace_id: str
    control_id: str
    integration: ProviderKind
    status: AssertionStatus
    executed_at: datetime
    expires_at: datetime
    credential_method: CredentialMethod
    watermark: str              # 8 lowercase hex chars
    findings: list[Finding] = field(default_factory=list)
    remediation_ref: Optional[str] = None
    metadata_summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.assertion_id.startswith("ea_"):
            raise ValueError("assertion_id must be prefixed 'ea_'")
        if self.expires_at - self.executed_at != ASSERTION_EXPIRY:
            raise ValueError("expires_at must be exactly 90 days after executed_at")

    def counts(self) -> tuple[int, int, int]:
        return severity_counts(self.findings)

    def to_record(self) -> dict:
        return {
            "assertion_id": self.assertion_id,
            "workspace_id": self.workspace_id,
            "control_id": self.control_id,
            "integration": self.integration.value,
            "status": self.status.value,
            "executed_at": iso_z(self.executed_at),
            "expires_at": iso_z(self.expires_at),
            "credential_method": self.credential_method.value,
            "watermark": self.watermark,
            "findings": [f.to_record() for f in self.findings],
            "remediation_ref": self.remediation_ref,
            "metadata_summary": self.metadata_summary,
        }

    @classmethod
    def from_record(cls, d: dict) -> "ControlAssertion":
        return cls(
            d["assertion_id"], d["workspace_id"], d["control_id"],
            ProviderKind(d["integration"]), AssertionStatus(d["status"]),
            parse_iso_z(d["executed_at"]), parse_iso_z(d["expires_at"]),
            CredentialMethod(d["credential_method"]), d["watermark"],
            [Finding.from_record(f) for f in d["findings"]],
            d.get("remediation_ref"), d.get("metadata_summary", {}),
        )


@dataclass
class ActivityEvent:
    event_id: str
    workspace_id: str
    actor: str
    verb: str
    subject: str
    at: datetime
    seq: int = 0  # per-workspace append sequence, assigned by the store

    def to_record(self) -> dict:
        return {
            "event_id": self.event_id,
            "workspace_id": self.workspace_id,
            "actor": self.actor,
            "verb": self.verb,
            "subject": self.subject,
            "at": iso_z(self.at),
            "seq": self.seq,
        }

    @classmethod
    def from_record(cls, d: dict) -> "ActivityEvent":
        return cls(d["event_id"], d["workspace_id"], d["actor"], d["verb"],
                   d["subject"], parse_iso_z(d["at"]), d.get("seq", 0))


@dataclass
class AiSystem:
    system_id: str
    workspace_id: str
    name: str
    model_type: ModelType
    deployment_env: str
    risk_tier: RiskTier
    discovery_source: DiscoverySource
    review_status: ReviewStatus
    owner: Optional[str] = None
    linked_controls: frozenset[str] = frozenset()
    incident_history: tuple[str, ...] = ()

    def __post_init__(self):
        if self.discovery_source is DiscoverySource.OBSERVABILITY_AUTO_DISCOVERED:
            if self.review_status is ReviewStatus.ACTIVE and self.owner is None:
                raise ValueError("auto-discovered systems need an owner before activation")
        if self.risk_tier is RiskTier.UNCLASSIFIED and self.review_status is ReviewStatus.ACTIVE:
            raise ValueError("unclassified systems cannot be Active")

    def to_record(self) -> dict:
        return {
            "system_id": self.system_id,
            "workspace_id": self.workspace_id,
            "name": self.name,
            "model_type": self.model_type.value,
            "deployment_env": self.deployment_env,
            "risk_tier": self.risk_tier.value,
            "discovery_source": self.discovery_source.value,
            "review_status": self.review_status.value,
            "owner": self.owner,
            "linked_controls": sorted(self.linked_controls),
            "incident_history": list(self.incident_history),
        }

    @classmethod
    def from_record(cls, d: dict) -> "AiSystem":
        return cls(
            d["system_id"], d["workspace_id"], d["name"],
            ModelType(d["model_type"]), d["deployment_env"],
            RiskTier(d["risk_tier"]), DiscoverySource(d["discovery_source"]),
            ReviewStatus(d["review_status"]), d.get("owner"),
            frozenset(d.get("linked_controls", [])),
            tuple(d.get("incident_history", [])),
        )


@dataclass
class IncidentRecord:
    incident_id: str
    workspace_id: str
    system_id: str
    vector: IncidentVector
    outcome: IncidentOutcome
    at: datetime

    def to_record(self) -> dict:
        return {
            "incident_id": self.incident_id,
            "workspace_id": self.workspace_id,
            "system_id": self.system_id,
            "vector": self.vector.value,
            "outcome": self.outcome.value,
            "at": iso_z(self.at),
        }

    @classmethod
    def from_record(cls, d: dict) -> "IncidentRecord":
        return cls(d["incident_id"], d["workspace_id"], d["system_id"],
                   IncidentVector(d["vector"]), IncidentOutcome(d["outcome"]),
                   parse_iso_z(d["at"]))


_FLOW_FIELDS = ("source_system", "processor", "destination", "pii_class",
                "lawful_basis", "jurisdiction", "transfer_mechanism")


@dataclass
class DataFlowRecord:
    flow_id: str
    workspace_id: str
    source_system: str
    processor: str
    destination: str
    pii_class: str
    lawful_basis: str
    jurisdiction: str
    transfer_mechanism: str

    def __post_init__(self):
        for name in _FLOW_FIELDS:
            if not getattr(self, name):
                raise ValueError(f"data flow field {name} must be non-empty")

    def to_record(self) -> dict:
        d = {"flow_id": self.flow_id, "workspace_id": self.workspace_id}
        d.update({name: getattr(self, name) for name in _FLOW_FIELDS})
        return d

    @classmethod
    def from_record(cls, d: dict) -> "DataFlowRecord":
        return cls(d["flow_id"], d["workspace_id"],
                   *[d[name] for name in _FLOW_FIELDS])


@dataclass
class LegalAgreement:
    agreement_id: str
    workspace_id: str
    kind: AgreementKind
    counterparty: str
    effective_at: datetime

    def to_record(self) -> dict:
        return {"agreement_id": self.agreement_id, "workspace_id": self.workspace_id,
                "kind": self.kind.value, "counterparty": self.counterparty,
                "effective_at": iso_z(self.effective_at)}

    @classmethod
    def from_record(cls, d: dict) -> "LegalAgreement":
        return cls(d["agreement_id"], d["workspace_id"], AgreementKind(d["kind"]),
                   d["counterparty"], parse_iso_z(d["effective_at"]))


@dataclass
class ProcessAttestation:
    attestation_id: str
    workspace_id: str
    process_name: str
    attested_by: str
    at: datetime

    def to_record(self) -> dict:
        return {"attestation_id": self.attestation_id, "workspace_id": self.workspace_id,
                "process_name": self.process_name, "attested_by": self.attested_by,
                "at": iso_z(self.at)}

    @classmethod
    def from_record(cls, d: dict) -> "ProcessAttestation":
        return cls(d["attestation_id"], d["workspace_id"], d["process_name"],
                   d["attested_by"], parse_iso_z(d["at"]))


@dataclass
class PolicyDocument:
    document_id: str
    workspace_id: str
    doc_type: str
    version: int
    content: str
    source_assertions: tuple[str, ...]
    generated_at: datetime

    def __post_init__(self):
        if not self.source_assertions:
            raise ValueError("generated documents must cite source assertions")

    def to_record(self) -> dict:
        return {
            "document_id": self.document_id,
            "workspace_id": self.workspace_id,
            "doc_type": self.doc_type,
            "version": self.version,
            "content": self.content,
            "source_assertions": list(self.source_assertions),
            "generated_at": iso_z(self.generated_at),
        }

    @classmethod
    def from_record(cls, d: dict) -> "PolicyDocument":
        return cls(d["document_id"], d["workspace_id"], d["doc_type"], d["version"],
                   d["content"], tuple(d["source_assertions"]),
                   parse_iso_z(d["generated_at"]))


@dataclass
class ActionItem:
    action_item_id: str
    workspace_id: str
    control_id: str
    requirement_id: str
    owner: str
    severity: Severity
    remediation_description: str
    recheck_probe_kind: ProbeKind
    connection_id: str
    state: ActionItemState
    opened_at: datetime
    closed_at: Optional[datetime] = None
    source_assertion_id: str = ""

    def __post_init__(self):
        if self.state is ActionItemState.CLOSED and self.closed_at is None:
            raise ValueError("closed items must carry closed_at")

    def to_record(self) -> dict:
        return {
            "action_item_id": self.action_item_id,
            "workspace_id": self.workspace_id,
            "control_id": self.control_id,
            "requirement_id": self.requirement_id,
            "owner": self.owner,
            "severity": self.severity.value,
            "remediation_description": self.remediation_description,
            "recheck_probe_kind": self.recheck_probe_kind.value,
            "connection_id": self.connection_id,
            "state": self.state.value,
            "opened_at": iso_z(self.opened_at),
            "closed_at": iso_z(self.closed_at) if self.closed_at else None,
            "source_assertion_id": self.source_assertion_id,
        }

    @classmethod
    def from_record(cls, d: dict) -> "ActionItem":
        return cls(
            d["action_item_id"], d["workspace_id"], d["control_id"],
            d["requirement_id"], d["owner"], Severity(d["severity"]),
            d["remediation_description"], ProbeKind(d["recheck_probe_kind"]),
            d["connection_id"], ActionItemState(d["state"]),
            parse_iso_z(d["opened_at"]),
            parse_iso_z(d["closed_at"]) if d.get("closed_at") else None,
            d.get("source_assertion_id", ""),
        )


@dataclass
class DriftEvent:
    drift_id: str
    workspace_id: str
    control_id: str
    from_status: AssertionStatus
    to_status: AssertionStatus
    detected_at: datetime
    from_assertion_id: str = ""
    to_assertion_id: str = ""

    def __post_init__(self):
        if self.from_status is not AssertionStatus.PASS:
            raise ValueError("drift is only defined from a passing state")
        if self.to_status not in (AssertionStatus.FAIL, AssertionStatus.WARN,
                                  AssertionStatus.PARTIAL_PASS):
            raise ValueError("drift target must be a degraded state")

    def to_record(self) -> dict:
        return {
            "drift_id": self.drift_id,
            "workspace_id": self.workspace_id,
            "control_id": self.control_id,
            "from_status": self.from_status.value,
            "to_status": self.to_status.value,
            "detected_at": iso_z(self.detected_at),
            "from_assertion_id": self.from_assertion_id,
            "to_assertion_id": self.to_assertion_id,
        }

    @classmethod
    def from_record(cls, d: dict) -> "DriftEvent":
        return cls(d["drift_id"], d["workspace_id"], d["control_id"],
                   AssertionStatus(d["from_status"]), AssertionStatus(d["to_status"]),
                   parse_iso_z(d["detected_at"]), d.get("from_assertion_id", ""),
                   d.get("to_assertion_id", ""))


@dataclass
class PostureSnapshot:
    workspace_id: str
    at: datetime
    score: int
    classification: Classification
    counts: dict            # {"critical": int, "high": int, "medium": int}
    projected_score: int
    integrations_scanned: int

    def to_record(self) -> dict:
        return {
            "workspace_id": self.workspace_id,
            "at": iso_z(self.at),
            "score": self.score,
            "classification": self.classification.value,
            "counts": dict(self.counts),
            "projected_score": self.projected_score,
            "integrations_scanned": self.integrations_scanned,
        }


@dataclass(frozen=True)
class CohortAggregate:
    cohort_key: str
    n: int
    median_score: float
    quartiles: tuple[float, float]  # (q1, q3)

    def to_record(self) -> dict:
        return {"cohort_key": self.cohort_key, "n": self.n,
                "median_score": self.median_score,
                "quartiles": list(self.quartiles)}
