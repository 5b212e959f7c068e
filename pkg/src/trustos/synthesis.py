"""Document synthesis: evidence strings, the hardened prompt contract, and a
pluggable generator with a deterministic template generator as default.

Evidence strings are derived only from assertion metadata. Trust-facing
document types consume passed assertions exclusively; the executive trust
report additionally carries per-control status lines (counts and the fixed
finding descriptions, never payload text). The generator receives nothing
but the prompt text, so the pipeline is stateless with respect to customer
data.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .catalog import Catalog
from .errors import GeneratorFailure, NoEvidence
from .intelligence import IntelligenceService
from .ledger import EvidenceLedger
from .model import (
    AssertionStatus,
    CLASSIFICATION_DISPLAY,
    ControlAssertion,
    FrameworkId,
    INTEGRATION_DISPLAY,
    PolicyDocument,
    new_id,
    utc_now,
)
from .store import Store

GENERATOR_ENV = "TRUSTOS_DOC_GENERATOR"

PROMPT_ROLE_LINE = "Act as an elite compliance auditor."
PROMPT_EVIDENCE_LINE = "Base it only on the following verified evidence:"


class DocType(str, Enum):
    SOC2_SYSTEM_DESCRIPTION = "Soc2SystemDescription"
    ISO42001_NARRATIVE = "Iso42001Narrative"
    EU_AI_ACT_CONFORMITY_SUMMARY = "EuAiActConformitySummary"
    EXECUTIVE_TRUST_REPORT = "ExecutiveTrustReport"
    CONTROL_POLICY_DRAFT = "ControlPolicyDraft"


DOC_TITLES = {
    DocType.SOC2_SYSTEM_DESCRIPTION: "SOC 2 system description",
    DocType.ISO42001_NARRATIVE: "ISO 42001 AI management system narrative",
    DocType.EU_AI_ACT_CONFORMITY_SUMMARY: "EU AI Act conformity assessment summary",
    DocType.EXECUTIVE_TRUST_REPORT: "board-level executive trust report",
    DocType.CONTROL_POLICY_DRAFT: "control policy draft",
}

#: Framework scope applied when selecting passed assertions per doc type.
_DOC_FRAMEWORK_SCOPE = {
    DocType.SOC2_SYSTEM_DESCRIPTION: FrameworkId.SOC2,
    DocType.ISO42001_NARRATIVE: FrameworkId.ISO42001,
    DocType.EU_AI_ACT_CONFORMITY_SUMMARY: FrameworkId.EU_AI_ACT,
}


@dataclass(frozen=True)
class EvidenceString:
    lines: tuple[str, ...]
    source_assertions: tuple[str, ...]

    def text(self) -> str:
        return "\n".join(self.lines)


@dataclass(frozen=True)
class DocumentRequest:
    workspace_id: str
    doc_type: DocType
    company_name: str


class SynthesisService:
    def __init__(self, store: Store, ledger: EvidenceLedger, catalog: Catalog,
                 intelligence: IntelligenceService, clock=None):
        self._store = store
        self._ledger = ledger
        self._catalog = catalog
        self._intel = intelligence
        self._clock = clock or utc_now
        self._generators: dict[str, Callable[[str], str]] = {
            "template": self.template_generator,
        }

    def register_generator(self, name: str, fn: Callable[[str], str]):
        self._generators[name] = fn

    # -- evidence strings ----------------------------------------------------

    def _in_scope(self, assertion: ControlAssertion, doc_type: DocType) -> bool:
        scope = _DOC_FRAMEWORK_SCOPE.get(doc_type)
        if scope is None:
            return True
        return any(r.framework is scope for r in
                   self._catalog.requirements_for_control(assertion.control_id))

    def _status_line(self, a: ControlAssertion) -> str:
        c, h, m = a.counts()
        name = INTEGRATION_DISPLAY[a.integration]
        if a.status is AssertionStatus.PASS:
            claim = self._catalog.controls[a.control_id].pass_claim
            return f"{name}: PASS — {claim}"
        descriptions = "; ".join(f.description for f in a.findings)
        return (f"{name}: {a.status.value} ({c} critical, {h} high, {m} medium)"
                f" — {descriptions}")

    def build_evidence_string(self, workspace_id: str,
                              doc_type: DocType) -> EvidenceString:
        """Claims from passed assertions; the executive report additionally
        carries posture and per-control status lines."""
        latest = self._ledger.latest_assertions(workspace_id)
        if not latest:
            raise NoEvidence(workspace_id)
        if doc_type is DocType.EXECUTIVE_TRUST_REPORT:
            snapshot = self._intel.compute_posture(workspace_id)
            counts = snapshot.counts
            lines = [
                (f"Posture: {snapshot.score}/100 "
                 f"({CLASSIFICATION_DISPLAY[snapshot.classification]}); findings "
                 f"{counts['critical']} Critical / {counts['high']} High / "
                 f"{counts['medium']} Medium across "
                 f"{snapshot.integrations_scanned} integrations"),
                (f"Projected posture after critical remediation: "
                 f"{snapshot.projected_score}/100"),
            ]
            lines += [self._status_line(a) for a in latest]
            return EvidenceString(tuple(lines),
                                  tuple(a.assertion_id for a in latest))
        passed = [a for a in latest if a.status is AssertionStatus.PASS
                  and self._in_scope(a, doc_type)]
        if not passed:
            raise NoEvidence(f"no passed assertions in scope for {doc_type.value}")
        lines = [self._catalog.controls[a.control_id].pass_claim for a in passed]
        return EvidenceString(tuple(lines),
                              tuple(a.assertion_id for a in passed))

    # -- prompt ---------------------------------------------------------------

    def build_prompt(self, request: DocumentRequest,
                     evidence: EvidenceString) -> str:
        """Deterministic prompt: role line, task line, evidence constraint,
        then the evidence lines."""
        if not evidence.lines:
            raise ValueError("evidence must be non-empty")
        title = DOC_TITLES[request.doc_type]
        parts = [PROMPT_ROLE_LINE,
                 f"Write a {title} for {request.company_name}.",
                 PROMPT_EVIDENCE_LINE]
        parts.extend(evidence.lines)
        return "\n".join(parts)

    # -- generation -------------------------------------------------------------

    def _select_generator(self) -> Callable[[str], str]:
        name = os.environ.get(GENERATOR_ENV, "template")
        if name not in self._generators:
            raise GeneratorFailure(f"no generator registered under {name!r}")
        return self._generators[name]

    def generate_document(self, request: DocumentRequest) -> PolicyDocument:
        """Render markdown via the selected generator and persist it as the
        next PolicyDocument version. Nothing is persisted on failure."""
        evidence = self.build_evidence_string(request.workspace_id,
                                              request.doc_type)
        prompt = self.build_prompt(request, evidence)
        generator = self._select_generator()
        try:
            content = generator(prompt)
        except Exception as exc:
            raise GeneratorFailure(str(exc)) from exc
        with self._store.workspace_lock(request.workspace_id):
            previous = [r["version"] for r in self._store.scoped_query(
                request.workspace_id, "documents",
                lambda r: r["doc_type"] == request.doc_type.value)]
            doc = PolicyDocument(
                document_id=new_id("doc"),
                workspace_id=request.workspace_id,
                doc_type=request.doc_type.value,
                version=max(previous, default=0) + 1,
                content=content,
                source_assertions=evidence.source_assertions,
                generated_at=self._clock(),
            )
            self._store.append("documents", doc.to_record())
            self._store.record_event(request.workspace_id, "synthesis",
                                     "document_generated",
                                     f"document:{doc.document_id}")
        return doc

    # -- the deterministic template generator -------------------------------------

    _STATUS_RE = re.compile(
        r"^(?P<name>[^:]+): (?P<status>FAIL|WARN|PARTIAL_PASS) "
        r"\((?P<c>\d+) critical, (?P<h>\d+) high, (?P<m>\d+) medium\)"
        r" — (?P<desc>.*)$")

    def template_generator(self, prompt: str) -> str:
        """Offline markdown renderer for the prompt contract. Risk areas are
        ordered by severity then penalty weight, parsed from the evidence
        lines alone (the generator sees only the prompt)."""
        lines = prompt.split("\n")
        task_line = lines[1] if len(lines) > 1 else ""
        try:
            evidence_start = lines.index(PROMPT_EVIDENCE_LINE) + 1
        except ValueError:
            evidence_start = len(lines)
        evidence = lines[evidence_start:]
        title = task_line.removeprefix("Write a ").removesuffix(".")
        out = [f"# {title.capitalize() if title else 'Compliance document'}", ""]
        risk_rows = []
        verified = []
        context = []
        for line in evidence:
            m = self._STATUS_RE.match(line)
            if m:
                c, h, mm = int(m["c"]), int(m["h"]), int(m["m"])
                penalty = 23 * c + 8 * h + 2 * mm
                severity_rank = 0 if c else (1 if h else 2)
                first_desc = m["desc"].split("; ")[0]
                risk_rows.append((severity_rank, -penalty, m["name"],
                                  m["status"], first_desc, line))
            elif line.startswith("Posture:") or line.startswith("Projected"):
                context.append(line)
            else:
                verified.append(line)
        for line in context:
            out.append(f"_{line}_")
        if context:
            out.append("")
        if risk_rows:
            risk_rows.sort()
            out.append("## Top Risk Areas")
            for i, (_, _, name, status, desc, _) in enumerate(risk_rows[:2], 1):
                out.append(f"{i}. **{name}** ({status}): {desc}")
            out.append("")
            out.append("## Control Status Detail")
            for *_rest, line in risk_rows:
                out.append(f"- {line}")
            out.append("")
        if verified:
            out.append("## Verified Evidence")
            for line in verified:
                out.append(f"- {line}")
            out.append("")
        out.append("_Generated deterministically from machine-collected control "
                   "assertions; scoring weights are a calibrated "
                   "reconstruction._")
        return "\n".join(out)
