"""Auditor CSV export with per-row watermarks, bundle verification, and the
public trust-center summary.

Export rows match the interchange format byte-for-byte: comma-space
separators, header ASSERTION_ID, CONTROL, INTEGRATION, STATUS, WATERMARK,
deterministic ordering by assertion id. Watermarks are recomputed from
ledger fields at export time, so verification detects any edit to the id or
status cell of any row. The trust-center output carries aggregate counts
only, never integration names, connection ids, bucket names, model names, or
finding text.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime

from .catalog import Catalog
from .errors import MalformedBundle
from .intelligence import IntelligenceService
from .ledger import EvidenceLedger, compute_watermark
from .model import (
    AssertionStatus,
    CLASSIFICATION_DISPLAY,
    INTEGRATION_EXPORT,
    utc_now,
)

CSV_HEADER = "ASSERTION_ID, CONTROL, INTEGRATION, STATUS, WATERMARK"
_COLUMNS = 5


@dataclass(frozen=True)
class RowVerdict:
    assertion_id: str
    ok: bool


@dataclass
class TrustCenterSummary:
    frameworks: dict          # framework -> {"passed": int, "assessed": int}
    classification: str
    generated_at: datetime

    def to_json(self) -> dict:
        return {
            "frameworks": {k: dict(v) for k, v in self.frameworks.items()},
            "classification": self.classification,
            "generated_at": self.generated_at.strftime("%Y-%m-%dT%H:%M:%SZ"),
        }


class ExportService:
    def __init__(self, ledger: EvidenceLedger, catalog: Catalog,
                 intelligence: IntelligenceService, clock=None):
        self._ledger = ledger
        self._catalog = catalog
        self._intel = intelligence
        self._clock = clock or utc_now

    def export_auditor_bundle(self, workspace_id: str) -> str:
        """One watermarked row per latest assertion, ordered by assertion id."""
        rows = [CSV_HEADER]
        for a in self._ledger.latest_assertions(workspace_id):
            control = self._catalog.controls[a.control_id].primary_clause
            watermark = compute_watermark(a.assertion_id, a.status, workspace_id)
            rows.append(", ".join([a.assertion_id, control,
                                   INTEGRATION_EXPORT[a.integration],
                                   a.status.value, watermark]))
        return "\n".join(rows) + "\n"

    def verify_bundle(self, csv_text: str, workspace_id: str) -> list[RowVerdict]:
        """Row ok iff its watermark matches a recomputation over (id, status,
        workspace). Accepts comma or comma-space separators; order-independent."""
        lines = [ln for ln in csv_text.splitlines() if ln.strip()]
        if not lines:
            raise MalformedBundle("empty bundle")
        header = [c.strip() for c in lines[0].split(",")]
        if header != [c.strip() for c in CSV_HEADER.split(",")]:
            raise MalformedBundle(f"unexpected header {lines[0]!r}")
        verdicts = []
        for ln in lines[1:]:
            cells = [c.strip() for c in ln.split(",")]
            if len(cells) != _COLUMNS:
                raise MalformedBundle(f"row with {len(cells)} cells: {ln!r}")
            assertion_id, _control, _integration, status, watermark = cells
            expected = compute_watermark(assertion_id, status, workspace_id)
            verdicts.append(RowVerdict(assertion_id, expected == watermark))
        return verdicts

    def trust_center(self, workspace_id: str) -> TrustCenterSummary:
        """Aggregated pass counts per framework for unauthenticated viewers;
        no topology detail of any kind."""
        latest = self._ledger.latest_assertions(workspace_id)
        frameworks: dict[str, dict] = {}
        for a in latest:
            for req in self._catalog.requirements_for_control(a.control_id):
                bucket = frameworks.setdefault(req.framework.value,
                                               {"passed": 0, "assessed": 0,
                                                "_clauses": {}})
                clause_state = bucket["_clauses"].get(req.clause)
                new_state = a.status is AssertionStatus.PASS
                if clause_state is None:
                    bucket["_clauses"][req.clause] = new_state
                else:
                    bucket["_clauses"][req.clause] = clause_state and new_state
        for bucket in frameworks.values():
            clauses = bucket.pop("_clauses")
            bucket["assessed"] = len(clauses)
            bucket["passed"] = sum(1 for ok in clauses.values() if ok)
        if latest:
            classification = CLASSIFICATION_DISPLAY[
                self._intel.compute_posture(workspace_id).classification]
        else:
            classification = "Unassessed"
        return TrustCenterSummary(frameworks, classification, self._clock())
