"""Watermarked, append-only evidence ledger.

A newer probe result for the same (workspace, control, integration) appends a
new row that supersedes the old one by executed_at (append sequence breaks
ties); prior rows are never modified. Every row is watermarked with the first
4 bytes of SHA-256 over "assertion_id|STATUS|workspace_id" so row-level
tampering in exports is detectable.
"""

from __future__ import annotations

import hashlib
from typing import Optional

from .errors import DuplicateAssertionId, EmptyField, InvalidWatermark
from .model import AssertionStatus, ControlAssertion
from .store import Store

WATERMARK_HEX_CHARS = 8


def compute_watermark(assertion_id: str, status, workspace_id: str) -> str:
    """Lowercase hex of the first 4 bytes of SHA-256 over the canonical
    pipe-joined string. Status uses ledger spelling (e.g. PARTIAL_PASS)."""
    status_text = status.value if isinstance(status, AssertionStatus) else str(status)
    for name, value in (("assertion_id", assertion_id), ("status", status_text),
                        ("workspace_id", workspace_id)):
        if not value:
            raise EmptyField(name)
    canonical = f"{assertion_id}|{status_text}|{workspace_id}"
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:WATERMARK_HEX_CHARS]


class EvidenceLedger:
    def __init__(self, store: Store):
        self._store = store

    def append(self, assertion: ControlAssertion, actor: str = "probe-worker") -> str:
        """Persist a new assertion row; prior rows are never touched."""
        store = self._store
        store.require_workspace(assertion.workspace_id)
        expected = compute_watermark(assertion.assertion_id, assertion.status,
                                     assertion.workspace_id)
        if assertion.watermark != expected:
            raise InvalidWatermark(
                f"{assertion.assertion_id}: stored {assertion.watermark!r} "
                f"!= computed {expected!r}")
        with store.workspace_lock(assertion.workspace_id):
            existing = store.scoped_query(
                assertion.workspace_id, "assertions",
                lambda r: r["assertion_id"] == assertion.assertion_id)
            if existing:
                raise DuplicateAssertionId(assertion.assertion_id)
            store.append("assertions", assertion.to_record())
            store.record_event(assertion.workspace_id, actor, "asserted",
                               f"assertion:{assertion.assertion_id}",
                               at=assertion.executed_at)
        return assertion.assertion_id

    def all_assertions(self, workspace_id: str) -> list[ControlAssertion]:
        rows = self._store.scoped_query(workspace_id, "assertions")
        return [ControlAssertion.from_record(r) for r in rows]

    def get(self, workspace_id: str, assertion_id: str) -> Optional[ControlAssertion]:
        for a in self.all_assertions(workspace_id):
            if a.assertion_id == assertion_id:
                return a
        return None

    def latest_assertions(self, workspace_id: str) -> list[ControlAssertion]:
        """Current evidence: latest row per (control_id, integration),
        ordered by executed_at with append sequence breaking ties."""
        latest: dict[tuple, ControlAssertion] = {}
        for a in self.all_assertions(workspace_id):  # append order
            key = (a.control_id, a.integration)
            cur = latest.get(key)
            if cur is None or a.executed_at >= cur.executed_at:
                latest[key] = a
        return sorted(latest.values(), key=lambda a: a.assertion_id)

    def generations(self, workspace_id: str) -> dict[tuple, list[ControlAssertion]]:
        """Full assertion history per (control_id, integration), oldest first."""
        gens: dict[tuple, list[ControlAssertion]] = {}
        for a in self.all_assertions(workspace_id):
            gens.setdefault((a.control_id, a.integration), []).append(a)
        for seq in gens.values():
            seq.sort(key=lambda a: a.executed_at)
        return gens
