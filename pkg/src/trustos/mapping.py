"""Framework mapping engine: assertion fan-out, action-item lifecycle, and
cross-framework coverage matrices.

One probe assertion updates coverage for every requirement its control maps
to across the workspace's active frameworks; failing assertions open exactly
one action item per affected requirement, each carrying the re-check pathway
(probe kind + connection) needed to validate remediation.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional

from .catalog import Catalog
from .errors import AlreadyClosed, Forbidden, UnknownEntity, UnmappedControl
from .ledger import EvidenceLedger
from .model import (
    ActionItem,
    ActionItemState,
    AssertionStatus,
    ControlAssertion,
    PROBE_FOR_PROVIDER,
    Role,
    ScanTrigger,
    Severity,
    UserAccount,
    WRITE_ROLES,
    new_id,
    utc_now,
)
from .store import Store

log = logging.getLogger(__name__)

_FAILING = (AssertionStatus.FAIL, AssertionStatus.PARTIAL_PASS,
            AssertionStatus.WARN)


class MappingEngine:
    def __init__(self, store: Store, ledger: EvidenceLedger, catalog: Catalog,
                 clock=None):
        self._store = store
        self._ledger = ledger
        self._catalog = catalog
        self._clock = clock or utc_now
        #: set by the engine: (workspace_id, connection_ids, trigger,
        #: action_item_id) -> [job_id]
        self.enqueue_recheck: Optional[Callable] = None
        #: optional per-control owner override; falls back to the
        #: workspace administrator
        self.owner_routing: dict[str, str] = {}

    # -- helpers ------------------------------------------------------------

    def _workspace(self, workspace_id: str):
        rows = self._store.scoped_query(workspace_id, "workspaces")
        from .model import Workspace
        return Workspace.from_record(rows[-1])

    def _active_requirements(self, workspace_id: str, control_id: str):
        active = self._workspace(workspace_id).active_frameworks
        return [r for r in self._catalog.requirements_for_control(control_id)
                if r.framework in active]

    def default_owner(self, workspace_id: str) -> str:
        users = [UserAccount.from_record(r)
                 for r in self._store.scoped_query(workspace_id, "users")]
        for role in (Role.ADMINISTRATOR, Role.FOUNDER):
            for u in users:
                if u.role is role:
                    return u.user_id
        return "unassigned"

    def _require_writer(self, workspace_id: str, actor: str):
        rows = self._store.scoped_query(workspace_id, "users",
                                        lambda r: r["user_id"] == actor)
        if not rows or Role(rows[-1]["role"]) not in WRITE_ROLES:
            raise Forbidden(f"{actor} may not mutate workspace state")

    # -- fan-out ------------------------------------------------------------

    def fan_out(self, assertion: ControlAssertion) -> list[tuple[str, str, str]]:
        """(framework, clause, new state) for every mapped requirement in the
        workspace's active frameworks."""
        reqs = self._active_requirements(assertion.workspace_id,
                                         assertion.control_id)
        if not self._catalog.mappings_for_control(assertion.control_id):
            raise UnmappedControl(assertion.control_id)
        state = ("met" if assertion.status is AssertionStatus.PASS else "failed")
        return [(r.framework.value, r.clause, state) for r in reqs]

    def open_action_items(self, assertion: ControlAssertion,
                          connection_id: str) -> list[ActionItem]:
        """One Open item per affected requirement for a failing assertion
        with findings; passing assertions yield none."""
        if assertion.status not in _FAILING or not assertion.findings:
            return []
        ws = assertion.workspace_id
        owner = self.owner_routing.get(assertion.control_id) \
            or self.default_owner(ws)
        order = {Severity.CRITICAL: 0, Severity.HIGH: 1, Severity.MEDIUM: 2}
        worst = min((f.severity for f in assertion.findings), key=order.get)
        description = "; ".join(f.description for f in assertion.findings)
        probe_kind = PROBE_FOR_PROVIDER[assertion.integration]
        items = []
        for req in self._active_requirements(ws, assertion.control_id):
            item = ActionItem(
                action_item_id=new_id("ai"),
                workspace_id=ws,
                control_id=assertion.control_id,
                requirement_id=req.requirement_id,
                owner=owner,
                severity=worst,
                remediation_description=description,
                recheck_probe_kind=probe_kind,
                connection_id=connection_id,
                state=ActionItemState.OPEN,
                opened_at=self._clock(),
                source_assertion_id=assertion.assertion_id,
            )
            self._store.append("action_items", item.to_record())
            self._store.record_event(ws, "assertion-engine", "action_item_opened",
                                     f"action_item:{item.action_item_id}")
            items.append(item)
        return items

    def on_assertion(self, assertion: ControlAssertion, job) -> None:
        """Ledger-append hook: fan out coverage and open items. Runs inside
        the per-workspace append lock."""
        try:
            self.fan_out(assertion)
        except UnmappedControl:
            log.warning("assertion %s on unmapped control %s retained for "
                        "catalog maintenance", assertion.assertion_id,
                        assertion.control_id)
            return
        self.open_action_items(assertion, job.connection_id if job else "")

    # -- action item lifecycle ----------------------------------------------

    def action_items(self, workspace_id: str,
                     state: Optional[ActionItemState] = None) -> list[ActionItem]:
        latest = self._store.latest_by(workspace_id, "action_items",
                                       "action_item_id")
        items = [ActionItem.from_record(r) for r in latest.values()]
        if state is not None:
            items = [i for i in items if i.state is state]
        return sorted(items, key=lambda i: i.action_item_id)

    def get_action_item(self, workspace_id: str, action_item_id: str) -> ActionItem:
        latest = self._store.latest_by(workspace_id, "action_items",
                                       "action_item_id")
        if action_item_id not in latest:
            raise UnknownEntity(f"action_item:{action_item_id}")
        return ActionItem.from_record(latest[action_item_id])

    def close_action_item(self, workspace_id: str, action_item_id: str,
                          actor: str) -> str:
        """Close the item and enqueue a targeted re-scan of exactly the
        item's connection; returns the recheck job id."""
        self._require_writer(workspace_id, actor)
        item = self.get_action_item(workspace_id, action_item_id)
        if item.state is ActionItemState.CLOSED:
            raise AlreadyClosed(action_item_id)
        closed = ActionItem(
            action_item_id=item.action_item_id,
            workspace_id=item.workspace_id,
            control_id=item.control_id,
            requirement_id=item.requirement_id,
            owner=item.owner,
            severity=item.severity,
            remediation_description=item.remediation_description,
            recheck_probe_kind=item.recheck_probe_kind,
            connection_id=item.connection_id,
            state=ActionItemState.CLOSED,
            opened_at=item.opened_at,
            closed_at=self._clock(),
            source_assertion_id=item.source_assertion_id,
        )
        self._store.append("action_items", closed.to_record())
        self._store.record_event(workspace_id, actor, "action_item_closed",
                                 f"action_item:{action_item_id}")
        if self.enqueue_recheck is None:
            raise RuntimeError("recheck pathway not wired")
        job_ids = self.enqueue_recheck(workspace_id, [item.connection_id],
                                       ScanTrigger.RECHECK, action_item_id)
        return job_ids[0]

    # -- coverage -----------------------------------------------------------

    def coverage_matrix(self, workspace_id: str) -> dict:
        """Per-framework met/failed/untested clause lists from the latest
        assertions; clauses with no assertion are untested."""
        latest = self._ledger.latest_assertions(workspace_id)
        state_by_req: dict[str, str] = {}
        for a in latest:
            for req in self._catalog.requirements_for_control(a.control_id):
                new = "met" if a.status is AssertionStatus.PASS else "failed"
                cur = state_by_req.get(req.requirement_id)
                if cur == "failed":
                    continue  # worst state wins
                state_by_req[req.requirement_id] = new
        matrix: dict[str, dict] = {"catalog_version": self._catalog.catalog_version,
                                   "frameworks": {}}
        active = self._workspace(workspace_id).active_frameworks
        for fw in sorted(active, key=lambda f: f.value):
            met, failed, untested = [], [], []
            for req in self._catalog.clauses(fw):
                state = state_by_req.get(req.requirement_id)
                bucket = {"met": met, "failed": failed, None: untested}[state]
                bucket.append(req.clause)
            matrix["frameworks"][fw.value] = {
                "met": sorted(met), "failed": sorted(failed),
                "untested": sorted(untested),
            }
        return matrix

    def assessed_framework_count(self, workspace_id: str) -> int:
        latest = self._ledger.latest_assertions(workspace_id)
        frameworks = set()
        for a in latest:
            for req in self._catalog.requirements_for_control(a.control_id):
                frameworks.add(req.framework)
        return len(frameworks)
