"""Shadow-system discovery: scans trace telemetry and the model inventory,
cross-references the AI system registry, auto-registers undeclared systems
as PendingReview, and opens a review action item for each.

A ProbeRun is persisted for every cycle, including cycles that find nothing.
Registration is an upsert keyed on (workspace_id, name), so repeating a
cycle over the same window creates no duplicates. Cycles are serialized per
workspace.
"""

from __future__ import annotations

import logging
import os
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

from .catalog import Catalog
from .errors import Forbidden, InvalidTier, NoObservabilityConnection, NotPending
from .ledger import EvidenceLedger
from .mapping import MappingEngine
from .model import (
    ActionItem,
    ActionItemState,
    AiSystem,
    DiscoverySource,
    ModelType,
    ProbeKind,
    ProbeOutcomeKind,
    ProbeRun,
    ProviderKind,
    ReviewStatus,
    RiskTier,
    Role,
    Severity,
    WRITE_ROLES,
    new_id,
    utc_now,
)
from .store import Store

log = logging.getLogger(__name__)

DISCOVERY_INTERVAL_ENV = "TRUSTOS_DISCOVERY_INTERVAL"


@dataclass
class DiscoveryReport:
    probe_run_id: str
    observed_source_ids: set[str]
    registry_gaps: list[dict] = field(default_factory=list)  # {name, origin}
    new_system_ids: list[str] = field(default_factory=list)


class DiscoveryAgent:
    def __init__(self, store: Store, ledger: EvidenceLedger, catalog: Catalog,
                 mapping: MappingEngine, clock=None):
        self._store = store
        self._ledger = ledger
        self._catalog = catalog
        self._mapping = mapping
        self._clock = clock or utc_now
        self._fleets: dict[str, object] = {}
        self._cycle_locks: dict[str, threading.Lock] = {}
        self._schedulers: dict[str, threading.Event] = {}

    def register_fleet(self, workspace_id: str, fleet):
        self._fleets[workspace_id] = fleet

    def start_scheduler(self, workspace_id: str,
                        interval_s: Optional[float] = None):
        """Run cycles continuously every TRUSTOS_DISCOVERY_INTERVAL seconds;
        0 (the default) means manual trigger only. Returns the stop event,
        or None when scheduling is disabled."""
        if interval_s is None:
            interval_s = float(os.environ.get(DISCOVERY_INTERVAL_ENV, "0"))
        if interval_s <= 0:
            return None
        stop = threading.Event()

        def loop():
            while not stop.wait(interval_s):
                try:
                    self.discovery_cycle(workspace_id)
                except Exception:  # noqa: BLE001 - scheduler must survive
                    log.exception("scheduled discovery cycle failed")

        thread = threading.Thread(target=loop, daemon=True,
                                  name=f"discovery-{workspace_id}")
        thread.start()
        self._schedulers[workspace_id] = stop
        return stop

    def stop_schedulers(self):
        for stop in self._schedulers.values():
            stop.set()
        self._schedulers.clear()

    def _registry_names(self, workspace_id: str) -> set[str]:
        return {row["name"] for row in
                self._store.latest_by(workspace_id, "systems",
                                      "system_id").values()}

    def _observability_connections(self, workspace_id: str) -> list[dict]:
        kinds = (ProviderKind.TRACE_STORE.value, ProviderKind.MODEL_INVENTORY.value)
        return self._store.scoped_query(
            workspace_id, "connections",
            lambda r: r["provider_kind"] in kinds)

    def discovery_cycle(self, workspace_id: str,
                        observation_window: Optional[int] = None) -> DiscoveryReport:
        """One scan over the full fixture history (the simulation has no real
        clock; observation_window exists for live use)."""
        self._store.require_workspace(workspace_id)
        conns = self._observability_connections(workspace_id)
        if not conns:
            raise NoObservabilityConnection(workspace_id)
        lock = self._cycle_locks.setdefault(workspace_id, threading.Lock())
        with lock:
            return self._run_cycle(workspace_id, conns)

    def _run_cycle(self, workspace_id: str, conns: list[dict]) -> DiscoveryReport:
        started = self._clock()
        t0 = time.monotonic()
        fleet = self._fleets[workspace_id]
        fixture = fleet.fixture
        registry = self._registry_names(workspace_id)

        observed: set[str] = set()
        gaps: list[dict] = []
        for t in fixture.traces:
            observed.add(t.source_system_id)
        for source_id in sorted(observed):
            if source_id not in registry:
                gaps.append({"name": source_id, "origin": "TraceStream",
                             "model_type": ModelType.PIPELINE})
        for m in fixture.model_inventory.active_models:
            if m.fine_tuned and m.name not in registry:
                observed.add(m.name)
                gaps.append({"name": m.name, "origin": "ModelInventory",
                             "model_type": ModelType.FINE_TUNED})

        new_ids = []
        for gap in gaps:
            system = AiSystem(
                system_id=new_id("sys"),
                workspace_id=workspace_id,
                name=gap["name"],
                model_type=gap["model_type"],
                deployment_env="production",
                risk_tier=RiskTier.UNCLASSIFIED,
                discovery_source=DiscoverySource.OBSERVABILITY_AUTO_DISCOVERED,
                review_status=ReviewStatus.PENDING_REVIEW,
                owner=None,
            )
            self._store.append("systems", system.to_record())
            self._store.record_event(workspace_id, "discovery-agent",
                                     "registered", f"system:{system.system_id}")
            self._open_review_item(workspace_id, system, conns)
            new_ids.append(system.system_id)
            gap.pop("model_type")

        run = ProbeRun(new_id("run"), workspace_id,
                       conns[0]["connection_id"], ProbeKind.DISCOVERY_CYCLE,
                       started, int((time.monotonic() - t0) * 1000),
                       ProbeOutcomeKind.COMPLETED,
                       systems_discovered=len(new_ids))
        self._store.append("probe_runs", run.to_record())
        return DiscoveryReport(run.probe_run_id, observed, gaps, new_ids)

    def _open_review_item(self, workspace_id: str, system: AiSystem,
                          conns: list[dict]):
        inventory_conns = [c for c in conns if c["provider_kind"]
                           == ProviderKind.MODEL_INVENTORY.value]
        conn = inventory_conns[0] if inventory_conns else conns[0]
        ctl = self._catalog.control_for_integration(
            ProviderKind(conn["provider_kind"]))
        reqs = self._catalog.requirements_for_control(ctl.control_id)
        item = ActionItem(
            action_item_id=new_id("ai"),
            workspace_id=workspace_id,
            control_id=ctl.control_id,
            requirement_id=reqs[0].requirement_id if reqs else "",
            owner=self._mapping.default_owner(workspace_id),
            severity=Severity.HIGH,
            remediation_description=(f"Review discovered system {system.name}: "
                                     f"assign an owner and a risk tier"),
            recheck_probe_kind=ProbeKind.DISCOVERY_CYCLE,
            connection_id=conn["connection_id"],
            state=ActionItemState.OPEN,
            opened_at=self._clock(),
            source_assertion_id=f"system:{system.system_id}",
        )
        self._store.append("action_items", item.to_record())
        self._store.record_event(workspace_id, "discovery-agent",
                                 "action_item_opened",
                                 f"action_item:{item.action_item_id}")

    # -- registry review -------------------------------------------------------

    def systems(self, workspace_id: str) -> list[AiSystem]:
        latest = self._store.latest_by(workspace_id, "systems", "system_id")
        return sorted((AiSystem.from_record(r) for r in latest.values()),
                      key=lambda s: s.system_id)

    def review_system(self, workspace_id: str, system_id: str, actor: str,
                      owner: str, risk_tier: RiskTier) -> AiSystem:
        """Activate a PendingReview system with an owner and a risk tier;
        closes its linked review action item."""
        rows = self._store.scoped_query(workspace_id, "users",
                                        lambda r: r["user_id"] == actor)
        if not rows or Role(rows[-1]["role"]) not in WRITE_ROLES:
            raise Forbidden(actor)
        if risk_tier is RiskTier.UNCLASSIFIED:
            raise InvalidTier("a reviewed system cannot stay Unclassified")
        latest = self._store.latest_by(workspace_id, "systems", "system_id")
        if system_id not in latest:
            from .errors import UnknownEntity
            raise UnknownEntity(f"system:{system_id}")
        system = AiSystem.from_record(latest[system_id])
        if system.review_status is not ReviewStatus.PENDING_REVIEW:
            raise NotPending(system_id)
        reviewed = AiSystem(
            system_id=system.system_id,
            workspace_id=system.workspace_id,
            name=system.name,
            model_type=system.model_type,
            deployment_env=system.deployment_env,
            risk_tier=risk_tier,
            discovery_source=system.discovery_source,
            review_status=ReviewStatus.ACTIVE,
            owner=owner,
            linked_controls=system.linked_controls,
            incident_history=system.incident_history,
        )
        self._store.append("systems", reviewed.to_record())
        self._store.record_event(workspace_id, actor, "system_reviewed",
                                 f"system:{system_id}")
        ref = f"system:{system_id}"
        for item in self._mapping.action_items(workspace_id,
                                               ActionItemState.OPEN):
            if item.source_assertion_id == ref:
                self._close_review_item(workspace_id, item, actor)
        return reviewed

    def _close_review_item(self, workspace_id: str, item: ActionItem, actor: str):
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
                                 f"action_item:{item.action_item_id}")
