"""Engine facade: wires the store, vault, fleet, probe workers, mapping
engine, intelligence, synthesis, and export services, and drives complete
scenario runs.

Attaching a scenario creates the provider connections for the workspace,
seals the fleet's tokens into the vault, registers declared systems in the
AI registry, and records a pointer (path + content hash) to the fixture
file. The fixture body itself is never persisted inside the platform store:
it is the simulated external world and trace payloads must not ingress.
"""

from __future__ import annotations

import hashlib
import logging
from pathlib import Path
from typing import Optional

from .catalog import Catalog, load_catalog
from .discovery import DiscoveryAgent
from .errors import UnknownEntity
from .export import ExportService
from .fleet import SimulatedFleet
from .intelligence import IntelligenceService, PostureConfig
from .ledger import EvidenceLedger
from .mapping import MappingEngine
from .model import (
    AiSystem,
    CredentialMethod,
    DataFlowRecord,
    DiscoverySource,
    FrameworkId,
    ModelType,
    ProviderConnection,
    ProviderKind,
    ReviewStatus,
    RiskTier,
    Role,
    ScanTrigger,
    UserAccount,
    Workspace,
    new_id,
    utc_now,
)
from .probes import ProbeService
from .scenario import ScenarioFixture, load_scenario
from .store import Store
from .synthesis import SynthesisService
from .vault import CredentialVault

log = logging.getLogger(__name__)

DEFAULT_FRAMEWORKS = frozenset({
    FrameworkId.SOC2, FrameworkId.ISO27001, FrameworkId.ISO42001,
    FrameworkId.EU_AI_ACT, FrameworkId.HIPAA,
})

#: AWS-backed providers assume a read-only role; the rest use scoped tokens.
_STS_PROVIDERS = (ProviderKind.AWS_IAM, ProviderKind.AWS_S3,
                  ProviderKind.MODEL_INVENTORY)


class TrustOs:
    def __init__(self, store_root: Optional[str] = None,
                 vault_key_hex: Optional[str] = None,
                 catalog: Optional[Catalog] = None,
                 posture_config: Optional[PostureConfig] = None,
                 workers: Optional[int] = None,
                 clock=None):
        self.clock = clock or utc_now
        self.store = Store(store_root)
        self.vault = CredentialVault(self.store, vault_key_hex, clock=self.clock)
        self.catalog = catalog or load_catalog()
        self.ledger = EvidenceLedger(self.store)
        self.mapping = MappingEngine(self.store, self.ledger, self.catalog,
                                     clock=self.clock)
        self.intelligence = IntelligenceService(self.store, self.ledger,
                                                posture_config, clock=self.clock)
        self.synthesis = SynthesisService(self.store, self.ledger, self.catalog,
                                          self.intelligence, clock=self.clock)
        self.export = ExportService(self.ledger, self.catalog,
                                    self.intelligence, clock=self.clock)
        self.probes = ProbeService(self.store, self.vault, self.ledger,
                                   self.catalog, workers=workers,
                                   clock=self.clock,
                                   on_assertion=self.mapping.on_assertion)
        self.discovery = DiscoveryAgent(self.store, self.ledger, self.catalog,
                                        self.mapping, clock=self.clock)
        self.mapping.enqueue_recheck = self._enqueue_recheck

    def close(self):
        self.discovery.stop_schedulers()
        self.probes.close()

    # -- workspace lifecycle -------------------------------------------------

    def create_workspace(self, name: str, workspace_id: Optional[str] = None,
                         active_frameworks=DEFAULT_FRAMEWORKS) -> Workspace:
        ws = Workspace(workspace_id or new_id("ws"), name,
                       frozenset(active_frameworks))
        self.store.add_workspace(ws)
        self.store.record_event(ws.workspace_id, "system", "workspace_created",
                                f"workspace:{ws.workspace_id}")
        return ws

    def add_user(self, workspace_id: str, user_id: str, role: Role) -> UserAccount:
        user = UserAccount(user_id, workspace_id, role)
        self.store.append("users", user.to_record())
        return user

    # -- scenario attach -------------------------------------------------------

    def attach_scenario(self, workspace_id: str, fixture: ScenarioFixture,
                        fixture_path: Optional[str] = None,
                        tokens: Optional[dict] = None) -> list[ProviderConnection]:
        """Stand up the simulated fleet for a workspace: one read-only
        connection per provider, tokens sealed in the vault, declared systems
        registered."""
        self.store.require_workspace(workspace_id)
        fleet = SimulatedFleet(fixture, tokens)
        self.probes.register_fleet(workspace_id, fleet)
        self.discovery.register_fleet(workspace_id, fleet)
        connections = []
        for kind in ProviderKind:
            ref = self.vault.store(workspace_id, kind, fleet.token_for(kind))
            sts = kind in _STS_PROVIDERS
            conn = ProviderConnection(
                connection_id=new_id("conn"),
                workspace_id=workspace_id,
                provider_kind=kind,
                credential_ref=ref,
                credential_method=(CredentialMethod.STS_ASSUME_ROLE_READ_ONLY
                                   if sts else CredentialMethod.SCOPED_API_TOKEN),
                external_id=f"ext-{new_id('id')[3:]}" if sts else None,
            )
            self.store.append("connections", conn.to_record())
            connections.append(conn)
        self._register_declared_systems(workspace_id, fixture)
        if fixture_path is not None:
            content = Path(fixture_path).read_bytes()
            self.store.append("scenarios", {
                "workspace_id": workspace_id,
                "scenario_id": fixture.scenario_id,
                "path": str(Path(fixture_path).resolve()),
                "sha256": hashlib.sha256(content).hexdigest(),
            })
        self.store.record_event(workspace_id, "system", "scenario_attached",
                                f"scenario:{fixture.scenario_id}")
        return connections

    def _register_declared_systems(self, workspace_id: str,
                                   fixture: ScenarioFixture):
        existing = {row["name"] for row in
                    self.store.latest_by(workspace_id, "systems",
                                         "system_id").values()}
        inventory_names = {m.name for m in fixture.model_inventory.active_models}
        owner = self.mapping.default_owner(workspace_id)
        for name in fixture.declared_registry:
            if name in existing:
                continue
            system = AiSystem(
                system_id=new_id("sys"),
                workspace_id=workspace_id,
                name=name,
                model_type=(ModelType.FOUNDATION if name in inventory_names
                            else ModelType.PIPELINE),
                deployment_env="production",
                risk_tier=RiskTier.LIMITED,
                discovery_source=DiscoverySource.DECLARED,
                review_status=ReviewStatus.ACTIVE,
                owner=owner,
            )
            self.store.append("systems", system.to_record())

    def reattach_scenario(self, workspace_id: str) -> ScenarioFixture:
        """Rebuild the fleet from the recorded fixture pointer (used by CLI
        subcommands running in a fresh process)."""
        rows = self.store.scoped_query(workspace_id, "scenarios")
        if not rows:
            raise UnknownEntity(f"no scenario attached to {workspace_id}")
        pointer = rows[-1]
        fixture = load_scenario(pointer["path"])
        fleet = SimulatedFleet(fixture)
        self.probes.register_fleet(workspace_id, fleet)
        self.discovery.register_fleet(workspace_id, fleet)
        return fixture

    def replace_fleet_fixture(self, workspace_id: str, fixture: ScenarioFixture,
                              tokens: Optional[dict] = None):
        """Swap the simulated external world (e.g. after remediation). Vault
        tokens are re-sealed so probes keep authenticating."""
        current = self.probes.fleet_for(workspace_id)
        tokens = tokens or {kind: current.token_for(kind)
                            for kind in ProviderKind}
        fleet = SimulatedFleet(fixture, tokens)
        self.probes.register_fleet(workspace_id, fleet)
        self.discovery.register_fleet(workspace_id, fleet)

    # -- scanning ---------------------------------------------------------------

    def connections(self, workspace_id: str) -> list[ProviderConnection]:
        rows = self.store.scoped_query(workspace_id, "connections")
        return [ProviderConnection.from_record(r) for r in rows]

    def enqueue_scan(self, workspace_id: str,
                     connection_ids: Optional[list[str]] = None,
                     trigger: ScanTrigger = ScanTrigger.MANUAL) -> list[str]:
        if connection_ids is None:
            connection_ids = [c.connection_id
                              for c in self.connections(workspace_id)]
        return self.probes.enqueue_scan(workspace_id, connection_ids, trigger)

    def _enqueue_recheck(self, workspace_id, connection_ids, trigger,
                         action_item_id):
        return self.probes.enqueue_scan(workspace_id, connection_ids, trigger,
                                        action_item_id)

    def run_scan(self, workspace_id: str, timeout: float = 60.0) -> list[str]:
        """Enqueue a full scan and wait for the queue to drain."""
        job_ids = self.enqueue_scan(workspace_id)
        if not self.probes.wait_idle(timeout):
            raise TimeoutError("probe queue did not drain in time")
        return job_ids

    # -- data-plane records -------------------------------------------------------

    def record_incidents(self, workspace_id: str, incidents) -> list[str]:
        """Batch-insert incident records (a red-team campaign is exactly
        such a batch). Each must reference an existing system."""
        systems = self.store.latest_by(workspace_id, "systems", "system_id")
        ids = []
        for inc in incidents:
            if inc.system_id not in systems:
                raise UnknownEntity(f"system:{inc.system_id}")
            self.store.append("incidents", inc.to_record())
            current = AiSystem.from_record(systems[inc.system_id])
            updated = AiSystem(
                system_id=current.system_id, workspace_id=current.workspace_id,
                name=current.name, model_type=current.model_type,
                deployment_env=current.deployment_env,
                risk_tier=current.risk_tier,
                discovery_source=current.discovery_source,
                review_status=current.review_status, owner=current.owner,
                linked_controls=current.linked_controls,
                incident_history=current.incident_history + (inc.incident_id,),
            )
            self.store.append("systems", updated.to_record())
            systems[inc.system_id] = updated.to_record()
            ids.append(inc.incident_id)
        return ids

    def add_data_flow(self, flow: DataFlowRecord) -> str:
        self.store.append("data_flows", flow.to_record())
        return flow.flow_id

    # -- scenario runner -----------------------------------------------------------

    def run_scenario(self, fixture_path: str,
                     workspace_id: Optional[str] = None,
                     admin_user: str = "admin") -> dict:
        """Load a fixture, bootstrap the workspace, run a full scan, and
        return the posture summary."""
        fixture = load_scenario(fixture_path)
        ws_id = workspace_id or fixture.workspace_id
        if not self.store.has_workspace(ws_id):
            self.create_workspace(fixture.scenario_id, ws_id)
            self.add_user(ws_id, admin_user, Role.ADMINISTRATOR)
        self.attach_scenario(ws_id, fixture, fixture_path=fixture_path)
        job_ids = self.run_scan(ws_id)
        snapshot = self.intelligence.compute_posture(ws_id)
        return {
            "workspace_id": ws_id,
            "jobs": job_ids,
            "posture": snapshot,
            "assertions": self.ledger.latest_assertions(ws_id),
        }
