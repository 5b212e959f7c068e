"""Discovery agent: registry gaps, idempotent upsert, review workflow."""

import pytest

from trustos.corpus import acme_fixture, build_acme_fixture_doc, clean_fixture
from trustos.errors import Forbidden, InvalidTier, NoObservabilityConnection, NotPending
from trustos.model import (
    ActionItemState,
    DiscoverySource,
    ProbeKind,
    ReviewStatus,
    RiskTier,
    Role,
)
from trustos.scenario import parse_fixture

WS = "ws_acme_fin_8821"


class TestDiscoveryCycle:
    def test_acme_finds_exactly_the_undeclared_finetune(self, acme_engine):
        report = acme_engine.discovery.discovery_cycle(WS)
        assert report.registry_gaps == [
            {"name": "acme-custom-classifier-v1", "origin": "ModelInventory"}]
        assert len(report.new_system_ids) == 1
        system = next(s for s in acme_engine.discovery.systems(WS)
                      if s.name == "acme-custom-classifier-v1")
        assert system.discovery_source is \
            DiscoverySource.OBSERVABILITY_AUTO_DISCOVERED
        assert system.review_status is ReviewStatus.PENDING_REVIEW
        assert system.risk_tier is RiskTier.UNCLASSIFIED
        assert system.owner is None

    def test_review_action_item_opened(self, acme_engine):
        report = acme_engine.discovery.discovery_cycle(WS)
        sys_id = report.new_system_ids[0]
        items = [i for i in acme_engine.mapping.action_items(
            WS, ActionItemState.OPEN)
            if i.source_assertion_id == f"system:{sys_id}"]
        assert len(items) == 1
        assert "acme-custom-classifier-v1" in items[0].remediation_description

    def test_second_cycle_is_idempotent(self, acme_engine):
        first = acme_engine.discovery.discovery_cycle(WS)
        assert len(first.new_system_ids) == 1
        second = acme_engine.discovery.discovery_cycle(WS)
        assert second.new_system_ids == []
        assert second.registry_gaps == []
        names = [s.name for s in acme_engine.discovery.systems(WS)]
        assert names.count("acme-custom-classifier-v1") == 1

    def test_probe_run_persisted_even_with_zero_gaps(self, clean_engine):
        ws = "ws_clean_0001"
        before = len(clean_engine.store.scoped_query(ws, "probe_runs"))
        report = clean_engine.discovery.discovery_cycle(ws)
        assert report.registry_gaps == []
        runs = clean_engine.store.scoped_query(ws, "probe_runs")
        assert len(runs) == before + 1
        assert runs[-1]["probe_kind"] == ProbeKind.DISCOVERY_CYCLE.value
        assert runs[-1]["systems_discovered"] == 0

    def test_trace_origin_gap(self, engine, workspace):
        doc = build_acme_fixture_doc()
        doc["declared_registry"].remove("document-qa")
        engine.attach_scenario(workspace.workspace_id, parse_fixture(doc))
        report = engine.discovery.discovery_cycle(workspace.workspace_id)
        origins = {g["name"]: g["origin"] for g in report.registry_gaps}
        assert origins["document-qa"] == "TraceStream"

    def test_recall_and_no_false_registration(self, acme_engine):
        """Brute-force recall check against the fixture."""
        fx = acme_fixture()
        declared = set(fx.declared_registry)
        expected_gaps = {t.source_system_id for t in fx.traces} - declared
        expected_gaps |= {m.name for m in fx.model_inventory.active_models
                          if m.fine_tuned and m.name not in declared}
        report = acme_engine.discovery.discovery_cycle(WS)
        assert {g["name"] for g in report.registry_gaps} == expected_gaps
        observable = {t.source_system_id for t in fx.traces} \
            | {m.name for m in fx.model_inventory.active_models}
        for gap in report.registry_gaps:
            assert gap["name"] in observable

    def test_requires_observability_connection(self, engine, workspace):
        with pytest.raises(NoObservabilityConnection):
            engine.discovery.discovery_cycle(workspace.workspace_id)

    def test_scheduler_runs_cycles(self, engine, workspace):
        import time
        engine.attach_scenario(workspace.workspace_id, clean_fixture())
        before = len(engine.store.scoped_query(workspace.workspace_id,
                                               "probe_runs"))
        stop = engine.discovery.start_scheduler(workspace.workspace_id,
                                                interval_s=0.05)
        assert stop is not None
        time.sleep(0.35)
        engine.discovery.stop_schedulers()
        runs = engine.store.scoped_query(workspace.workspace_id, "probe_runs")
        assert len(runs) > before

    def test_scheduler_disabled_by_default(self, engine, workspace,
                                           monkeypatch):
        monkeypatch.delenv("TRUSTOS_DISCOVERY_INTERVAL", raising=False)
        assert engine.discovery.start_scheduler(workspace.workspace_id) is None


class TestReview:
    def _discovered(self, engine):
        engine.discovery.discovery_cycle(WS)
        return next(s for s in engine.discovery.systems(WS)
                    if s.review_status is ReviewStatus.PENDING_REVIEW)

    def test_admin_review_activates(self, acme_engine):
        system = self._discovered(acme_engine)
        reviewed = acme_engine.discovery.review_system(
            WS, system.system_id, "admin", owner="admin",
            risk_tier=RiskTier.HIGH)
        assert reviewed.review_status is ReviewStatus.ACTIVE
        assert reviewed.risk_tier is RiskTier.HIGH
        assert reviewed.owner == "admin"
        items = [i for i in acme_engine.mapping.action_items(WS)
                 if i.source_assertion_id == f"system:{system.system_id}"]
        assert all(i.state is ActionItemState.CLOSED for i in items)

    def test_auditor_forbidden(self, acme_engine):
        acme_engine.add_user(WS, "audrey", Role.AUDITOR)
        system = self._discovered(acme_engine)
        with pytest.raises(Forbidden):
            acme_engine.discovery.review_system(
                WS, system.system_id, "audrey", owner="audrey",
                risk_tier=RiskTier.HIGH)

    def test_unclassified_tier_rejected(self, acme_engine):
        system = self._discovered(acme_engine)
        with pytest.raises(InvalidTier):
            acme_engine.discovery.review_system(
                WS, system.system_id, "admin", owner="admin",
                risk_tier=RiskTier.UNCLASSIFIED)

    def test_double_review_not_pending(self, acme_engine):
        system = self._discovered(acme_engine)
        acme_engine.discovery.review_system(WS, system.system_id, "admin",
                                            owner="admin",
                                            risk_tier=RiskTier.LIMITED)
        with pytest.raises(NotPending):
            acme_engine.discovery.review_system(WS, system.system_id, "admin",
                                                owner="admin",
                                                risk_tier=RiskTier.HIGH)
