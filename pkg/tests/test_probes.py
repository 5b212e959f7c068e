"""Probe engine: status derivation, per-provider findings, lifecycle."""

import time

import pytest
from hypothesis import given, strategies as st

from trustos.corpus import TRACE_SENTINEL, acme_fixture, clean_fixture
from trustos.errors import UnknownConnection
from trustos.model import (
    AssertionStatus,
    Finding,
    ProbeKind,
    ProbeOutcomeKind,
    ProviderKind,
    Severity,
)
from trustos.probes import derive_status


def F(sev):
    return Finding(sev, "finding", (), "check")


class TestDeriveStatus:
    def test_iam_two_high_one_medium(self):
        findings = [F(Severity.HIGH), F(Severity.HIGH), F(Severity.MEDIUM)]
        assert derive_status(ProbeKind.IAM_AUDIT, findings) \
            is AssertionStatus.PARTIAL_PASS

    def test_advisory_probe_caps_at_warn(self):
        findings = [F(Severity.HIGH), F(Severity.MEDIUM)]
        assert derive_status(ProbeKind.MODEL_INVENTORY_AUDIT, findings) \
            is AssertionStatus.WARN

    def test_no_findings_pass(self):
        for kind in ProbeKind:
            if kind is ProbeKind.DISCOVERY_CYCLE:
                continue
            assert derive_status(kind, []) is AssertionStatus.PASS

    def test_critical_fails(self):
        assert derive_status(ProbeKind.S3_AUDIT, [F(Severity.CRITICAL)]) \
            is AssertionStatus.FAIL

    def test_medium_only_warns(self):
        assert derive_status(ProbeKind.GITHUB_AUDIT, [F(Severity.MEDIUM)]) \
            is AssertionStatus.WARN

    @given(st.lists(st.sampled_from([Severity.CRITICAL, Severity.HIGH,
                                     Severity.MEDIUM]), max_size=8))
    def test_pure_function_of_multiset(self, severities):
        findings = [F(s) for s in severities]
        a = derive_status(ProbeKind.OKTA_AUDIT, findings)
        b = derive_status(ProbeKind.OKTA_AUDIT, list(reversed(findings)))
        assert a == b
        if Severity.CRITICAL in severities:
            assert a is AssertionStatus.FAIL
        elif Severity.HIGH in severities:
            assert a is AssertionStatus.PARTIAL_PASS
        elif Severity.MEDIUM in severities:
            assert a is AssertionStatus.WARN
        else:
            assert a is AssertionStatus.PASS


def _assertion_for(engine, ws, kind):
    latest = engine.ledger.latest_assertions(ws)
    return next(a for a in latest if a.integration is kind)


class TestAcmeProbeRows:
    WS = "ws_acme_fin_8821"

    def test_iam_partial_pass(self, acme_engine):
        a = _assertion_for(acme_engine, self.WS, ProviderKind.AWS_IAM)
        assert a.status is AssertionStatus.PARTIAL_PASS
        assert a.counts() == (0, 2, 1)
        descriptions = [f.description for f in a.findings]
        assert "3 users without MFA" in descriptions
        assert "2 stale access keys (203d, 127d)" in descriptions
        assert a.metadata_summary["root_mfa"] == "OK"

    def test_s3_fail_with_named_buckets(self, acme_engine):
        a = _assertion_for(acme_engine, self.WS, ProviderKind.AWS_S3)
        assert a.status is AssertionStatus.FAIL
        assert a.counts() == (2, 1, 0)
        text = " | ".join(f.description for f in a.findings)
        assert "acme-dev-scratch" in text
        assert "acme-legacy-export" in text

    def test_okta_fail(self, acme_engine):
        a = _assertion_for(acme_engine, self.WS, ProviderKind.OKTA)
        assert a.status is AssertionStatus.FAIL
        assert a.counts() == (1, 2, 0)
        assert any("91%" in f.description for f in a.findings)

    def test_trace_audit_counts_only(self, acme_engine):
        a = _assertion_for(acme_engine, self.WS, ProviderKind.TRACE_STORE)
        assert a.status is AssertionStatus.FAIL
        assert a.counts() == (1, 1, 1)
        assert a.metadata_summary["pii_email_count"] == 43
        assert a.metadata_summary["unpinned_model_refs"] == ["gpt-4o-latest"]

    def test_bedrock_warn_advisory(self, acme_engine):
        a = _assertion_for(acme_engine, self.WS, ProviderKind.MODEL_INVENTORY)
        assert a.status is AssertionStatus.WARN
        assert a.counts() == (0, 1, 1)
        assert any("acme-custom-classifier-v1" in f.description
                   for f in a.findings)

    def test_credential_methods_recorded(self, acme_engine):
        for a in acme_engine.ledger.latest_assertions(self.WS):
            if a.integration in (ProviderKind.AWS_IAM, ProviderKind.AWS_S3,
                                 ProviderKind.MODEL_INVENTORY):
                assert a.credential_method.value == "STS_AssumeRole_ReadOnly"
            else:
                assert a.credential_method.value == "ScopedApiToken"

    def test_one_probe_run_per_job(self, acme_engine):
        runs = acme_engine.store.scoped_query(self.WS, "probe_runs")
        assert len(runs) == 8
        assert all(r["outcome"] == "Completed" for r in runs)

    def test_expiry_90_days(self, acme_engine):
        from trustos.model import ASSERTION_EXPIRY
        for a in acme_engine.ledger.latest_assertions(self.WS):
            assert a.expires_at - a.executed_at == ASSERTION_EXPIRY


class TestCleanWorkspace:
    WS = "ws_clean_0001"

    def test_stripe_pass_zero_findings(self, clean_engine):
        a = _assertion_for(clean_engine, self.WS, ProviderKind.STRIPE)
        assert a.status is AssertionStatus.PASS
        assert a.findings == []
        assert a.remediation_ref is None

    def test_all_controls_pass(self, clean_engine):
        latest = clean_engine.ledger.latest_assertions(self.WS)
        assert len(latest) == 8
        assert all(a.status is AssertionStatus.PASS for a in latest)


class TestLifecycle:
    def test_enqueue_returns_immediately_with_delay(self, engine, workspace):
        fx = acme_fixture()
        engine.attach_scenario(workspace.workspace_id, fx)
        fleet = engine.probes.fleet_for(workspace.workspace_id)
        fleet.delay_override_ms = 2100
        t0 = time.monotonic()
        jobs = engine.enqueue_scan(workspace.workspace_id)
        ack = time.monotonic() - t0
        assert len(jobs) == 8
        assert ack < 2.0, f"scan acknowledgement took {ack:.2f}s"
        fleet.delay_override_ms = 0
        assert engine.probes.wait_idle(30)

    def test_empty_connection_list(self, engine, workspace):
        engine.attach_scenario(workspace.workspace_id, clean_fixture())
        assert engine.probes.enqueue_scan(workspace.workspace_id, []) == []

    def test_unknown_connection_no_partial_enqueue(self, engine, workspace):
        conns = engine.attach_scenario(workspace.workspace_id, clean_fixture())
        with pytest.raises(UnknownConnection):
            engine.probes.enqueue_scan(
                workspace.workspace_id,
                [conns[0].connection_id, "conn_bogus"])
        engine.probes.wait_idle(5)
        assert engine.ledger.all_assertions(workspace.workspace_id) == []

    def test_provider_failure_retried_then_failed(self, engine, workspace):
        engine.attach_scenario(workspace.workspace_id, clean_fixture())
        fleet = engine.probes.fleet_for(workspace.workspace_id)
        fleet.inject_failures(ProviderKind.GITHUB, 10)  # beyond max retries
        conn = next(c for c in engine.connections(workspace.workspace_id)
                    if c.provider_kind is ProviderKind.GITHUB)
        jobs = engine.probes.enqueue_scan(workspace.workspace_id,
                                          [conn.connection_id])
        assert engine.probes.wait_idle(10)
        status = engine.probes.job_status(jobs[0])
        assert status.state == "failed"
        runs = engine.store.scoped_query(workspace.workspace_id, "probe_runs")
        assert runs[-1]["outcome"] == ProbeOutcomeKind.FAILED.value
        assert engine.ledger.all_assertions(workspace.workspace_id) == []

    def test_transient_failure_recovers_within_retries(self, engine, workspace):
        engine.attach_scenario(workspace.workspace_id, clean_fixture())
        fleet = engine.probes.fleet_for(workspace.workspace_id)
        fleet.inject_failures(ProviderKind.GITHUB, 2)  # third attempt succeeds
        conn = next(c for c in engine.connections(workspace.workspace_id)
                    if c.provider_kind is ProviderKind.GITHUB)
        jobs = engine.probes.enqueue_scan(workspace.workspace_id,
                                          [conn.connection_id])
        assert engine.probes.wait_idle(10)
        assert engine.probes.job_status(jobs[0]).state == "completed"

    def test_rescan_identical_except_ids_and_times(self, engine, workspace):
        engine.attach_scenario(workspace.workspace_id, acme_fixture())
        engine.run_scan(workspace.workspace_id)
        first = {a.integration: a for a in
                 engine.ledger.latest_assertions(workspace.workspace_id)}
        time.sleep(1.1)  # second-resolution timestamps must advance
        engine.run_scan(workspace.workspace_id)
        second = {a.integration: a for a in
                  engine.ledger.latest_assertions(workspace.workspace_id)}
        for kind, a1 in first.items():
            a2 = second[kind]
            assert a2.assertion_id != a1.assertion_id
            assert a2.status == a1.status
            assert [f.to_record() for f in a2.findings] == \
                [f.to_record() for f in a1.findings]
            assert a2.metadata_summary == a1.metadata_summary

    def test_zero_ingress_sentinel(self, acme_engine):
        persisted = acme_engine.store.persisted_text()
        assert TRACE_SENTINEL not in persisted
