"""Evidence ledger: append-only semantics, supersession, partition totality."""

import random
from datetime import timedelta

import pytest

from trustos.errors import DuplicateAssertionId, InvalidWatermark, UnknownWorkspace
from trustos.ledger import EvidenceLedger, compute_watermark
from trustos.model import (
    ASSERTION_EXPIRY,
    AssertionStatus,
    ControlAssertion,
    CredentialMethod,
    Finding,
    ProviderKind,
    Severity,
    Workspace,
    parse_iso_z,
)
from trustos.store import Store


def make_assertion(workspace_id, assertion_id="ea_7f3a91c",
                   status=AssertionStatus.PARTIAL_PASS,
                   control_id="ctl_aws_iam",
                   integration=ProviderKind.AWS_IAM,
                   executed_at=None):
    executed = executed_at or parse_iso_z("2026-04-06T00:14:32Z")
    return ControlAssertion(
        assertion_id=assertion_id,
        workspace_id=workspace_id,
        control_id=control_id,
        integration=integration,
        status=status,
        executed_at=executed,
        expires_at=executed + ASSERTION_EXPIRY,
        credential_method=CredentialMethod.STS_ASSUME_ROLE_READ_ONLY,
        watermark=compute_watermark(assertion_id, status, workspace_id),
        findings=[Finding(Severity.HIGH, "3 users without MFA",
                          (("SOC2", "CC6.1"),), "iam_users_without_mfa")],
        remediation_ref="rem_iam_users_without_mfa",
    )


@pytest.fixture
def store():
    s = Store(None)
    s.add_workspace(Workspace("ws_acme_fin_8821", "acme", frozenset()))
    return s


@pytest.fixture
def ledger(store):
    return EvidenceLedger(store)


def test_append_and_retrieve_verbatim(store, ledger):
    a = make_assertion("ws_acme_fin_8821")
    ledger.append(a)
    got = ledger.get("ws_acme_fin_8821", "ea_7f3a91c")
    assert got is not None
    assert got.to_record() == a.to_record()
    assert got.status is AssertionStatus.PARTIAL_PASS
    assert got.watermark == compute_watermark("ea_7f3a91c", "PARTIAL_PASS",
                                              "ws_acme_fin_8821")


def test_expiry_is_exactly_90_days(ledger):
    a = make_assertion("ws_acme_fin_8821")
    assert a.executed_at == parse_iso_z("2026-04-06T00:14:32Z")
    assert a.expires_at == parse_iso_z("2026-07-05T00:14:32Z")
    with pytest.raises(ValueError):
        ControlAssertion(
            assertion_id="ea_bad", workspace_id="ws_acme_fin_8821",
            control_id="c", integration=ProviderKind.AWS_IAM,
            status=AssertionStatus.PASS,
            executed_at=a.executed_at,
            expires_at=a.executed_at + timedelta(days=89),
            credential_method=CredentialMethod.SCOPED_API_TOKEN,
            watermark=compute_watermark("ea_bad", "PASS", "ws_acme_fin_8821"))


def test_second_run_supersedes_by_executed_at(store, ledger):
    first = make_assertion("ws_acme_fin_8821")
    ledger.append(first)
    later = make_assertion(
        "ws_acme_fin_8821", assertion_id="ea_newer01",
        status=AssertionStatus.PASS,
        executed_at=first.executed_at + timedelta(hours=6))
    ledger.append(later)
    rows = ledger.all_assertions("ws_acme_fin_8821")
    assert len(rows) == 2, "append-only: both rows exist"
    latest = ledger.latest_assertions("ws_acme_fin_8821")
    assert len(latest) == 1
    assert latest[0].assertion_id == "ea_newer01"


def test_overwrite_in_place_rejected(store, ledger):
    ledger.append(make_assertion("ws_acme_fin_8821"))
    with pytest.raises(DuplicateAssertionId):
        ledger.append(make_assertion("ws_acme_fin_8821"))


def test_unknown_workspace_rejected(ledger):
    with pytest.raises(UnknownWorkspace):
        ledger.append(make_assertion("ws_missing"))


def test_wrong_watermark_rejected(store, ledger):
    a = make_assertion("ws_acme_fin_8821")
    a.watermark = "deadbeef"
    with pytest.raises(InvalidWatermark):
        ledger.append(a)


def test_append_records_activity_event(store, ledger):
    ledger.append(make_assertion("ws_acme_fin_8821"))
    events = store.events("ws_acme_fin_8821")
    assert any(e.verb == "asserted" for e in events)


def test_immutability_read_twice(store, ledger):
    a = make_assertion("ws_acme_fin_8821")
    ledger.append(a)
    first = ledger.get("ws_acme_fin_8821", a.assertion_id).to_record()
    ledger.append(make_assertion("ws_acme_fin_8821", assertion_id="ea_other22",
                                 executed_at=a.executed_at + timedelta(days=1)))
    second = ledger.get("ws_acme_fin_8821", a.assertion_id).to_record()
    assert first == second


def test_watermark_integrity_over_store(store, ledger):
    for i in range(5):
        ledger.append(make_assertion(
            "ws_acme_fin_8821", assertion_id=f"ea_row{i:04d}",
            executed_at=parse_iso_z("2026-04-06T00:14:32Z")
            + timedelta(minutes=i)))
    for a in ledger.all_assertions("ws_acme_fin_8821"):
        assert a.watermark == compute_watermark(a.assertion_id, a.status,
                                                a.workspace_id)


class TestScopedQuery:
    def test_partition_isolation(self, store, ledger):
        store.add_workspace(Workspace("ws_other", "other", frozenset()))
        ledger.append(make_assertion("ws_acme_fin_8821"))
        assert store.scoped_query("ws_other", "assertions") == []

    def test_empty_workspace_empty_list(self, store):
        store.add_workspace(Workspace("ws_fresh", "fresh", frozenset()))
        assert store.scoped_query("ws_fresh", "assertions") == []

    def test_unknown_workspace(self, store):
        with pytest.raises(UnknownWorkspace):
            store.scoped_query("ws_nope", "assertions")

    def test_randomized_two_workspace_isolation(self):
        """Partition totality over randomized populations (seeded)."""
        rng = random.Random(20260406)
        store = Store(None)
        store.add_workspace(Workspace("ws_a", "a", frozenset()))
        store.add_workspace(Workspace("ws_b", "b", frozenset()))
        ledger = EvidenceLedger(store)
        base = parse_iso_z("2026-01-01T00:00:00Z")
        for i in range(500):
            ws = rng.choice(["ws_a", "ws_b"])
            ledger.append(make_assertion(
                ws, assertion_id=f"ea_{i:06x}",
                executed_at=base + timedelta(minutes=i)))
        for ws in ("ws_a", "ws_b"):
            for row in store.scoped_query(ws, "assertions"):
                assert row["workspace_id"] == ws


class TestEvents:
    def test_event_order_stable(self, store):
        ids = [store.record_event("ws_acme_fin_8821", "discovery-agent",
                                  "registered", f"system:sys_{i}")
               for i in range(10)]
        events = store.events("ws_acme_fin_8821")
        subjects = [e.subject for e in events if e.verb == "registered"]
        assert subjects == [f"system:sys_{i}" for i in range(10)]
        seqs = [e.seq for e in events]
        assert seqs == sorted(seqs)
        assert len(ids) == 10

    def test_no_delete_api_exists(self, store):
        for name in dir(store):
            assert "delete" not in name.lower()
            assert "remove" not in name.lower()


def test_store_survives_restart(tmp_path):
    root = tmp_path / "store"
    store = Store(str(root))
    store.add_workspace(Workspace("ws_acme_fin_8821", "acme", frozenset()))
    ledger = EvidenceLedger(store)
    ledger.append(make_assertion("ws_acme_fin_8821"))
    store.record_event("ws_acme_fin_8821", "system", "noted", "x")

    reopened = Store(str(root))
    ledger2 = EvidenceLedger(reopened)
    rows = ledger2.all_assertions("ws_acme_fin_8821")
    assert [a.assertion_id for a in rows] == ["ea_7f3a91c"]
    assert reopened.events("ws_acme_fin_8821")[-1].verb == "noted"
