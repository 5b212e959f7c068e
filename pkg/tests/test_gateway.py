"""HTTP surface: auth, role matrix, scoping, async acknowledgement."""

import time

import pytest
from fastapi.testclient import TestClient

from trustos.corpus import build_acme_fixture_doc
from trustos.gateway import Principal, create_app
from trustos.model import Role
from trustos.scenario import parse_fixture

WS = "ws_acme_fin_8821"

TOKENS = {
    "tok-admin": Principal("admin", WS, Role.ADMINISTRATOR),
    "tok-founder": Principal("founder", WS, Role.FOUNDER),
    "tok-auditor": Principal("audrey", WS, Role.AUDITOR),
    "tok-viewer": Principal("vera", WS, Role.READ_ONLY),
}


def auth(token):
    return {"Authorization": f"Bearer {token}"}


@pytest.fixture
def client(acme_engine):
    acme_engine.add_user(WS, "audrey", Role.AUDITOR)
    acme_engine.add_user(WS, "vera", Role.READ_ONLY)
    app = create_app(acme_engine, TOKENS)
    with TestClient(app) as c:
        c.engine = acme_engine
        yield c


class TestAuth:
    def test_missing_token_401(self, client):
        assert client.get("/posture").status_code == 401

    def test_unknown_token_401(self, client):
        assert client.get("/posture", headers=auth("nope")).status_code == 401

    def test_trust_center_requires_no_token(self, client):
        r = client.get(f"/trust-center/{WS}")
        assert r.status_code == 200

    @pytest.mark.parametrize("token", ["tok-auditor", "tok-viewer"])
    @pytest.mark.parametrize("method,route,body", [
        ("POST", "/scans", {}),
        ("POST", "/action-items/ai_x/close", {}),
        ("POST", "/registry/sys_x/review", {"owner": "a", "risk_tier": "High"}),
        ("POST", "/documents", {"doc_type": "ControlPolicyDraft",
                                "company_name": "Acme"}),
    ])
    def test_authorization_matrix(self, client, token, method, route, body):
        """Every mutating route is 403 for Auditor and ReadOnly."""
        r = client.request(method, route, json=body, headers=auth(token))
        assert r.status_code == 403

    def test_readonly_cannot_export(self, client):
        assert client.get("/export.csv",
                          headers=auth("tok-viewer")).status_code == 403

    def test_auditor_can_export(self, client):
        r = client.get("/export.csv", headers=auth("tok-auditor"))
        assert r.status_code == 200
        assert r.text.startswith("ASSERTION_ID, CONTROL")


class TestRoutes:
    def test_posture(self, client):
        r = client.get("/posture", headers=auth("tok-admin"))
        assert r.status_code == 200
        body = r.json()
        assert body["score"] == 61
        assert body["classification_display"] == "Partially Compliant"
        assert body["counts"] == {"critical": 4, "high": 7, "medium": 4}
        assert body["weights_provenance"] == "calibrated-reconstruction"

    def test_assertions(self, client):
        r = client.get("/assertions", headers=auth("tok-admin"))
        rows = r.json()["assertions"]
        assert len(rows) == 8
        s3 = next(x for x in rows if x["integration"] == "AWS_S3")
        assert s3["status"] == "FAIL"
        assert s3["counts"] == {"critical": 2, "high": 1, "medium": 0}

    def test_scan_returns_202_with_job_ids(self, client):
        r = client.post("/scans", json={}, headers=auth("tok-admin"))
        assert r.status_code == 202
        assert len(r.json()["job_ids"]) == 8
        client.engine.probes.wait_idle(20)

    def test_scan_ack_faster_than_probes(self, client):
        fleet = client.engine.probes.fleet_for(WS)
        fleet.delay_override_ms = 2100
        t0 = time.monotonic()
        r = client.post("/scans", json={}, headers=auth("tok-admin"))
        ack = time.monotonic() - t0
        assert r.status_code == 202
        assert ack < 2.0
        fleet.delay_override_ms = 0
        assert client.engine.probes.wait_idle(60)

    def test_job_status_listing(self, client):
        r = client.post("/scans", json={}, headers=auth("tok-admin"))
        client.engine.probes.wait_idle(20)
        listed = client.get("/scans", headers=auth("tok-admin")).json()["jobs"]
        ids = {j["job_id"] for j in listed}
        assert set(r.json()["job_ids"]) <= ids

    def test_action_item_close_flow(self, client):
        doc = build_acme_fixture_doc()
        for b in doc["s3"]:
            b.update(public=False, encrypted=True)
        client.engine.replace_fleet_fixture(WS, parse_fixture(doc))
        items = client.get("/action-items",
                           headers=auth("tok-admin")).json()["action_items"]
        s3_item = next(i for i in items if i["control_id"] == "ctl_aws_s3"
                       and i["state"] == "Open")
        r = client.post(f"/action-items/{s3_item['action_item_id']}/close",
                        headers=auth("tok-admin"))
        assert r.status_code == 200
        assert r.json()["recheck_job_id"]
        client.engine.probes.wait_idle(20)
        posture = client.get("/posture", headers=auth("tok-admin")).json()
        assert posture["score"] > 61

    def test_close_unknown_item_404(self, client):
        r = client.post("/action-items/ai_missing/close",
                        headers=auth("tok-admin"))
        assert r.status_code == 404

    def test_registry_review_flow(self, client):
        client.engine.discovery.discovery_cycle(WS)
        systems = client.get("/registry",
                             headers=auth("tok-admin")).json()["systems"]
        pending = next(s for s in systems
                       if s["review_status"] == "PENDING_REVIEW")
        r = client.post(f"/registry/{pending['system_id']}/review",
                        json={"owner": "admin", "risk_tier": "High"},
                        headers=auth("tok-admin"))
        assert r.status_code == 200
        assert r.json()["review_status"] == "ACTIVE"

    def test_review_unclassified_rejected(self, client):
        client.engine.discovery.discovery_cycle(WS)
        systems = client.get("/registry",
                             headers=auth("tok-admin")).json()["systems"]
        pending = next(s for s in systems
                       if s["review_status"] == "PENDING_REVIEW")
        r = client.post(f"/registry/{pending['system_id']}/review",
                        json={"owner": "admin", "risk_tier": "Unclassified"},
                        headers=auth("tok-admin"))
        assert r.status_code == 422

    def test_review_unknown_system_404(self, client):
        r = client.post("/registry/sys_missing/review",
                        json={"owner": "a", "risk_tier": "High"},
                        headers=auth("tok-admin"))
        assert r.status_code == 404

    def test_coverage_route(self, client):
        r = client.get("/coverage/SOC2", headers=auth("tok-admin"))
        body = r.json()
        assert "CC6.7" in body["failed"]
        assert "A1.2" in body["met"]
        assert body["catalog_version"]

    def test_coverage_unknown_framework_404(self, client):
        assert client.get("/coverage/NIST",
                          headers=auth("tok-admin")).status_code == 404

    def test_executive_report_route(self, client):
        r = client.get("/reports/executive", headers=auth("tok-admin"))
        assert r.status_code == 200
        assert "Top Risk Areas" in r.text

    def test_documents_route(self, client):
        r = client.post("/documents",
                        json={"doc_type": "Soc2SystemDescription",
                              "company_name": "Acme Financial Services"},
                        headers=auth("tok-admin"))
        assert r.status_code == 200
        assert r.json()["version"] == 1

    def test_trust_center_body(self, client):
        body = client.get(f"/trust-center/{WS}").json()
        assert body["frameworks"]["SOC2"] == {"passed": 2, "assessed": 6}
        text = str(body)
        assert "acme-dev-scratch" not in text

    def test_trust_center_unknown_workspace(self, client):
        assert client.get("/trust-center/ws_nope").status_code == 404

    def test_export_determinism(self, client):
        a = client.get("/export.csv", headers=auth("tok-admin")).text
        b = client.get("/export.csv", headers=auth("tok-admin")).text
        assert a == b
