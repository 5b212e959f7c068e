"""HTTP surface: bearer-token auth, role enforcement, workspace scoping.

Every authenticated route resolves the token to exactly one (workspace,
role) pair and reads through the store's scoped queries. Mutating routes
require a writer role. Trust-center routes are unauthenticated by design and
return aggregate counts only. Scan launches return 202 immediately; probe
execution continues on the worker pool.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, HTTPException, Request, Response
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import errors
from .engine import TrustOs
from .model import (
    CLASSIFICATION_DISPLAY,
    FrameworkId,
    INTEGRATION_DISPLAY,
    Role,
    RiskTier,
    ScanTrigger,
    WRITE_ROLES,
)
from .synthesis import DocType, DocumentRequest

TOKENS_FILE_ENV = "TRUSTOS_TOKENS_FILE"
BIND_ADDR_ENV = "TRUSTOS_BIND_ADDR"


@dataclass(frozen=True)
class Principal:
    user_id: str
    workspace_id: str
    role: Role


def load_tokens(path: str) -> dict[str, Principal]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return {t["token"]: Principal(t["user_id"], t["workspace_id"],
                                  Role(t["role"]))
            for t in doc["tokens"]}


class ScanBody(BaseModel):
    connection_ids: Optional[list[str]] = None


class CloseBody(BaseModel):
    pass


class ReviewBody(BaseModel):
    owner: str
    risk_tier: str


class DocumentBody(BaseModel):
    doc_type: str
    company_name: str


def create_app(engine: TrustOs, tokens: dict[str, Principal],
               dashboard_dist: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="trustos gateway", docs_url=None, redoc_url=None)

    def principal(request: Request) -> Principal:
        header = request.headers.get("authorization", "")
        if not header.startswith("Bearer "):
            raise HTTPException(status_code=401, detail="missing bearer token")
        token = header.removeprefix("Bearer ").strip()
        if token not in tokens:
            raise HTTPException(status_code=401, detail="unknown token")
        return tokens[token]

    def writer(request: Request) -> Principal:
        p = principal(request)
        if p.role not in WRITE_ROLES:
            raise HTTPException(status_code=403,
                                detail=f"role {p.role.value} may not mutate")
        return p

    def translate(exc: Exception) -> HTTPException:
        if isinstance(exc, (errors.UnknownWorkspace, errors.UnknownEntity,
                            errors.UnknownConnection)):
            return HTTPException(status_code=404, detail=str(exc))
        if isinstance(exc, errors.Forbidden):
            return HTTPException(status_code=403, detail=str(exc))
        if isinstance(exc, (errors.InvalidTier, errors.NotPending,
                            errors.AlreadyClosed, errors.NoEvidence,
                            errors.ValidationError, errors.GeneratorFailure,
                            errors.MalformedBundle)):
            return HTTPException(status_code=422,
                                 detail=f"{type(exc).__name__}: {exc}")
        raise exc

    # -- scans -----------------------------------------------------------

    @app.post("/scans", status_code=202)
    def post_scans(body: ScanBody, p: Principal = Depends(writer)):
        try:
            job_ids = engine.enqueue_scan(p.workspace_id, body.connection_ids,
                                          ScanTrigger.MANUAL)
        except Exception as exc:
            raise translate(exc)
        return {"job_ids": job_ids}

    @app.get("/scans")
    def get_scans(p: Principal = Depends(principal)):
        statuses = engine.probes.job_statuses(p.workspace_id)
        return {"jobs": [{
            "job_id": s.job_id,
            "state": s.state,
            "probe_kind": s.probe_kind.value,
            "connection_id": s.connection_id,
            "trigger": s.trigger.value,
            "assertion_id": s.assertion_id,
        } for s in statuses]}

    # -- posture and evidence ----------------------------------------------

    @app.get("/posture")
    def get_posture(p: Principal = Depends(principal)):
        try:
            snap = engine.intelligence.compute_posture(p.workspace_id)
        except errors.NoEvidence:
            raise HTTPException(status_code=422, detail="no evidence yet")
        body = snap.to_record()
        body["classification_display"] = CLASSIFICATION_DISPLAY[snap.classification]
        body["weights_provenance"] = engine.intelligence.config.provenance
        return body

    @app.get("/assertions")
    def get_assertions(p: Principal = Depends(principal)):
        latest = engine.ledger.latest_assertions(p.workspace_id)
        out = []
        for a in latest:
            c, h, m = a.counts()
            record = a.to_record()
            record["integration_display"] = INTEGRATION_DISPLAY[a.integration]
            record["framework_tag"] = \
                engine.catalog.controls[a.control_id].framework_tag
            record["counts"] = {"critical": c, "high": h, "medium": m}
            out.append(record)
        return {"assertions": out}

    # -- action items --------------------------------------------------------

    @app.get("/action-items")
    def get_action_items(p: Principal = Depends(principal)):
        items = engine.mapping.action_items(p.workspace_id)
        return {"action_items": [i.to_record() for i in items]}

    @app.post("/action-items/{item_id}/close")
    def close_item(item_id: str, p: Principal = Depends(writer)):
        try:
            job_id = engine.mapping.close_action_item(p.workspace_id, item_id,
                                                      p.user_id)
        except Exception as exc:
            raise translate(exc)
        return {"closed": item_id, "recheck_job_id": job_id}

    # -- registry ---------------------------------------------------------------

    @app.get("/registry")
    def get_registry(p: Principal = Depends(principal)):
        systems = engine.discovery.systems(p.workspace_id)
        return {"systems": [s.to_record() for s in systems]}

    @app.post("/registry/{system_id}/review")
    def review(system_id: str, body: ReviewBody, p: Principal = Depends(writer)):
        try:
            tier = RiskTier(body.risk_tier)
        except ValueError:
            raise HTTPException(status_code=422,
                                detail=f"unknown risk tier {body.risk_tier!r}")
        try:
            system = engine.discovery.review_system(
                p.workspace_id, system_id, p.user_id, body.owner, tier)
        except Exception as exc:
            raise translate(exc)
        return system.to_record()

    # -- coverage and reports ------------------------------------------------------

    @app.get("/coverage/{framework}")
    def coverage(framework: str, p: Principal = Depends(principal)):
        try:
            fw = FrameworkId(framework)
        except ValueError:
            raise HTTPException(status_code=404,
                                detail=f"unknown framework {framework!r}")
        matrix = engine.mapping.coverage_matrix(p.workspace_id)
        if fw.value not in matrix["frameworks"]:
            raise HTTPException(status_code=404,
                                detail=f"{framework} not active here")
        return {"catalog_version": matrix["catalog_version"],
                "framework": fw.value,
                **matrix["frameworks"][fw.value]}

    @app.get("/reports/executive")
    def executive_report(p: Principal = Depends(principal)):
        try:
            evidence = engine.synthesis.build_evidence_string(
                p.workspace_id, DocType.EXECUTIVE_TRUST_REPORT)
            request = DocumentRequest(p.workspace_id,
                                      DocType.EXECUTIVE_TRUST_REPORT,
                                      "the organization")
            prompt = engine.synthesis.build_prompt(request, evidence)
            markdown = engine.synthesis.template_generator(prompt)
        except Exception as exc:
            raise translate(exc)
        return PlainTextResponse(markdown, media_type="text/markdown")

    @app.post("/documents")
    def post_document(body: DocumentBody, p: Principal = Depends(writer)):
        try:
            doc_type = DocType(body.doc_type)
        except ValueError:
            raise HTTPException(status_code=422,
                                detail=f"unknown doc type {body.doc_type!r}")
        try:
            doc = engine.synthesis.generate_document(
                DocumentRequest(p.workspace_id, doc_type, body.company_name))
        except Exception as exc:
            raise translate(exc)
        return doc.to_record()

    # -- export and trust center -----------------------------------------------------

    @app.get("/export.csv")
    def export_csv(request: Request):
        p = principal(request)
        if p.role not in (Role.FOUNDER, Role.ADMINISTRATOR, Role.AUDITOR):
            raise HTTPException(status_code=403,
                                detail="read-only accounts cannot export")
        csv_text = engine.export.export_auditor_bundle(p.workspace_id)
        return Response(csv_text, media_type="text/csv")

    @app.get("/trust-center/{workspace_id}")
    def trust_center(workspace_id: str):
        try:
            engine.store.require_workspace(workspace_id)
        except errors.UnknownWorkspace:
            raise HTTPException(status_code=404, detail="unknown workspace")
        return engine.export.trust_center(workspace_id).to_json()

    # -- dashboard -------------------------------------------------------------------

    dist = dashboard_dist or str(Path(__file__).resolve().parents[2]
                                 / "frontend" / "dist")
    if Path(dist).is_dir():
        app.mount("/app", StaticFiles(directory=dist, html=True),
                  name="dashboard")

    return app


def app_from_env() -> FastAPI:
    """Build the app from environment configuration (used by `trustos serve`)."""
    store_dir = os.environ.get("TRUSTOS_STORE_DIR", ".trustos")
    engine = TrustOs(store_root=store_dir)
    for ws in engine.store.workspaces():
        try:
            engine.reattach_scenario(ws.workspace_id)
        except errors.UnknownEntity:
            pass
    tokens_file = os.environ.get(TOKENS_FILE_ENV)
    tokens = load_tokens(tokens_file) if tokens_file else {}
    return create_app(engine, tokens)
