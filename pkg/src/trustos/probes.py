"""Asynchronous probe execution: job queue, worker pool, and the ephemeral
probe lifecycle.

Each dequeued job runs the full lifecycle in order: fetch the encrypted
credential, decrypt inside an ephemeral scope, issue metadata-only provider
queries, derive findings and status, append a watermarked assertion with a
90-day expiry, persist a ProbeRun, and zeroize the credential buffer. On
provider failure the job is retried up to 3 times (100 ms backoff) and no
assertion is written.
"""

from __future__ import annotations

import logging
import os
import queue
import threading
import time
from dataclasses import dataclass, field
from datetime import datetime
from typing import Optional

from .catalog import Catalog
from .checks import ADVISORY_PROBES, CheckEngine
from .errors import AuthFailure, ProviderUnavailable, UnknownConnection
from .ledger import EvidenceLedger, compute_watermark
from .model import (
    ASSERTION_EXPIRY,
    AssertionStatus,
    ControlAssertion,
    Finding,
    PROBE_FOR_PROVIDER,
    ProbeKind,
    ProbeOutcomeKind,
    ProbeRun,
    ProviderConnection,
    ScanTrigger,
    Severity,
    new_id,
    utc_now,
)
from .store import Store
from .vault import CredentialVault

log = logging.getLogger(__name__)

WORKERS_ENV = "TRUSTOS_WORKERS"
MAX_ATTEMPTS = 3
RETRY_BACKOFF_S = 0.1

#: Provider queries each probe kind issues, in order.
QUERIES_FOR_PROBE = {
    ProbeKind.IAM_AUDIT: ("ListUsersMfa",),
    ProbeKind.S3_AUDIT: ("ListBuckets",),
    ProbeKind.GITHUB_AUDIT: ("GetRepoControls",),
    ProbeKind.OKTA_AUDIT: ("GetDefaultPolicy",),
    ProbeKind.STRIPE_AUDIT: ("GetWebhookConfig",),
    ProbeKind.VERCEL_AUDIT: ("GetEdgeConfig",),
    ProbeKind.TRACE_PII_AUDIT: ("ListTraces",),
    ProbeKind.MODEL_INVENTORY_AUDIT: ("ListModels",),
}


@dataclass
class ProbeJob:
    job_id: str
    workspace_id: str
    connection_id: str
    probe_kind: ProbeKind
    enqueued_at: datetime
    trigger: ScanTrigger
    action_item_id: Optional[str] = None  # set for Recheck jobs

    def __post_init__(self):
        if self.trigger is ScanTrigger.RECHECK and not self.action_item_id:
            raise ValueError("Recheck jobs must carry the originating action item")


@dataclass
class ProbeOutcome:
    findings: list[Finding]
    status: AssertionStatus
    metadata_summary: dict = field(default_factory=dict)


@dataclass
class JobStatus:
    job_id: str
    workspace_id: str
    state: str  # queued | running | completed | failed
    probe_kind: ProbeKind
    connection_id: str
    trigger: ScanTrigger
    assertion_id: Optional[str] = None
    error: Optional[str] = None


def derive_status(probe_kind: ProbeKind, findings) -> AssertionStatus:
    """Pure status derivation: any Critical fails the control, any High is a
    partial pass, any Medium warns. Advisory probes cap at WARN."""
    findings = list(findings)
    if not findings:
        return AssertionStatus.PASS
    if probe_kind in ADVISORY_PROBES:
        return AssertionStatus.WARN
    severities = {f.severity for f in findings}
    if Severity.CRITICAL in severities:
        return AssertionStatus.FAIL
    if Severity.HIGH in severities:
        return AssertionStatus.PARTIAL_PASS
    return AssertionStatus.WARN


class ProbeService:
    """Owns the queue and worker pool; executes probe jobs against the
    simulated fleet registered for each workspace."""

    def __init__(self, store: Store, vault: CredentialVault, ledger: EvidenceLedger,
                 catalog: Catalog, checks: Optional[CheckEngine] = None,
                 workers: Optional[int] = None, clock=None,
                 on_assertion=None):
        self._store = store
        self._vault = vault
        self._ledger = ledger
        self._catalog = catalog
        self._checks = checks or CheckEngine()
        self._clock = clock or utc_now
        self._fleets: dict[str, object] = {}
        self._queue: queue.Queue = queue.Queue()
        self._jobs: dict[str, JobStatus] = {}
        self._jobs_lock = threading.Lock()
        self._idle = threading.Event()
        self._idle.set()
        self._pending = 0
        self._on_assertion = on_assertion  # mapping-engine hook
        self._stop = False
        n = workers if workers is not None else int(os.environ.get(WORKERS_ENV, "4"))
        self._threads = [threading.Thread(target=self._worker_loop,
                                          name=f"probe-worker-{i}", daemon=True)
                         for i in range(max(1, n))]
        for t in self._threads:
            t.start()

    # -- fleet wiring -------------------------------------------------------

    def register_fleet(self, workspace_id: str, fleet):
        self._fleets[workspace_id] = fleet

    def fleet_for(self, workspace_id: str):
        return self._fleets[workspace_id]

    # -- enqueue ------------------------------------------------------------

    def _connection(self, workspace_id: str, connection_id: str) -> ProviderConnection:
        rows = self._store.scoped_query(
            workspace_id, "connections",
            lambda r: r["connection_id"] == connection_id)
        if not rows:
            raise UnknownConnection(connection_id)
        return ProviderConnection.from_record(rows[-1])

    def enqueue_scan(self, workspace_id: str, connection_ids,
                     trigger: ScanTrigger = ScanTrigger.SCHEDULED,
                     action_item_id: Optional[str] = None) -> list[str]:
        """Queue one job per connection and return immediately; execution
        proceeds asynchronously. Unknown ids abort with no partial enqueue."""
        self._store.require_workspace(workspace_id)
        connections = [self._connection(workspace_id, cid)
                       for cid in connection_ids]
        jobs = []
        for conn in connections:
            job = ProbeJob(new_id("job"), workspace_id, conn.connection_id,
                           PROBE_FOR_PROVIDER[conn.provider_kind],
                           self._clock(), trigger, action_item_id)
            jobs.append(job)
        with self._jobs_lock:
            self._pending += len(jobs)
            if jobs:
                self._idle.clear()
            for job in jobs:
                self._jobs[job.job_id] = JobStatus(
                    job.job_id, workspace_id, "queued", job.probe_kind,
                    job.connection_id, job.trigger)
        for job in jobs:
            self._queue.put(job)
        if jobs:
            self._store.record_event(workspace_id, "scheduler", "scan_enqueued",
                                     f"jobs:{len(jobs)}")
        return [j.job_id for j in jobs]

    def job_status(self, job_id: str) -> JobStatus:
        with self._jobs_lock:
            return self._jobs[job_id]

    def job_statuses(self, workspace_id: str) -> list[JobStatus]:
        with self._jobs_lock:
            out = [j for j in self._jobs.values()
                   if j.workspace_id == workspace_id]
        return sorted(out, key=lambda s: s.job_id)

    def wait_idle(self, timeout: float = 30.0) -> bool:
        """Block until every queued job has finished."""
        return self._idle.wait(timeout)

    def close(self):
        self._stop = True
        for _ in self._threads:
            self._queue.put(None)

    # -- worker -------------------------------------------------------------

    def _worker_loop(self):
        while not self._stop:
            job = self._queue.get()
            if job is None:
                break
            with self._jobs_lock:
                self._jobs[job.job_id].state = "running"
            try:
                assertion = self.execute_probe(job)
                with self._jobs_lock:
                    st = self._jobs[job.job_id]
                    st.state = "completed"
                    st.assertion_id = assertion.assertion_id
            except Exception as exc:  # noqa: BLE001 - job failure is a state
                log.warning("probe job %s failed: %s", job.job_id, exc)
                with self._jobs_lock:
                    st = self._jobs[job.job_id]
                    st.state = "failed"
                    st.error = type(exc).__name__
            finally:
                with self._jobs_lock:
                    self._pending -= 1
                    if self._pending == 0:
                        self._idle.set()
                self._queue.task_done()

    def _registered_system_names(self, workspace_id: str) -> set[str]:
        return {row["name"] for row in
                self._store.latest_by(workspace_id, "systems",
                                      "system_id").values()}

    def _evaluate(self, job: ProbeJob, fleet, token: str) -> ProbeOutcome:
        control = self._catalog.control_for_integration(
            self._connection(job.workspace_id, job.connection_id).provider_kind)
        refs = self._catalog.framework_refs_for_control(control.control_id)
        kind = control.integration
        meta = {}
        for query in QUERIES_FOR_PROBE[job.probe_kind]:
            meta[query] = fleet.provider_query(kind, token, query)
        checks = self._checks
        if job.probe_kind is ProbeKind.IAM_AUDIT:
            findings, summary = checks.iam_findings(meta["ListUsersMfa"], refs)
        elif job.probe_kind is ProbeKind.S3_AUDIT:
            findings, summary = checks.s3_findings(meta["ListBuckets"], refs)
        elif job.probe_kind is ProbeKind.GITHUB_AUDIT:
            findings, summary = checks.github_findings(meta["GetRepoControls"], refs)
        elif job.probe_kind is ProbeKind.OKTA_AUDIT:
            findings, summary = checks.okta_findings(meta["GetDefaultPolicy"], refs)
        elif job.probe_kind is ProbeKind.STRIPE_AUDIT:
            findings, summary = checks.stripe_findings(meta["GetWebhookConfig"], refs)
        elif job.probe_kind is ProbeKind.VERCEL_AUDIT:
            findings, summary = checks.vercel_findings(meta["GetEdgeConfig"], refs)
        elif job.probe_kind is ProbeKind.TRACE_PII_AUDIT:
            findings, summary, _ = checks.trace_findings(
                meta["ListTraces"]["traces"], refs)
        elif job.probe_kind is ProbeKind.MODEL_INVENTORY_AUDIT:
            findings, summary = checks.inventory_findings(
                meta["ListModels"],
                self._registered_system_names(job.workspace_id), refs)
        else:
            raise ValueError(f"not a provider probe: {job.probe_kind}")
        return ProbeOutcome(findings, derive_status(job.probe_kind, findings),
                            summary)

    def execute_probe(self, job: ProbeJob) -> ControlAssertion:
        started = self._clock()
        t0 = time.monotonic()
        conn = self._connection(job.workspace_id, job.connection_id)
        fleet = self._fleets[job.workspace_id]
        control = self._catalog.control_for_integration(conn.provider_kind)

        def scoped(secret) -> ProbeOutcome:
            token = secret.reveal_text()
            last_exc = None
            for attempt in range(MAX_ATTEMPTS):
                try:
                    return self._evaluate(job, fleet, token)
                except ProviderUnavailable as exc:
                    last_exc = exc
                    if attempt + 1 < MAX_ATTEMPTS:
                        time.sleep(RETRY_BACKOFF_S)
                except AuthFailure:
                    raise
            raise last_exc

        try:
            outcome = self._vault.with_ephemeral(conn.credential_ref, scoped)
        except Exception:
            self._persist_run(job, started, t0, ProbeOutcomeKind.FAILED)
            raise

        executed_at = self._clock()
        assertion_id = new_id("ea")
        assertion = ControlAssertion(
            assertion_id=assertion_id,
            workspace_id=job.workspace_id,
            control_id=control.control_id,
            integration=conn.provider_kind,
            status=outcome.status,
            executed_at=executed_at,
            expires_at=executed_at + ASSERTION_EXPIRY,
            credential_method=conn.credential_method,
            watermark=compute_watermark(assertion_id, outcome.status,
                                        job.workspace_id),
            findings=outcome.findings,
            remediation_ref=self._remediation_ref(outcome),
            metadata_summary=outcome.metadata_summary,
        )
        with self._store.workspace_lock(job.workspace_id):
            self._ledger.append(assertion)
            if self._on_assertion is not None:
                self._on_assertion(assertion, job)
        self._persist_run(job, started, t0, ProbeOutcomeKind.COMPLETED)
        return assertion

    def _remediation_ref(self, outcome: ProbeOutcome) -> Optional[str]:
        if not outcome.findings:
            return None
        order = {Severity.CRITICAL: 0, Severity.HIGH: 1, Severity.MEDIUM: 2}
        worst = min(outcome.findings, key=lambda f: order[f.severity])
        return f"rem_{worst.check_id}"

    def _persist_run(self, job: ProbeJob, started, t0, outcome: ProbeOutcomeKind,
                     systems_discovered: int = 0):
        run = ProbeRun(new_id("run"), job.workspace_id, job.connection_id,
                       job.probe_kind, started,
                       int((time.monotonic() - t0) * 1000), outcome,
                       systems_discovered)
        self._store.append("probe_runs", run.to_record())
