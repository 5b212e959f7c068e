"""In-process simulated provider fleet driven by a scenario fixture.

The fleet exposes metadata-only queries: there is no mutation operation in
the interface, fixture state is immutable after load, and every answered
query is appended to a fleet-side access log as read-only. Trace payloads
(logged_text) are returned only by the trace-store queries; no other
provider's response can contain them.
"""

from __future__ import annotations

import threading
import time
from typing import Optional

from .errors import AuthFailure, ProviderUnavailable, UnknownQuery
from .model import ProviderKind
from .scenario import ScenarioFixture, fixture_to_doc


class SimulatedFleet:
    def __init__(self, fixture: ScenarioFixture,
                 tokens: Optional[dict[ProviderKind, str]] = None):
        self._fixture = fixture
        self._tokens = dict(tokens) if tokens else {
            kind: f"SIM-TOKEN-{kind.value}-{fixture.scenario_id}"
            for kind in ProviderKind
        }
        self._lock = threading.Lock()
        self.access_log: list[dict] = []
        self._failures: dict[ProviderKind, int] = {}
        self.delay_override_ms: Optional[int] = None

    @property
    def fixture(self) -> ScenarioFixture:
        return self._fixture

    def token_for(self, provider_kind: ProviderKind) -> str:
        return self._tokens[provider_kind]

    def inject_failures(self, provider_kind: ProviderKind, count: int):
        """Make the next `count` queries against a provider fail."""
        with self._lock:
            self._failures[provider_kind] = count

    def state_snapshot(self) -> dict:
        """Deep snapshot of fleet state, for read-only-surface assertions."""
        return fixture_to_doc(self._fixture)

    def _delay(self, provider_kind: ProviderKind):
        ms = self.delay_override_ms
        if ms is None:
            ms = self._fixture.probe_delay_ms.get(provider_kind.value, 0)
        if ms:
            time.sleep(ms / 1000.0)

    def provider_query(self, provider_kind: ProviderKind, credential_plaintext: str,
                       query_kind: str) -> dict:
        """Answer one metadata query after simulated authentication."""
        if credential_plaintext != self._tokens.get(provider_kind):
            raise AuthFailure(f"{provider_kind.value}: token rejected")
        with self._lock:
            pending = self._failures.get(provider_kind, 0)
            if pending > 0:
                self._failures[provider_kind] = pending - 1
                raise ProviderUnavailable(provider_kind.value)
        self._delay(provider_kind)
        doc = self._answer(provider_kind, query_kind)
        with self._lock:
            self.access_log.append({"provider_kind": provider_kind.value,
                                    "query_kind": query_kind,
                                    "read_only": True})
        return doc

    def _answer(self, provider_kind: ProviderKind, query_kind: str) -> dict:
        fx = self._fixture
        if provider_kind is ProviderKind.AWS_IAM and query_kind == "ListUsersMfa":
            stale = [k.age_days for u in fx.iam.users for k in u.access_keys
                     if k.age_days > 90]
            return {
                "users": [{"name": u.name, "mfa": u.mfa_enabled}
                          for u in fx.iam.users],
                "root_mfa": fx.iam.root_mfa,
                "stale_keys": sorted(stale, reverse=True),
                "password_policy_strong": fx.iam.password_policy_strong,
            }
        if provider_kind is ProviderKind.AWS_S3 and query_kind == "ListBuckets":
            return {"buckets": [{"bucket": b.bucket, "public": b.public,
                                 "encrypted": b.encrypted} for b in fx.s3]}
        if provider_kind is ProviderKind.GITHUB and query_kind == "GetRepoControls":
            return {"branch_protection": fx.github.branch_protection,
                    "signed_commits": fx.github.signed_commits}
        if provider_kind is ProviderKind.OKTA and query_kind == "GetDefaultPolicy":
            return {"mfa_required": fx.okta.mfa_required,
                    "session_lifetime_unlimited": fx.okta.session_lifetime_unlimited,
                    "pct_users_without_mfa": fx.okta.pct_users_without_mfa}
        if provider_kind is ProviderKind.STRIPE and query_kind == "GetWebhookConfig":
            return {"webhook_signing": fx.stripe_webhook_signing}
        if provider_kind is ProviderKind.VERCEL and query_kind == "GetEdgeConfig":
            return {"https_only": fx.vercel_https_only}
        if provider_kind is ProviderKind.TRACE_STORE and query_kind == "ListTraces":
            # Trace payload stays inside the probe boundary; callers persist
            # aggregate counts only.
            return {"traces": list(fx.traces)}
        if provider_kind is ProviderKind.MODEL_INVENTORY and query_kind == "ListModels":
            inv = fx.model_inventory
            fine_tuned = [m.name for m in inv.active_models if m.fine_tuned]
            return {
                "region": inv.region,
                "foundationModelsAvailable": inv.foundation_models_available,
                "activeInWorkspace": len(inv.active_models),
                "fineTunedModelsFound": len(fine_tuned),
                "activeModels": [{"name": m.name, "fine_tuned": m.fine_tuned}
                                 for m in inv.active_models],
            }
        raise UnknownQuery(f"{provider_kind.value}/{query_kind}")
