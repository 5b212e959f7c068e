"""Per-provider probe checks: metadata documents in, findings out.

Severity comes from the shipped severity matrix (an inspectable JSON file);
descriptions carry structural metadata only, never payload text. Evaluators
are pure so a re-run over unchanged metadata yields identical findings.
"""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path
from typing import Optional

from .model import Finding, ProbeKind, Severity
from .pii import PiiCounts, run_pii_heuristics


def load_severity_matrix(path: Optional[str] = None) -> dict[str, Severity]:
    if path is not None:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    else:
        doc = json.loads(resources.files("trustos.data")
                         .joinpath("severity_matrix.json")
                         .read_text(encoding="utf-8"))
    return {check: Severity(sev) for check, sev in doc["checks"].items()}


class CheckEngine:
    def __init__(self, severity_matrix: Optional[dict[str, Severity]] = None):
        self._matrix = severity_matrix or load_severity_matrix()

    def _finding(self, check_id: str, description: str, framework_refs) -> Finding:
        if check_id not in self._matrix:
            raise KeyError(f"check {check_id!r} missing from severity matrix")
        return Finding(self._matrix[check_id], description,
                       tuple(framework_refs), check_id)

    # -- evaluators, one per probe kind -----------------------------------

    def iam_findings(self, meta: dict, refs) -> tuple[list[Finding], dict]:
        findings = []
        no_mfa = [u["name"] for u in meta["users"] if not u["mfa"]]
        if not meta["root_mfa"]:
            findings.append(self._finding(
                "iam_root_mfa_missing", "Root account has no MFA device", refs))
        if no_mfa:
            findings.append(self._finding(
                "iam_users_without_mfa",
                f"{len(no_mfa)} users without MFA", refs))
        stale = meta["stale_keys"]
        if stale:
            ages = ", ".join(f"{d}d" for d in stale)
            findings.append(self._finding(
                "iam_stale_access_keys",
                f"{len(stale)} stale access keys ({ages})", refs))
        if not meta["password_policy_strong"]:
            findings.append(self._finding(
                "iam_password_policy_weak",
                "Account password policy below baseline", refs))
        summary = {
            "users_total": len(meta["users"]),
            "users_without_mfa": len(no_mfa),
            "stale_access_keys": len(stale),
            "root_mfa": "OK" if meta["root_mfa"] else "MISSING",
        }
        return findings, summary

    def s3_findings(self, meta: dict, refs) -> tuple[list[Finding], dict]:
        findings = []
        for b in meta["buckets"]:
            name, public, encrypted = b["bucket"], b["public"], b["encrypted"]
            if public and not encrypted:
                findings.append(self._finding(
                    "s3_public_unencrypted_bucket",
                    f"Publicly accessible, unencrypted S3 bucket ({name})", refs))
            elif not encrypted:
                findings.append(self._finding(
                    "s3_unencrypted_bucket",
                    f"Unencrypted S3 bucket ({name})", refs))
            elif public:
                findings.append(self._finding(
                    "s3_public_encrypted_bucket",
                    f"Publicly accessible S3 bucket with encryption at rest ({name})",
                    refs))
        summary = {"buckets_total": len(meta["buckets"]),
                   "buckets_public": sum(1 for b in meta["buckets"] if b["public"]),
                   "buckets_unencrypted": sum(1 for b in meta["buckets"]
                                              if not b["encrypted"])}
        return findings, summary

    def github_findings(self, meta: dict, refs) -> tuple[list[Finding], dict]:
        findings = []
        if not meta["branch_protection"]:
            findings.append(self._finding(
                "github_branch_protection_missing",
                "No branch protection on the default branch", refs))
        if not meta["signed_commits"]:
            findings.append(self._finding(
                "github_unsigned_commits",
                "Commit signing not enforced", refs))
        return findings, {"branch_protection": meta["branch_protection"],
                          "signed_commits": meta["signed_commits"]}

    def okta_findings(self, meta: dict, refs) -> tuple[list[Finding], dict]:
        findings = []
        if not meta["mfa_required"]:
            findings.append(self._finding(
                "okta_default_policy_no_mfa",
                "Default sign-on policy permits access without MFA", refs))
        if meta["session_lifetime_unlimited"]:
            findings.append(self._finding(
                "okta_unlimited_session_lifetime",
                "Default sign-on policy allows unlimited session lifetimes", refs))
        pct = meta["pct_users_without_mfa"]
        if pct > 0:
            findings.append(self._finding(
                "okta_mfa_coverage_gap",
                f"{pct}% of the user population lacks MFA enrollment", refs))
        return findings, {"pct_users_without_mfa": pct}

    def stripe_findings(self, meta: dict, refs) -> tuple[list[Finding], dict]:
        findings = []
        if not meta["webhook_signing"]:
            findings.append(self._finding(
                "stripe_webhook_signing_disabled",
                "Webhook signature verification disabled", refs))
        return findings, {"webhook_signing": meta["webhook_signing"]}

    def vercel_findings(self, meta: dict, refs) -> tuple[list[Finding], dict]:
        findings = []
        if not meta["https_only"]:
            findings.append(self._finding(
                "vercel_https_not_enforced",
                "HTTPS-only transport not enforced at the edge", refs))
        return findings, {"https_only": meta["https_only"]}

    def trace_findings(self, traces, refs) -> tuple[list[Finding], dict, PiiCounts]:
        """Runs the PII heuristics over traces from unscrubbed projects.
        Only aggregate counts leave this function."""
        unscrubbed = [t for t in traces if not t.pii_scrubbing_in_logs]
        counts = run_pii_heuristics(unscrubbed)
        findings = []
        total = sum(counts.as_tuple())
        if total > 0:
            projects = sorted({t.project for t in unscrubbed})
            findings.append(self._finding(
                "trace_pii_leak",
                (f"PII leaking unredacted into trace logs: {counts.email_count} "
                 f"emails, {counts.tfn_count} TFNs, {counts.phone_count} phone "
                 f"numbers, {counts.name_count} full names across "
                 f"{len(projects)} projects"), refs))
        projects_without_evals = sorted({t.project for t in traces
                                         if not t.evals_configured})
        if projects_without_evals:
            findings.append(self._finding(
                "trace_evals_unconfigured",
                f"Evaluations not configured for {len(projects_without_evals)} "
                f"traced projects", refs))
        for ref in counts.unpinned_model_refs:
            findings.append(self._finding(
                "trace_unpinned_model_ref",
                f"Unpinned floating model reference: {ref}", refs))
        summary = {
            "traces_scanned": len(traces),
            "pii_email_count": counts.email_count,
            "pii_tfn_count": counts.tfn_count,
            "pii_phone_count": counts.phone_count,
            "pii_name_count": counts.name_count,
            "unpinned_model_refs": list(counts.unpinned_model_refs),
        }
        return findings, summary, counts

    def inventory_findings(self, meta: dict, registered_names,
                           refs) -> tuple[list[Finding], dict]:
        registered = set(registered_names)
        undeclared_ft = [m["name"] for m in meta["activeModels"]
                         if m["fine_tuned"] and m["name"] not in registered]
        undeclared_fm = [m["name"] for m in meta["activeModels"]
                         if not m["fine_tuned"] and m["name"] not in registered]
        findings = []
        for name in undeclared_ft:
            findings.append(self._finding(
                "inventory_undeclared_finetuned_model",
                f"Fine-tuned model {name} active but not declared in the "
                f"AI registry", refs))
        if undeclared_fm:
            findings.append(self._finding(
                "inventory_undeclared_foundation_model",
                f"{len(undeclared_fm)} foundation models active without "
                f"registry declaration", refs))
        summary = {
            "region": meta["region"],
            "foundationModelsAvailable": meta["foundationModelsAvailable"],
            "activeInWorkspace": meta["activeInWorkspace"],
            "fineTunedModelsFound": meta["fineTunedModelsFound"],
        }
        return findings, summary


#: Probe kinds whose findings are advisory: status is capped at WARN.
ADVISORY_PROBES = frozenset({ProbeKind.MODEL_INVENTORY_AUDIT})
