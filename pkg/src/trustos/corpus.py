"""Deterministic builder for the shipped scenario fixtures.

The trace corpus for the acme_financial scenario is generated, not asserted:
it plants exactly 43 email patterns, 7 checksum-valid Australian TFNs, 19
phone numbers, and 112 capitalized full-name pairs into the two projects
that log without PII scrubbing, plus the unpinned "gpt-4o-latest" model
reference. Filler text is all lowercase and digit-free so nothing matches by
accident. Generation is stride-based (no RNG), so rebuilding the fixture is
byte-identical.
"""

from __future__ import annotations

import json
from pathlib import Path

from .pii import tfn_checksum_valid
from .scenario import ScenarioFixture, fixture_to_doc, parse_fixture

#: Planted in logged_text so tests can prove trace payloads never ingress.
TRACE_SENTINEL = "ZTRACE-PAYLOAD-SENTINEL-93AD"

ACME_WORKSPACE_ID = "ws_acme_fin_8821"

EMAIL_PLANTS = 43
TFN_PLANTS = 7
PHONE_PLANTS = 19
NAME_PLANTS = 112

_UNSCRUBBED_PROJECTS = ("customer-support-bot", "document-qa")
_SCRUBBED_PROJECTS = ("fraud-triage-agent", "internal-search-rag")

_FILLER = (
    "user asked about card repayment schedules and got a generated summary",
    "retrieval step pulled three knowledge base passages about loan offsets",
    "assistant drafted a response covering dispute resolution timelines",
    "session continued with a clarification about statement cycles",
    "the pipeline summarised a policy document on hardship arrangements",
    "customer wanted the branch opening hours for the city office",
    "agent produced a checklist for closing a joint savings account",
    "query covered foreign transaction fees on the rewards product",
)

_FIRST_NAMES = ("Alice", "Marcus", "Priya", "Wei", "Sofia", "Liam", "Noor",
                "Dmitri", "Amara", "Hugo", "Ines", "Kenji", "Lena", "Omar")
_LAST_NAMES = ("Okafor", "Halloway", "Nguyen", "Silva", "Petrov", "Tanaka",
               "Moreau", "Khan", "Larsen", "Adeyemi", "Rossi", "Farrell")

_EMAIL_LOCALS = ("jane.doe", "sam.archer", "billing.team", "lee.chan",
                 "ops.review", "maria.kim", "dispute.desk")
_EMAIL_DOMAINS = ("examplemail.com", "clientcorp.net", "trialbank.org")


def _valid_tfns(count: int) -> list[str]:
    found, n = [], 310_000_000
    while len(found) < count:
        s = str(n)
        if tfn_checksum_valid(s):
            found.append(s)
            n += 137_927
        else:
            n += 1
    return found


def _phone(i: int) -> str:
    # 11 digits with separators; never 9 digits, so never TFN-shaped.
    return f"+61 2 93{i % 10}{(i * 3) % 10} 4{i % 10}{(i * 7) % 10}{(i + 5) % 10}"


def _email(i: int) -> str:
    local = _EMAIL_LOCALS[i % len(_EMAIL_LOCALS)]
    return f"{local}{i:02d}@{_EMAIL_DOMAINS[i % len(_EMAIL_DOMAINS)]}"


def _name(i: int) -> str:
    return f"{_FIRST_NAMES[i % len(_FIRST_NAMES)]} {_LAST_NAMES[i % len(_LAST_NAMES)]}"


def _plant_texts() -> list[str]:
    """One trace text per planted PII item, each yielding exactly one match."""
    texts = []
    for i in range(EMAIL_PLANTS):
        texts.append(f"customer asked to send the statement to {_email(i)} today")
    for tfn in _valid_tfns(TFN_PLANTS):
        texts.append(f"caller read out the tax file number {tfn} while verifying")
    for i in range(PHONE_PLANTS):
        texts.append(f"please call back on {_phone(i)} after the review completes")
    for i in range(NAME_PLANTS):
        texts.append(f"the account holder {_name(i)} requested a limit increase")
    return texts


def build_acme_traces() -> list[dict]:
    """2,847 trace records across four projects; PII only in the two
    unscrubbed projects."""
    plants = _plant_texts()
    traces = []
    sizes = {"customer-support-bot": 1200, "document-qa": 900,
             "fraud-triage-agent": 400, "internal-search-rag": 347}
    plant_idx = 0
    serial = 0
    for project, size in sizes.items():
        scrubbed = project in _SCRUBBED_PROJECTS
        for i in range(size):
            serial += 1
            if scrubbed:
                model = ("claude-3-sonnet-20240229"
                         if project == "fraud-triage-agent"
                         else "titan-embed-text-v1")
                text = _FILLER[i % len(_FILLER)]
                if i % 97 == 0:
                    text = f"{text} {TRACE_SENTINEL}"
            else:
                model = ("gpt-4o-latest" if project == "customer-support-bot"
                         and i % 2 == 0 else "gpt-4o-2024-08-06")
                # spread plants over every 11th trace until exhausted
                if i % 11 == 0 and plant_idx < len(plants):
                    text = plants[plant_idx]
                    plant_idx += 1
                else:
                    text = _FILLER[i % len(_FILLER)]
                if i % 103 == 0:
                    text = f"{text} {TRACE_SENTINEL}"
            traces.append({
                "trace_id": f"tr_{serial:05d}",
                "source_system_id": project,
                "project": project,
                "tracing_enabled": True,
                "pii_scrubbing_in_logs": scrubbed,
                "evals_configured": scrubbed,
                "model_ref": model,
                "logged_text": text,
            })
    if plant_idx != len(plants):
        raise RuntimeError("trace corpus too small to hold all planted PII")
    return traces


def build_acme_fixture_doc() -> dict:
    """The acme_financial scenario: eight provider blocks in the state that
    reproduces the published evidence-run outcome."""
    users = []
    for i in range(12):
        name = f"acme-user-{i:02d}"
        mfa = i not in (3, 7, 9)          # 3 users without MFA
        keys = []
        if i == 2:
            keys.append({"age_days": 203})
        if i == 5:
            keys.append({"age_days": 127})
        if i == 8:
            keys.append({"age_days": 14})  # fresh key, not stale
        users.append({"name": name, "mfa_enabled": mfa, "access_keys": keys})
    return {
        "scenario_id": "acme_financial",
        "workspace_id": ACME_WORKSPACE_ID,
        "iam": {"users": users, "root_mfa": True, "password_policy_strong": False},
        "s3": [
            {"bucket": "acme-dev-scratch", "public": True, "encrypted": False},
            {"bucket": "acme-legacy-export", "public": False, "encrypted": False},
            {"bucket": "acme-public-assets", "public": True, "encrypted": True},
            {"bucket": "acme-prod-data", "public": False, "encrypted": True},
        ],
        "github": {"branch_protection": True, "signed_commits": False},
        "okta": {"default_policy": {
            "mfa_required": False,
            "session_lifetime_unlimited": True,
            "pct_users_without_mfa": 91,
        }},
        "stripe": {"webhook_signing": True},
        "vercel": {"https_only": True},
        "traces": build_acme_traces(),
        "model_inventory": {
            "region": "ap-southeast-2",
            "foundation_models_available": 31,
            "active_models": [
                {"name": "claude-3-sonnet", "fine_tuned": False},
                {"name": "titan-embed-text", "fine_tuned": False},
                {"name": "llama-3-70b", "fine_tuned": False},
                {"name": "acme-custom-classifier-v1", "fine_tuned": True},
            ],
        },
        "declared_registry": [
            "customer-support-bot", "document-qa", "fraud-triage-agent",
            "internal-search-rag", "claude-3-sonnet", "titan-embed-text",
        ],
        "probe_delay_ms": {},
    }


def build_clean_fixture_doc() -> dict:
    """A workspace where every control passes and nothing is undeclared."""
    traces = []
    for i in range(30):
        project = "support-copilot" if i % 2 == 0 else "doc-summarizer"
        traces.append({
            "trace_id": f"tr_clean_{i:03d}",
            "source_system_id": project,
            "project": project,
            "tracing_enabled": True,
            "pii_scrubbing_in_logs": True,
            "evals_configured": True,
            "model_ref": "gpt-4o-2024-08-06",
            "logged_text": _FILLER[i % len(_FILLER)],
        })
    return {
        "scenario_id": "clean_workspace",
        "workspace_id": "ws_clean_0001",
        "iam": {
            "users": [{"name": f"user-{i}", "mfa_enabled": True,
                       "access_keys": [{"age_days": 10 + i}]}
                      for i in range(4)],
            "root_mfa": True,
            "password_policy_strong": True,
        },
        "s3": [{"bucket": "clean-data", "public": False, "encrypted": True}],
        "github": {"branch_protection": True, "signed_commits": True},
        "okta": {"default_policy": {
            "mfa_required": True,
            "session_lifetime_unlimited": False,
            "pct_users_without_mfa": 0,
        }},
        "stripe": {"webhook_signing": True},
        "vercel": {"https_only": True},
        "traces": traces,
        "model_inventory": {
            "region": "us-east-1",
            "foundation_models_available": 12,
            "active_models": [{"name": "claude-3-sonnet", "fine_tuned": False}],
        },
        "declared_registry": ["support-copilot", "doc-summarizer",
                              "claude-3-sonnet"],
        "probe_delay_ms": {},
    }


def build_fixture_files(out_dir) -> list[Path]:
    """Write acme_financial.json and clean_workspace.json; validates both
    through the normal loader before writing."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, doc in (("acme_financial.json", build_acme_fixture_doc()),
                      ("clean_workspace.json", build_clean_fixture_doc())):
        fixture = parse_fixture(doc)           # round-trip validation
        canonical = fixture_to_doc(fixture)
        path = out / name
        path.write_text(json.dumps(canonical, indent=1, sort_keys=True) + "\n",
                        encoding="utf-8")
        written.append(path)
    return written


def acme_fixture() -> ScenarioFixture:
    return parse_fixture(build_acme_fixture_doc())


def clean_fixture() -> ScenarioFixture:
    return parse_fixture(build_clean_fixture_doc())
