"""Command-line interface.

Exit codes: 0 success, 1 validation/usage error, 2 tamper detected by
`verify`. State lives under --store (default .trustos or TRUSTOS_STORE_DIR);
the vault key comes from TRUSTOS_VAULT_KEY. `run-scenario` generates a
volatile key when none is configured so a demo run works out of the box.
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import errors
from .engine import TrustOs
from .model import CLASSIFICATION_DISPLAY, INTEGRATION_DISPLAY
from .synthesis import DocType, DocumentRequest
from .vault import VAULT_KEY_ENV, CredentialVault

_DOC_ALIASES = {
    "soc2": DocType.SOC2_SYSTEM_DESCRIPTION,
    "iso42001": DocType.ISO42001_NARRATIVE,
    "euaiact": DocType.EU_AI_ACT_CONFORMITY_SUMMARY,
    "executive": DocType.EXECUTIVE_TRUST_REPORT,
    "policy": DocType.CONTROL_POLICY_DRAFT,
}


def _store_option(fn):
    return click.option(
        "--store", "store_dir",
        default=lambda: os.environ.get("TRUSTOS_STORE_DIR", ".trustos"),
        show_default=".trustos", help="State directory.")(fn)


def _engine(store_dir, allow_volatile_key=False) -> TrustOs:
    key = os.environ.get(VAULT_KEY_ENV, "")
    if not key and allow_volatile_key:
        key = CredentialVault.generate_key_hex()
        click.echo(f"note: {VAULT_KEY_ENV} not set; using a volatile key "
                   "for this run", err=True)
    return TrustOs(store_root=store_dir, vault_key_hex=key or None)


def _posture_line(snapshot) -> str:
    c = snapshot.counts
    label = CLASSIFICATION_DISPLAY[snapshot.classification]
    return (f"Posture {snapshot.score}/100 ({label}) — "
            f"{c['critical']} Critical, {c['high']} High, {c['medium']} Medium")


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
def main():
    """Continuous governance engine over a simulated provider fleet."""


@main.command("run-scenario")
@click.argument("fixture", type=click.Path(exists=False))
@click.option("--workspace", default=None, help="Override the workspace id.")
@_store_option
def run_scenario(fixture, workspace, store_dir):
    """Load FIXTURE, run a full scan, and print the posture summary."""
    engine = _engine(store_dir, allow_volatile_key=True)
    try:
        result = engine.run_scenario(fixture, workspace_id=workspace)
    except (errors.ParseError, errors.ValidationError) as exc:
        _fail(str(exc))
    finally:
        engine.close()
    snapshot = result["posture"]
    click.echo(_posture_line(snapshot))
    for a in sorted(result["assertions"],
                    key=lambda a: INTEGRATION_DISPLAY[a.integration]):
        c, h, m = a.counts()
        tag = engine.catalog.controls[a.control_id].framework_tag
        click.echo(f"  {INTEGRATION_DISPLAY[a.integration]:<12} "
                   f"{a.status.value:<13} {c}/{h}/{m}  {tag}")


@main.command()
@click.option("--workspace", required=True)
@_store_option
def scan(workspace, store_dir):
    """Enqueue and run a full scan on an attached workspace."""
    engine = _engine(store_dir)
    try:
        engine.reattach_scenario(workspace)
        jobs = engine.run_scan(workspace)
        click.echo(f"completed {len(jobs)} probe jobs")
        click.echo(_posture_line(engine.intelligence.compute_posture(workspace)))
    except errors.TrustOsError as exc:
        _fail(str(exc))
    finally:
        engine.close()


@main.command()
@click.option("--workspace", required=True)
@_store_option
def discover(workspace, store_dir):
    """Run one discovery cycle against trace and inventory telemetry."""
    engine = _engine(store_dir)
    try:
        engine.reattach_scenario(workspace)
        report = engine.discovery.discovery_cycle(workspace)
        if report.registry_gaps:
            for gap in report.registry_gaps:
                click.echo(f"registry gap: {gap['name']} ({gap['origin']})")
        else:
            click.echo("no registry gaps found")
    except errors.TrustOsError as exc:
        _fail(str(exc))
    finally:
        engine.close()


@main.command()
@click.option("--workspace", required=True)
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Write the CSV here instead of stdout.")
@_store_option
def export(workspace, output, store_dir):
    """Export the watermarked auditor CSV bundle."""
    engine = _engine(store_dir)
    try:
        csv_text = engine.export.export_auditor_bundle(workspace)
    except errors.TrustOsError as exc:
        _fail(str(exc))
    finally:
        engine.close()
    if output:
        Path(output).write_text(csv_text, encoding="utf-8")
        click.echo(f"wrote {output}")
    else:
        click.echo(csv_text, nl=False)


@main.command()
@click.argument("csv_file", type=click.Path(exists=True))
@click.option("--workspace", required=True)
@_store_option
def verify(csv_file, workspace, store_dir):
    """Verify per-row watermarks of an exported bundle. Exit 2 on tampering."""
    engine = _engine(store_dir)
    try:
        verdicts = engine.export.verify_bundle(
            Path(csv_file).read_text(encoding="utf-8"), workspace)
    except errors.MalformedBundle as exc:
        _fail(str(exc))
    finally:
        engine.close()
    tampered = [v.assertion_id for v in verdicts if not v.ok]
    if tampered:
        click.echo(f"TAMPERED rows: {', '.join(tampered)}")
        sys.exit(2)
    click.echo(f"ok: {len(verdicts)} rows verified")


@main.group()
def report():
    """Assembled reports."""


@report.command("executive")
@click.option("--workspace", required=True)
@_store_option
def report_executive(workspace, store_dir):
    """Print the executive trust report as markdown."""
    engine = _engine(store_dir)
    try:
        evidence = engine.synthesis.build_evidence_string(
            workspace, DocType.EXECUTIVE_TRUST_REPORT)
        request = DocumentRequest(workspace, DocType.EXECUTIVE_TRUST_REPORT,
                                  "the organization")
        prompt = engine.synthesis.build_prompt(request, evidence)
        click.echo(engine.synthesis.template_generator(prompt))
    except errors.TrustOsError as exc:
        _fail(str(exc))
    finally:
        engine.close()


@main.command()
@click.argument("doc_type", type=click.Choice(sorted(_DOC_ALIASES)))
@click.option("--workspace", required=True)
@click.option("--company", default="the organization")
@click.option("-o", "--output", type=click.Path(), default=None,
              help="Also export the markdown to this .md file.")
@_store_option
def doc(doc_type, workspace, company, output, store_dir):
    """Generate and persist a compliance document."""
    engine = _engine(store_dir)
    try:
        document = engine.synthesis.generate_document(
            DocumentRequest(workspace, _DOC_ALIASES[doc_type], company))
    except errors.TrustOsError as exc:
        _fail(str(exc))
    finally:
        engine.close()
    if output:
        Path(output).write_text(document.content + "\n", encoding="utf-8")
        click.echo(f"wrote {output} (version {document.version})")
    else:
        click.echo(f"# version {document.version}")
        click.echo(document.content)


@main.command()
@click.option("--bind", default=lambda: os.environ.get("TRUSTOS_BIND_ADDR",
                                                       "127.0.0.1:8787"),
              help="host:port to listen on.")
@_store_option
def serve(bind, store_dir):
    """Serve the HTTP gateway (and the dashboard under /app)."""
    import uvicorn

    os.environ.setdefault("TRUSTOS_STORE_DIR", store_dir)
    from .gateway import app_from_env
    host, _, port = bind.partition(":")
    uvicorn.run(app_from_env(), host=host or "127.0.0.1",
                port=int(port or "8787"), log_level="warning")


@main.command("build-fixtures")
@click.option("-o", "--out", "out_dir", default="fixtures", show_default=True)
def build_fixtures(out_dir):
    """Regenerate the shipped scenario fixture files."""
    from .corpus import build_fixture_files
    for path in build_fixture_files(out_dir):
        click.echo(f"wrote {path}")


if __name__ == "__main__":
    main()
