// Pure projections of gateway responses into view models. Every displayed
// number originates from a gateway field; the UI is never an oracle.

import type {
  ActionItemRow,
  AssertionRow,
  CoverageResponse,
  JobRow,
  PostureResponse,
  SystemRow,
  TrustCenterResponse,
} from "./types.js";

export interface PostureCard {
  score: number;
  outOf: 100;
  label: string;
  severityLine: string;
  projectedLine: string;
  integrations: number;
  provenance: string;
}

export function toPostureCard(posture: PostureResponse): PostureCard {
  const c = posture.counts;
  return {
    score: posture.score,
    outOf: 100,
    label: posture.classification_display,
    severityLine: `${c.critical} Critical · ${c.high} High · ${c.medium} Medium`,
    projectedLine: `Projected ${posture.projected_score}/100 after critical remediation`,
    integrations: posture.integrations_scanned,
    provenance: posture.weights_provenance,
  };
}

export interface ScanStatusRow {
  jobId: string;
  label: string;
  state: JobRow["state"];
  isRecheck: boolean;
}

export function toScanStatusRows(jobs: JobRow[]): ScanStatusRow[] {
  return jobs
    .slice()
    .sort((a, b) => a.job_id.localeCompare(b.job_id))
    .map((j) => ({
      jobId: j.job_id,
      label: `${j.probe_kind} (${j.trigger})`,
      state: j.state,
      isRecheck: j.trigger === "Recheck",
    }));
}

export interface ActionItemCard {
  itemId: string;
  controlId: string;
  requirementId: string;
  severity: string;
  description: string;
  owner: string;
  closable: boolean;
}

export function toActionItemCards(items: ActionItemRow[]): ActionItemCard[] {
  const rank: Record<string, number> = { Critical: 0, High: 1, Medium: 2 };
  return items
    .filter((i) => i.state === "Open")
    .sort(
      (a, b) =>
        (rank[a.severity] ?? 9) - (rank[b.severity] ?? 9) ||
        a.action_item_id.localeCompare(b.action_item_id),
    )
    .map((i) => ({
      itemId: i.action_item_id,
      controlId: i.control_id,
      requirementId: i.requirement_id,
      severity: i.severity,
      description: i.remediation_description,
      owner: i.owner,
      closable: true,
    }));
}

export interface RegistryReviewCard {
  systemId: string;
  name: string;
  modelType: string;
  discoverySource: string;
  pending: boolean;
}

export function toRegistryReviewCards(systems: SystemRow[]): RegistryReviewCard[] {
  return systems
    .filter((s) => s.review_status === "PENDING_REVIEW")
    .sort((a, b) => a.name.localeCompare(b.name))
    .map((s) => ({
      systemId: s.system_id,
      name: s.name,
      modelType: s.model_type,
      discoverySource: s.discovery_source,
      pending: true,
    }));
}

export const SUBMITTABLE_TIERS = [
  "Unacceptable",
  "High",
  "Limited",
  "Minimal",
] as const;

export interface ReviewValidation {
  ok: boolean;
  reason?: string;
}

/** Client-side gate: an Unclassified tier (or no tier) is unsubmittable;
 * the server remains authoritative. */
export function validateReview(owner: string, riskTier: string): ReviewValidation {
  if (!owner.trim()) {
    return { ok: false, reason: "an owner is required" };
  }
  if (!riskTier || riskTier === "Unclassified") {
    return { ok: false, reason: "select a risk tier before submitting" };
  }
  if (!(SUBMITTABLE_TIERS as readonly string[]).includes(riskTier)) {
    return { ok: false, reason: `unknown tier ${riskTier}` };
  }
  return { ok: true };
}

export interface CoverageCell {
  clause: string;
  state: "met" | "failed" | "untested";
}

export function toCoverageCells(coverage: CoverageResponse): CoverageCell[] {
  const cells: CoverageCell[] = [];
  for (const clause of coverage.met) cells.push({ clause, state: "met" });
  for (const clause of coverage.failed) cells.push({ clause, state: "failed" });
  for (const clause of coverage.untested)
    cells.push({ clause, state: "untested" });
  return cells.sort((a, b) => a.clause.localeCompare(b.clause));
}

export interface TrustCenterPage {
  classification: string;
  generatedAt: string;
  rows: { framework: string; passed: number; assessed: number }[];
}

export function toTrustCenterPage(body: TrustCenterResponse): TrustCenterPage {
  return {
    classification: body.classification,
    generatedAt: body.generated_at,
    rows: Object.entries(body.frameworks)
      .map(([framework, counts]) => ({
        framework,
        passed: counts.passed,
        assessed: counts.assessed,
      }))
      .sort((a, b) => a.framework.localeCompare(b.framework)),
  };
}

export interface EvidenceRow {
  assertionId: string;
  integration: string;
  frameworkTag: string;
  status: string;
  countsLine: string;
  watermark: string;
}

export function toEvidenceRows(assertions: AssertionRow[]): EvidenceRow[] {
  return assertions
    .slice()
    .sort((a, b) => a.integration_display.localeCompare(b.integration_display))
    .map((a) => ({
      assertionId: a.assertion_id,
      integration: a.integration_display,
      frameworkTag: a.framework_tag,
      status: a.status,
      countsLine: `${a.counts.critical}/${a.counts.high}/${a.counts.medium}`,
      watermark: a.watermark,
    }));
}
