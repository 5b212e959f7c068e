import { describe, expect, it } from "vitest";

import {
  toActionItemCards,
  toCoverageCells,
  toEvidenceRows,
  toPostureCard,
  toRegistryReviewCards,
  toScanStatusRows,
  toTrustCenterPage,
  validateReview,
} from "../src/viewmodels.js";
import type {
  ActionItemRow,
  PostureResponse,
  SystemRow,
} from "../src/types.js";

const POSTURE: PostureResponse = {
  workspace_id: "ws_acme_fin_8821",
  at: "2026-04-06T00:14:32Z",
  score: 61,
  classification: "PartiallyCompliant",
  classification_display: "Partially Compliant",
  counts: { critical: 4, high: 7, medium: 4 },
  projected_score: 84,
  integrations_scanned: 8,
  weights_provenance: "calibrated-reconstruction",
};

describe("posture card", () => {
  it("projects every number straight from the gateway", () => {
    const card = toPostureCard(POSTURE);
    expect(card.score).toBe(61);
    expect(card.label).toBe("Partially Compliant");
    expect(card.severityLine).toBe("4 Critical · 7 High · 4 Medium");
    expect(card.projectedLine).toContain("84/100");
    expect(card.integrations).toBe(8);
  });
});

describe("scan rows", () => {
  it("sorts by job id and marks rechecks", () => {
    const rows = toScanStatusRows([
      {
        job_id: "job_b",
        state: "completed",
        probe_kind: "S3Audit",
        connection_id: "conn_1",
        trigger: "Recheck",
        assertion_id: "ea_x",
      },
      {
        job_id: "job_a",
        state: "queued",
        probe_kind: "IamAudit",
        connection_id: "conn_2",
        trigger: "Manual",
        assertion_id: null,
      },
    ]);
    expect(rows.map((r) => r.jobId)).toEqual(["job_a", "job_b"]);
    expect(rows[1].isRecheck).toBe(true);
  });
});

describe("action item cards", () => {
  const base: Omit<ActionItemRow, "action_item_id" | "severity" | "state"> = {
    control_id: "ctl_aws_s3",
    requirement_id: "soc2_cc6_7",
    owner: "admin",
    remediation_description: "fix it",
    recheck_probe_kind: "S3Audit",
    connection_id: "conn_9",
    opened_at: "2026-04-06T00:14:32Z",
    closed_at: null,
  };

  it("shows open items only, most severe first", () => {
    const cards = toActionItemCards([
      { ...base, action_item_id: "ai_2", severity: "Medium", state: "Open" },
      { ...base, action_item_id: "ai_1", severity: "Critical", state: "Open" },
      { ...base, action_item_id: "ai_0", severity: "Critical", state: "Closed" },
    ]);
    expect(cards.map((c) => c.itemId)).toEqual(["ai_1", "ai_2"]);
  });
});

describe("registry review cards", () => {
  const system: SystemRow = {
    system_id: "sys_1",
    name: "acme-custom-classifier-v1",
    model_type: "FineTuned",
    deployment_env: "production",
    risk_tier: "Unclassified",
    discovery_source: "OBSERVABILITY_AUTO_DISCOVERED",
    review_status: "PENDING_REVIEW",
    owner: null,
  };

  it("queues only pending systems", () => {
    const cards = toRegistryReviewCards([
      system,
      { ...system, system_id: "sys_2", review_status: "ACTIVE" },
    ]);
    expect(cards).toHaveLength(1);
    expect(cards[0].name).toBe("acme-custom-classifier-v1");
  });
});

describe("review validation", () => {
  it("blocks Unclassified", () => {
    expect(validateReview("admin", "Unclassified").ok).toBe(false);
  });
  it("blocks empty tier and empty owner", () => {
    expect(validateReview("admin", "").ok).toBe(false);
    expect(validateReview("  ", "High").ok).toBe(false);
  });
  it("accepts the four real tiers", () => {
    for (const tier of ["Unacceptable", "High", "Limited", "Minimal"]) {
      expect(validateReview("admin", tier).ok).toBe(true);
    }
  });
  it("rejects unknown tiers", () => {
    expect(validateReview("admin", "SuperHigh").ok).toBe(false);
  });
});

describe("coverage cells", () => {
  it("flattens and sorts the three buckets", () => {
    const cells = toCoverageCells({
      catalog_version: "2026.04",
      framework: "SOC2",
      met: ["CC6.6"],
      failed: ["CC6.7", "CC6.1"],
      untested: ["CC8.1"],
    });
    expect(cells.map((c) => `${c.clause}:${c.state}`)).toEqual([
      "CC6.1:failed",
      "CC6.6:met",
      "CC6.7:failed",
      "CC8.1:untested",
    ]);
  });
});

describe("trust center page", () => {
  it("keeps aggregate counts only", () => {
    const page = toTrustCenterPage({
      frameworks: { SOC2: { passed: 2, assessed: 6 } },
      classification: "Partially Compliant",
      generated_at: "2026-04-06T00:14:32Z",
    });
    expect(page.rows).toEqual([{ framework: "SOC2", passed: 2, assessed: 6 }]);
    expect(JSON.stringify(page)).not.toMatch(/acme-|conn_|bucket/);
  });
});

describe("evidence rows", () => {
  it("sorts by integration display name", () => {
    const rows = toEvidenceRows([
      {
        assertion_id: "ea_2",
        control_id: "ctl_vercel",
        integration: "VERCEL",
        integration_display: "Vercel",
        framework_tag: "SOC2 CC6.6",
        status: "PASS",
        executed_at: "",
        expires_at: "",
        watermark: "aaaaaaaa",
        counts: { critical: 0, high: 0, medium: 0 },
      },
      {
        assertion_id: "ea_1",
        control_id: "ctl_aws_s3",
        integration: "AWS_S3",
        integration_display: "AWS S3",
        framework_tag: "SOC2 CC6.7 · EU AI Act Art.10",
        status: "FAIL",
        executed_at: "",
        expires_at: "",
        watermark: "bbbbbbbb",
        counts: { critical: 2, high: 1, medium: 0 },
      },
    ]);
    expect(rows[0].integration).toBe("AWS S3");
    expect(rows[0].countsLine).toBe("2/1/0");
  });
});
