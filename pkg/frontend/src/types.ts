// Gateway JSON response shapes. The dashboard projects these directly; it
// never recomputes scores or watermarks client-side.

export interface SeverityCounts {
  critical: number;
  high: number;
  medium: number;
}

export interface PostureResponse {
  workspace_id: string;
  at: string;
  score: number;
  classification: string;
  classification_display: string;
  counts: SeverityCounts;
  projected_score: number;
  integrations_scanned: number;
  weights_provenance: string;
}

export interface AssertionRow {
  assertion_id: string;
  control_id: string;
  integration: string;
  integration_display: string;
  framework_tag: string;
  status: string;
  executed_at: string;
  expires_at: string;
  watermark: string;
  counts: SeverityCounts;
}

export interface JobRow {
  job_id: string;
  state: "queued" | "running" | "completed" | "failed";
  probe_kind: string;
  connection_id: string;
  trigger: string;
  assertion_id: string | null;
}

export interface ActionItemRow {
  action_item_id: string;
  control_id: string;
  requirement_id: string;
  owner: string;
  severity: string;
  remediation_description: string;
  recheck_probe_kind: string;
  connection_id: string;
  state: "Open" | "Closed";
  opened_at: string;
  closed_at: string | null;
}

export interface SystemRow {
  system_id: string;
  name: string;
  model_type: string;
  deployment_env: string;
  risk_tier: string;
  discovery_source: string;
  review_status: "ACTIVE" | "PENDING_REVIEW";
  owner: string | null;
}

export interface CoverageResponse {
  catalog_version: string;
  framework: string;
  met: string[];
  failed: string[];
  untested: string[];
}

export interface TrustCenterResponse {
  frameworks: Record<string, { passed: number; assessed: number }>;
  classification: string;
  generated_at: string;
}

export interface CloseResponse {
  closed: string;
  recheck_job_id: string;
}

export interface ScanResponse {
  job_ids: string[];
}
