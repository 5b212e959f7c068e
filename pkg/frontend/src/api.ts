// Thin typed client over the documented gateway routes. fetch is injectable
// so tests can stub the wire; nothing outside these routes is ever called.

import type {
  ActionItemRow,
  AssertionRow,
  CloseResponse,
  CoverageResponse,
  JobRow,
  PostureResponse,
  ScanResponse,
  SystemRow,
  TrustCenterResponse,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown>; text(): Promise<string> }>;

export class GatewayError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`gateway ${status}: ${detail}`);
  }
}

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    private readonly fetchImpl: FetchLike,
  ) {}

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.token}`,
    };
    let payload: string | undefined;
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      payload = JSON.stringify(body);
    }
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers,
      body: payload,
    });
    if (response.status === 401 || response.status === 403) {
      throw new GatewayError(response.status, "forbidden");
    }
    if (response.status >= 400) {
      let detail = "";
      try {
        const parsed = (await response.json()) as { detail?: string };
        detail = parsed.detail ?? "";
      } catch {
        detail = "request failed";
      }
      throw new GatewayError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  getPosture(): Promise<PostureResponse> {
    return this.request("GET", "/posture");
  }

  getAssertions(): Promise<{ assertions: AssertionRow[] }> {
    return this.request("GET", "/assertions");
  }

  getActionItems(): Promise<{ action_items: ActionItemRow[] }> {
    return this.request("GET", "/action-items");
  }

  closeActionItem(itemId: string): Promise<CloseResponse> {
    return this.request("POST", `/action-items/${itemId}/close`);
  }

  getScans(): Promise<{ jobs: JobRow[] }> {
    return this.request("GET", "/scans");
  }

  launchScan(): Promise<ScanResponse> {
    return this.request("POST", "/scans", {});
  }

  getRegistry(): Promise<{ systems: SystemRow[] }> {
    return this.request("GET", "/registry");
  }

  reviewSystem(
    systemId: string,
    owner: string,
    riskTier: string,
  ): Promise<SystemRow> {
    return this.request("POST", `/registry/${systemId}/review`, {
      owner,
      risk_tier: riskTier,
    });
  }

  getCoverage(framework: string): Promise<CoverageResponse> {
    return this.request("GET", `/coverage/${framework}`);
  }

  /** Unauthenticated by design: the public trust-center surface. */
  async getTrustCenter(workspaceId: string): Promise<TrustCenterResponse> {
    const response = await this.fetchImpl(
      `${this.baseUrl}/trust-center/${workspaceId}`,
    );
    if (response.status >= 400) {
      throw new GatewayError(response.status, "trust center unavailable");
    }
    return (await response.json()) as TrustCenterResponse;
  }
}
