import { describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { registryReviewFlow, remediationFlow } from "../src/flows.js";
import { MockGateway } from "./mock_gateway.js";

const instantSleep = async () => undefined;

function clientFor(mock: MockGateway): GatewayClient {
  return new GatewayClient("http://mock", "tok-admin", mock.fetch);
}

describe("remediation flow", () => {
  it("closes the item, tracks exactly one recheck job, and surfaces the "
    + "gateway-computed posture", async () => {
    const mock = new MockGateway();
    const client = clientFor(mock);
    const result = await remediationFlow(client, "ai_s3_1", {
      sleep: instantSleep,
    });
    expect(result.state).toBe("posture-updated");
    expect(mock.closeCalls).toEqual(["ai_s3_1"]);
    expect(mock.jobs).toHaveLength(1); // exactly one spawned recheck
    expect(mock.jobs[0].trigger).toBe("Recheck");
    expect(mock.jobs[0].connection_id).toBe("conn_s3");
    expect(result.recheckJobId).toBe(mock.jobs[0].job_id);
    expect(result.newScore).toBe(75); // from the gateway, not recomputed
    expect(result.polls).toBeGreaterThan(1); // waited for completion
  });

  it("shows forbidden inline for non-writer roles without state changes",
    async () => {
      const mock = new MockGateway();
      mock.forbidden = true;
      const result = await remediationFlow(clientFor(mock), "ai_s3_1", {
        sleep: instantSleep,
      });
      expect(result.state).toBe("forbidden");
      expect(mock.jobs).toHaveLength(0);
      expect(mock.openItems[0].state).toBe("Open"); // no optimistic close
    });

  it("keeps a retryable error state when the gateway is unreachable",
    async () => {
      const offline = new GatewayClient("http://mock", "tok", async () => {
        throw new Error("connection refused");
      });
      const result = await remediationFlow(offline, "ai_s3_1", {
        sleep: instantSleep,
      });
      expect(result.state).toBe("error");
      expect(result.notice).toContain("connection refused");
    });

  it("reports a failed recheck distinctly", async () => {
    const mock = new MockGateway();
    mock.recheckShouldFail = true;
    const result = await remediationFlow(clientFor(mock), "ai_s3_1", {
      sleep: instantSleep,
    });
    expect(result.state).toBe("recheck-failed");
  });

  it("404s on an already-closed item surface as errors", async () => {
    const mock = new MockGateway();
    const client = clientFor(mock);
    await remediationFlow(client, "ai_s3_1", { sleep: instantSleep });
    const again = await remediationFlow(client, "ai_s3_1", {
      sleep: instantSleep,
    });
    expect(again.state).toBe("error");
  });
});

describe("registry review flow", () => {
  it("blocks Unclassified client-side; nothing reaches the wire", async () => {
    const mock = new MockGateway();
    const result = await registryReviewFlow(
      clientFor(mock),
      "sys_disc1",
      "admin",
      "Unclassified",
    );
    expect(result.state).toBe("blocked");
    expect(mock.reviewCalls).toHaveLength(0);
  });

  it("reviews a pending system; the card leaves the queue", async () => {
    const mock = new MockGateway();
    const result = await registryReviewFlow(
      clientFor(mock),
      "sys_disc1",
      "admin",
      "High",
    );
    expect(result.state).toBe("reviewed");
    expect(mock.pending).toHaveLength(0); // server state is authoritative
  });

  it("second concurrent review sees the server's not-pending notice",
    async () => {
      const mock = new MockGateway();
      const client = clientFor(mock);
      await registryReviewFlow(client, "sys_disc1", "admin", "High");
      mock.pending = [
        {
          system_id: "sys_disc1",
          name: "acme-custom-classifier-v1",
          model_type: "FineTuned",
          deployment_env: "production",
          risk_tier: "High",
          discovery_source: "OBSERVABILITY_AUTO_DISCOVERED",
          review_status: "PENDING_REVIEW",
          owner: null,
        },
      ]; // simulate a second admin's stale view
      const second = await registryReviewFlow(
        client,
        "sys_disc1",
        "other-admin",
        "Limited",
      );
      expect(second.state).toBe("not-pending");
    });

  it("forbidden for auditor tokens", async () => {
    const mock = new MockGateway();
    mock.forbidden = true;
    const result = await registryReviewFlow(
      clientFor(mock),
      "sys_disc1",
      "audrey",
      "High",
    );
    expect(result.state).toBe("forbidden");
  });
});
