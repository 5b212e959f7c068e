// UI state machines for the two interactive loops. No optimistic updates:
// every transition is driven by a gateway response, and errors surface as
// inline notices while the previous state stays visible.

import { GatewayClient, GatewayError } from "./api.js";
import { validateReview } from "./viewmodels.js";

export type Sleep = (ms: number) => Promise<void>;

export const realSleep: Sleep = (ms) =>
  new Promise((resolve) => setTimeout(resolve, ms));

export const POLL_INTERVAL_MS = 2000;

export interface RemediationResult {
  state: "posture-updated" | "recheck-failed" | "forbidden" | "error";
  recheckJobId?: string;
  newScore?: number;
  notice?: string;
  polls: number;
}

/** Close an action item, watch the spawned recheck job, and refresh the
 * posture once the new assertion lands. */
export async function remediationFlow(
  client: GatewayClient,
  itemId: string,
  opts: { sleep?: Sleep; maxPolls?: number } = {},
): Promise<RemediationResult> {
  const sleep = opts.sleep ?? realSleep;
  const maxPolls = opts.maxPolls ?? 60;
  let recheckJobId: string;
  try {
    const closed = await client.closeActionItem(itemId);
    recheckJobId = closed.recheck_job_id;
  } catch (err) {
    if (err instanceof GatewayError && err.status === 403) {
      return { state: "forbidden", notice: "forbidden", polls: 0 };
    }
    return {
      state: "error",
      notice: err instanceof Error ? err.message : String(err),
      polls: 0,
    };
  }
  let polls = 0;
  while (polls < maxPolls) {
    polls += 1;
    const { jobs } = await client.getScans();
    const job = jobs.find((j) => j.job_id === recheckJobId);
    if (job && job.state === "completed") {
      const posture = await client.getPosture();
      return {
        state: "posture-updated",
        recheckJobId,
        newScore: posture.score,
        polls,
      };
    }
    if (job && job.state === "failed") {
      return {
        state: "recheck-failed",
        recheckJobId,
        notice: "recheck probe failed",
        polls,
      };
    }
    await sleep(POLL_INTERVAL_MS);
  }
  return {
    state: "error",
    recheckJobId,
    notice: "timed out waiting for the recheck job",
    polls,
  };
}

export interface ReviewResult {
  state: "reviewed" | "blocked" | "not-pending" | "forbidden" | "error";
  notice?: string;
}

/** Submit owner + risk tier for a discovered system. Unclassified never
 * reaches the wire; concurrent reviews surface the server's NotPending. */
export async function registryReviewFlow(
  client: GatewayClient,
  systemId: string,
  owner: string,
  riskTier: string,
): Promise<ReviewResult> {
  const gate = validateReview(owner, riskTier);
  if (!gate.ok) {
    return { state: "blocked", notice: gate.reason };
  }
  try {
    await client.reviewSystem(systemId, owner, riskTier);
    return { state: "reviewed" };
  } catch (err) {
    if (err instanceof GatewayError) {
      if (err.status === 403) return { state: "forbidden", notice: "forbidden" };
      if (err.status === 422 && err.detail.includes("NotPending")) {
        return { state: "not-pending", notice: "already reviewed elsewhere" };
      }
      if (err.status === 422) {
        return { state: "not-pending", notice: err.detail };
      }
    }
    return {
      state: "error",
      notice: err instanceof Error ? err.message : String(err),
    };
  }
}
