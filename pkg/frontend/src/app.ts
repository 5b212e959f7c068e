// Browser entry point: wires the gateway client to the DOM, polls job
// status every 2 seconds, and drives the remediation and review flows.

import { GatewayClient, GatewayError } from "./api.js";
import { POLL_INTERVAL_MS, remediationFlow, registryReviewFlow } from "./flows.js";
import {
  renderActionItems,
  renderCoverage,
  renderEvidenceRows,
  renderPostureCard,
  renderReviewQueue,
  renderScanRows,
  renderTrustCenter,
} from "./render.js";
import {
  toActionItemCards,
  toCoverageCells,
  toEvidenceRows,
  toPostureCard,
  toRegistryReviewCards,
  toScanStatusRows,
  toTrustCenterPage,
  validateReview,
} from "./viewmodels.js";

const FRAMEWORKS = ["SOC2", "ISO27001", "ISO42001", "EUAIAct", "HIPAA", "GDPR"];

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function notice(text: string, kind: "info" | "error" = "info"): void {
  const bar = el("notice-bar");
  bar.textContent = text;
  bar.className = `notice-bar ${kind}`;
  if (text) setTimeout(() => (bar.textContent = ""), 6000);
}

export function makeClient(): GatewayClient {
  const token = window.localStorage.getItem("trustos_token") ?? "";
  const base = window.location.origin;
  return new GatewayClient(base, token, (url, init) =>
    fetch(url, init).then((r) => ({
      status: r.status,
      json: () => r.json(),
      text: () => r.text(),
    })),
  );
}

async function refreshPosture(client: GatewayClient): Promise<void> {
  try {
    const posture = await client.getPosture();
    el("posture-slot").innerHTML = renderPostureCard(toPostureCard(posture));
  } catch (err) {
    if (err instanceof GatewayError && err.status === 422) {
      el("posture-slot").innerHTML = renderPostureCard(null);
      return;
    }
    throw err;
  }
}

async function refreshScans(client: GatewayClient): Promise<void> {
  const { jobs } = await client.getScans();
  el("scan-slot").innerHTML = renderScanRows(toScanStatusRows(jobs));
}

async function refreshActionItems(client: GatewayClient): Promise<void> {
  const { action_items } = await client.getActionItems();
  el("items-slot").innerHTML = renderActionItems(
    toActionItemCards(action_items),
  );
}

async function refreshRegistry(client: GatewayClient): Promise<void> {
  const { systems } = await client.getRegistry();
  el("review-slot").innerHTML = renderReviewQueue(
    toRegistryReviewCards(systems),
  );
}

async function refreshEvidence(client: GatewayClient): Promise<void> {
  const { assertions } = await client.getAssertions();
  el("evidence-slot").innerHTML = renderEvidenceRows(toEvidenceRows(assertions));
}

async function refreshCoverage(client: GatewayClient): Promise<void> {
  const framework = (el("framework-select") as HTMLSelectElement).value;
  try {
    const coverage = await client.getCoverage(framework);
    el("coverage-slot").innerHTML = renderCoverage(toCoverageCells(coverage));
  } catch {
    el("coverage-slot").innerHTML = `<p class="empty">not active</p>`;
  }
}

async function refreshTrustCenter(client: GatewayClient): Promise<void> {
  const workspace = window.localStorage.getItem("trustos_workspace") ?? "";
  if (!workspace) return;
  const body = await client.getTrustCenter(workspace);
  el("trust-slot").innerHTML = renderTrustCenter(toTrustCenterPage(body));
}

async function refreshAll(client: GatewayClient): Promise<void> {
  await Promise.all([
    refreshPosture(client),
    refreshScans(client),
    refreshActionItems(client),
    refreshRegistry(client),
    refreshEvidence(client),
    refreshCoverage(client),
    refreshTrustCenter(client),
  ]);
}

function wireReviewValidation(): void {
  document.querySelectorAll<HTMLElement>(".review-form").forEach((form) => {
    const ownerInput = form.querySelector<HTMLInputElement>(".owner-input");
    const tierSelect = form.querySelector<HTMLSelectElement>(".tier-select");
    const submit = form.querySelector<HTMLButtonElement>(".submit-review");
    if (!ownerInput || !tierSelect || !submit) return;
    const update = () => {
      submit.disabled = !validateReview(ownerInput.value, tierSelect.value).ok;
    };
    ownerInput.addEventListener("input", update);
    tierSelect.addEventListener("change", update);
  });
}

export function boot(): void {
  const client = makeClient();

  el("scan-button").addEventListener("click", async () => {
    try {
      const { job_ids } = await client.launchScan();
      notice(`scan launched: ${job_ids.length} jobs`);
      await refreshScans(client);
    } catch (err) {
      notice(err instanceof Error ? err.message : String(err), "error");
    }
  });

  el("framework-select").addEventListener("change", () =>
    refreshCoverage(client),
  );

  document.body.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    if (target.matches("button.close-item")) {
      const itemId = target.dataset.itemId ?? "";
      target.setAttribute("disabled", "true");
      notice("closing item, re-checking the connection…");
      const result = await remediationFlow(client, itemId);
      if (result.state === "posture-updated") {
        notice(`re-check complete; posture now ${result.newScore}/100`);
        await refreshAll(client);
      } else {
        notice(result.notice ?? result.state, "error");
        target.removeAttribute("disabled");
      }
    }
    if (target.matches("button.submit-review")) {
      const systemId = target.dataset.systemId ?? "";
      const owner =
        document.querySelector<HTMLInputElement>(
          `.owner-input[data-system-id="${systemId}"]`,
        )?.value ?? "";
      const tier =
        document.querySelector<HTMLSelectElement>(
          `.tier-select[data-system-id="${systemId}"]`,
        )?.value ?? "";
      const result = await registryReviewFlow(client, systemId, owner, tier);
      if (result.state === "reviewed") {
        notice(`registered ${systemId}`);
        await refreshRegistry(client);
      } else {
        const slot = document.querySelector(`[data-notice="${systemId}"]`);
        if (slot) slot.textContent = result.notice ?? result.state;
      }
    }
  });

  const observer = new MutationObserver(wireReviewValidation);
  observer.observe(el("review-slot"), { childList: true, subtree: true });

  refreshAll(client).catch((err) =>
    notice(err instanceof Error ? err.message : String(err), "error"),
  );
  setInterval(() => {
    refreshScans(client).catch(() => undefined);
    refreshPosture(client).catch(() => undefined);
  }, POLL_INTERVAL_MS);

  const select = el("framework-select") as HTMLSelectElement;
  if (select.options.length === 0) {
    for (const fw of FRAMEWORKS) {
      const option = document.createElement("option");
      option.value = fw;
      option.textContent = fw;
      select.appendChild(option);
    }
  }
}

if (typeof document !== "undefined" && document.getElementById("posture-slot")) {
  boot();
}
