// @vitest-environment jsdom
//
// End-to-end acceptance: the UI against the real running service.
// Spawns `python -m bibrecon.cli serve` (bundled fixture corpus), creates a
// cluster through the reconciliation endpoint, then drives the DOM.
import { type ChildProcess, spawn } from "node:child_process";
import { mkdtempSync } from "node:fs";
import net from "node:net";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CurationApi, type FetchLike } from "../src/api.js";
import { App } from "../src/app.js";
import { pendingMutations } from "../src/optimistic.js";
import type { ClusterView } from "../src/types.js";

const REPO_ROOT = join(__dirname, "..", "..");
const CLUSTER_ID = "fixture:W-salt";

let server: ChildProcess;
let baseUrl: string;

async function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const probe = net.createServer();
    probe.once("error", reject);
    probe.listen(0, "127.0.0.1", () => {
      const address = probe.address();
      if (address === null || typeof address === "string") {
        reject(new Error("no port"));
        return;
      }
      const port = address.port;
      probe.close(() => resolve(port));
    });
  });
}

async function waitForServer(url: string, timeoutMs = 30_000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(url);
      if (response.ok) return;
    } catch (err) {
      lastError = err;
    }
    await new Promise((resolve) => setTimeout(resolve, 200));
  }
  throw new Error(`service did not come up at ${url}: ${String(lastError)}`);
}

async function drainMutations(): Promise<void> {
  while (pendingMutations() > 0) {
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
  await Promise.resolve();
}

/** fetch wrapper that keeps a parsed copy of every JSON response. */
function interceptingFetch(log: Array<{ url: string; body: unknown }>): FetchLike {
  return async (input, init) => {
    const response = await fetch(input, init);
    const clone = response.clone();
    try {
      log.push({ url: input, body: await clone.json() });
    } catch {
      /* non-JSON */
    }
    return response;
  };
}

beforeAll(async () => {
  const port = await freePort();
  baseUrl = `http://127.0.0.1:${port}`;
  const sessionDir = mkdtempSync(join(tmpdir(), "bibrecon-ui-test-"));
  server = spawn(
    "python3",
    ["-m", "bibrecon.cli", "serve", "--port", String(port)],
    {
      cwd: REPO_ROOT,
      env: { ...process.env, BIBRECON_SESSION_DIR: sessionDir },
      stdio: ["ignore", "pipe", "pipe"],
    },
  );
  server.stderr?.on("data", () => {});
  server.stdout?.on("data", () => {});
  await waitForServer(`${baseUrl}/`);

  // reconcile once so the salt cluster exists server-side
  const queries = JSON.stringify({
    q0: {
      query: "The Book of Salt",
      properties: [{ pid: "contributor", v: "Monique Truong" }],
    },
  });
  const response = await fetch(`${baseUrl}/api/fixture/reconcile`, {
    method: "POST",
    headers: { "Content-Type": "application/x-www-form-urlencoded" },
    body: new URLSearchParams({ queries }),
  });
  const body = (await response.json()) as Record<string, { result: Array<{ match: boolean }> }>;
  if (!body["q0"]?.result[0]?.match) {
    throw new Error("seed reconciliation did not produce a match");
  }
});

afterAll(async () => {
  if (server && server.exitCode === null) {
    server.kill("SIGINT");
    await new Promise((resolve) => server.once("exit", resolve));
  }
});

function mountApp(log: Array<{ url: string; body: unknown }>) {
  const root = document.createElement("main");
  document.body.appendChild(root);
  const api = new CurationApi(baseUrl, interceptingFetch(log));
  return { app: new App(root, api), root };
}

describe("review UI against the live service", () => {
  it("renders every member of the fixture cluster", async () => {
    const log: Array<{ url: string; body: unknown }> = [];
    const { app, root } = mountApp(log);
    await app.route(`#/cluster/${CLUSTER_ID}`);
    const rows = [...root.querySelectorAll<HTMLTableRowElement>('[data-testid="member-row"]')];
    const nativeIds = rows.map((row) => row.dataset["nativeId"]).sort();
    expect(nativeIds).toEqual(["fx-001", "fx-002", "fx-003", "fx-004"]);
  });

  it("displays exactly the scores the API returned", async () => {
    const log: Array<{ url: string; body: unknown }> = [];
    const { app, root } = mountApp(log);
    await app.route(`#/cluster/${CLUSTER_ID}`);

    const payload = log.find((entry) => entry.url.includes("/curation/clusters/"))
      ?.body as ClusterView;
    expect(payload).toBeDefined();

    const rendered = new Map(
      [...root.querySelectorAll<HTMLTableRowElement>('[data-testid="member-row"]')].map(
        (row) => [
          row.dataset["nativeId"],
          row.querySelector('[data-testid="member-score"]')?.textContent,
        ],
      ),
    );
    for (const member of payload.members) {
      expect(rendered.get(member.native_id)).toBe(String(member.score));
    }
  });

  it("persists a toggle across reload and re-fetch", async () => {
    const log: Array<{ url: string; body: unknown }> = [];
    const { app, root } = mountApp(log);
    await app.route(`#/cluster/${CLUSTER_ID}`);

    const row = root.querySelector<HTMLTableRowElement>('tr[data-native-id="fx-003"]')!;
    const box = row.querySelector<HTMLInputElement>('[data-testid="member-toggle"]')!;
    expect(box.checked).toBe(true);
    box.click(); // deselect the translation
    await drainMutations();
    expect(box.checked).toBe(false);

    // "reload": a brand-new app instance and DOM
    const second = mountApp(log);
    await second.app.route(`#/cluster/${CLUSTER_ID}`);
    const reloadedBox = second.root.querySelector<HTMLInputElement>(
      'tr[data-native-id="fx-003"] [data-testid="member-toggle"]',
    )!;
    expect(reloadedBox.checked).toBe(false);

    // and the raw API agrees (server-persisted, not client state)
    const raw = (await (
      await fetch(`${baseUrl}/curation/clusters/${encodeURIComponent(CLUSTER_ID)}`)
    ).json()) as ClusterView;
    const member = raw.members.find((m) => m.native_id === "fx-003");
    expect(member?.selected).toBe(false);

    // restore for idempotent reruns against a fresh session dir
    reloadedBox.click();
    await drainMutations();
    expect(reloadedBox.checked).toBe(true);
  });

  it("opens the source record panel from a member row", async () => {
    const log: Array<{ url: string; body: unknown }> = [];
    const { app, root } = mountApp(log);
    await app.route("#/record/fixture:fx-001");
    const panel = root.querySelector('[data-testid="record-panel"]')!;
    expect(panel.textContent).toContain("The Book of Salt");
    const provenance = root.querySelector<HTMLAnchorElement>('[data-testid="record-provenance"]')!;
    expect(provenance.href).toBe("https://fixture.example/records/fx-001");
  });
});
