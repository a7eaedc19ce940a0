// Starts the checker service for the end-to-end test and tears it down.

import { spawn, ChildProcess } from "node:child_process";
import path from "node:path";

export const E2E_PORT = 8653;

let proc: ChildProcess | undefined;

export async function setup(): Promise<void> {
  const repoRoot = path.resolve(__dirname, "..", "..");
  proc = spawn(
    "python3",
    ["-m", "lqh.cli", "serve", "--port", String(E2E_PORT), "--host", "127.0.0.1"],
    { cwd: repoRoot, stdio: ["ignore", "pipe", "inherit"] },
  );
  const deadline = Date.now() + 60_000;
  while (Date.now() < deadline) {
    try {
      const resp = await fetch(`http://127.0.0.1:${E2E_PORT}/healthz`);
      if (resp.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 250));
  }
  throw new Error("lqh service did not come up for the e2e test");
}

export async function teardown(): Promise<void> {
  proc?.kill();
}
