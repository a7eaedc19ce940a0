// Scripted browser test against the real checker service: load the proof
// example, click Split, Fill (), then the suggested recursive fill, and end
// with zero holes and a green status.  Every message and goal string shown
// in the DOM must be byte-equal to what the service sent.

import { beforeAll, describe, expect, it } from "vitest";
import { CheckPayload, LqhClient } from "../src/api.js";
import { DEMO_SOURCE } from "../src/demo.js";
import { createApp, App } from "../src/view.js";
import { E2E_PORT } from "./globalSetup.js";

const BASE = `http://127.0.0.1:${E2E_PORT}`;

// every payload the service produced, in order
const payloads: CheckPayload[] = [];

function recordingFetch(input: string, init?: RequestInit): Promise<Response> {
  return fetch(input, init).then(async (resp) => {
    if (resp.ok && input.includes("/v1/")) {
      const copy = resp.clone();
      payloads.push((await copy.json()) as CheckPayload);
    }
    return resp;
  });
}

function click(root: HTMLElement, selector: string): void {
  const btn = root.querySelector<HTMLButtonElement>(selector);
  expect(btn, `expected a button matching ${selector}`).toBeTruthy();
  btn!.click();
}

function texts(root: HTMLElement, selector: string): string[] {
  return Array.from(root.querySelectorAll(selector)).map((n) => n.textContent ?? "");
}

describe("playground end to end", () => {
  let app: App;

  beforeAll(async () => {
    document.body.innerHTML = '<div id="app"></div>';
    const root = document.getElementById("app")!;
    app = createApp(root, new LqhClient(BASE, recordingFetch), DEMO_SOURCE);
    await app.session.whenIdle();
  }, 120_000);

  it("walks the split / fill-unit / induction dialogue to green", async () => {
    const { session, root } = app;

    // initial check: one hole offering a case split
    expect(session.state.payload?.holes.map((h) => h.id)).toEqual(["_0"]);
    expect(texts(root, "#hole-list button")).toEqual(["_0"]);
    const splitBtn = root.querySelector<HTMLButtonElement>('button[data-action="case_split"]');
    expect(splitBtn?.textContent).toBe("Split on xs");

    click(root, 'button[data-action="case_split"]');
    await session.whenIdle();

    // after the split: two holes, source rewritten into the two clauses
    expect(session.state.source).toContain("listLengthProof [] = _0");
    expect(session.state.source).toContain("listLengthProof (y:ys) = _1");
    expect(session.state.payload?.holes.map((h) => h.id)).toEqual(["_0", "_1"]);

    // the nil hole is selected first and certifies a unit fill
    click(root, 'button[data-action="fill_unit"][data-hole="_0"]');
    await session.whenIdle();
    expect(session.state.source).toContain("listLengthProof [] = ()");
    expect(session.state.payload?.holes.map((h) => h.id)).toEqual(["_1"]);

    // the remaining hole suggests the recursive call
    const fillBtn = root.querySelector<HTMLButtonElement>(
      'button[data-action="fill_expr"][data-hole="_1"]',
    );
    expect(fillBtn?.textContent).toBe("Fill listLengthProof ys");
    fillBtn!.click();
    await session.whenIdle();

    // done: zero holes, zero diagnostics, green status
    expect(session.state.payload?.holes).toEqual([]);
    expect(session.state.payload?.diagnostics).toEqual([]);
    expect(session.green()).toBe(true);
    const status = root.querySelector("#status")!;
    expect(status.className).toContain("green");
    expect(status.textContent).toBe("accepted · no holes");
    expect(session.state.source).toContain("listLengthProof (y:ys) = listLengthProof ys");
  }, 120_000);

  it("displayed every message and goal byte-equal to the service payload", () => {
    const { root, session } = app;

    // the log mirrors, in order, exactly the diagnostics of every payload
    const expectedLog = payloads.flatMap((p) => p.diagnostics.map((d) => d.message));
    expect(session.state.log).toEqual(expectedLog);
    expect(texts(root, "#log pre.message")).toEqual(expectedLog);

    // the golden dialogue messages all came through verbatim
    const joined = expectedLog.join("\n");
    expect(joined).toContain(
      "Found hole `_0' of type `xs:[a] -> { _:Proof | listLength xs == len xs }'.\n" +
        "       Consider a case split as in the body of `listLength'.",
    );
    expect(joined).toContain(
      "Found hole `_0' of type `{ _:Proof | xs == [] && listLength xs == len xs }'.\n" +
        "       This can be completed with `()'.",
    );
    expect(joined).toContain(
      "Found hole `_1' of type `{ _:Proof | xs == (y:ys) && listLength xs == len xs }'.\n" +
        "       Conclusion expands to `1 + listLength ys == 1 + len ys',\n" +
        "       which is simplified to `listLength ys == len ys`.",
    );
  });

  it("goal strings in the hole panel come verbatim from the payload", async () => {
    // re-load the split state and compare the selected hole's panel strings
    const { session, root } = app;
    session.edit(DEMO_SOURCE);
    session.check();
    await session.whenIdle();
    const hole = session.selectedHole()!;
    expect(root.querySelector("code.raw-goal")!.textContent).toBe(hole.raw_type);
    expect(root.querySelector("code.simplified-goal")!.textContent).toBe(hole.simplified_type);
  }, 120_000);
});
