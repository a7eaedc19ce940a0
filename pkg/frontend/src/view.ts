// Plain-DOM rendering.  Every goal, fact, and message string is taken
// verbatim from the service payload (textContent, never reformatted).

import { ActionJson, HoleJson, LqhClient } from "./api.js";
import { Session } from "./session.js";

const ACTION_LABELS: Record<string, (a: ActionJson) => string> = {
  fill_unit: () => "Fill ()",
  case_split: (a) => `Split on ${a.args ?? "?"}`,
  fill_expr: (a) => `Fill ${a.args ?? "…"}`,
  unfold_view: () => "Expansion",
};

export interface App {
  session: Session;
  root: HTMLElement;
}

export function createApp(root: HTMLElement, client: LqhClient, initialSource: string): App {
  root.innerHTML = `
    <header>
      <h1>lqh playground</h1>
      <span id="status" class="pill">checking…</span>
      <span id="offline" class="banner" hidden>service unreachable</span>
      <span id="error" class="banner" hidden></span>
    </header>
    <main>
      <section class="pane editor-pane">
        <textarea id="source" spellcheck="false"></textarea>
        <div class="row">
          <button id="check">Check</button>
          <span id="busy" hidden>…</span>
        </div>
        <ul id="diagnostics"></ul>
      </section>
      <section class="pane holes-pane">
        <h2>Holes</h2>
        <ul id="hole-list"></ul>
        <div id="hole-detail"></div>
      </section>
      <section class="pane log-pane">
        <h2>Messages</h2>
        <div id="log"></div>
      </section>
    </main>
  `;

  const el = <T extends HTMLElement>(id: string): T => {
    const node = root.querySelector<T>(`#${id}`);
    if (!node) throw new Error(`missing #${id}`);
    return node;
  };

  const sourceBox = el<HTMLTextAreaElement>("source");
  const session = new Session(client, initialSource, render);

  sourceBox.value = initialSource;
  sourceBox.addEventListener("input", () => session.edit(sourceBox.value));
  el<HTMLButtonElement>("check").addEventListener("click", () => session.check());

  function render(): void {
    const state = session.state;

    if (sourceBox.value !== state.source) {
      sourceBox.value = state.source;
    }

    const status = el<HTMLSpanElement>("status");
    if (state.payload === null) {
      status.textContent = state.busy ? "checking…" : "not checked";
      status.className = "pill";
    } else if (session.green()) {
      status.textContent = "accepted · no holes";
      status.className = "pill green";
    } else if (state.stale) {
      status.textContent = "edited · recheck";
      status.className = "pill amber";
    } else {
      const holes = state.payload.holes.length;
      const errs = state.payload.diagnostics.filter((d) => d.severity === "error").length;
      status.textContent = `${errs} problem${errs === 1 ? "" : "s"} · ${holes} hole${holes === 1 ? "" : "s"}`;
      status.className = "pill amber";
    }

    el("offline").hidden = state.online;
    const errorBox = el<HTMLSpanElement>("error");
    errorBox.hidden = state.error === null;
    errorBox.textContent = state.error ?? "";
    el("busy").hidden = !state.busy;

    const diags = el<HTMLUListElement>("diagnostics");
    diags.replaceChildren();
    for (const d of state.payload?.diagnostics ?? []) {
      const li = document.createElement("li");
      li.className = `diag ${d.severity}`;
      li.textContent = `${d.span.line}:${d.span.col} [${d.code}] ${d.message}`;
      diags.appendChild(li);
    }

    const list = el<HTMLUListElement>("hole-list");
    list.replaceChildren();
    for (const hole of state.payload?.holes ?? []) {
      const li = document.createElement("li");
      const btn = document.createElement("button");
      btn.textContent = hole.id;
      btn.dataset.hole = hole.id;
      btn.className = state.selected === hole.id ? "hole selected" : "hole";
      btn.addEventListener("click", () => session.selectHole(hole.id));
      li.appendChild(btn);
      list.appendChild(li);
    }

    renderDetail(el<HTMLDivElement>("hole-detail"), session.selectedHole());

    const log = el<HTMLDivElement>("log");
    log.replaceChildren();
    for (const message of state.log) {
      const pre = document.createElement("pre");
      pre.className = "message";
      pre.textContent = message;
      log.appendChild(pre);
    }
  }

  function renderDetail(box: HTMLDivElement, hole: HoleJson | null): void {
    box.replaceChildren();
    if (!hole) return;

    const dl = document.createElement("dl");
    const add = (label: string, value: string, cls: string) => {
      const dt = document.createElement("dt");
      dt.textContent = label;
      const dd = document.createElement("dd");
      const code = document.createElement("code");
      code.className = cls;
      code.textContent = value;
      dd.appendChild(code);
      dl.append(dt, dd);
    };
    add("Raw goal", hole.raw_type, "raw-goal");
    add("Simplified", hole.simplified_type, "simplified-goal");
    box.appendChild(dl);

    if (hole.env.length || hole.facts.length) {
      const h = document.createElement("h3");
      h.textContent = "Environment";
      box.appendChild(h);
      const ul = document.createElement("ul");
      ul.className = "env";
      for (const entry of hole.env) {
        const li = document.createElement("li");
        li.textContent = `${entry.name} : ${entry.type}`;
        ul.appendChild(li);
      }
      for (const fact of hole.facts) {
        const li = document.createElement("li");
        li.className = "fact";
        li.textContent = fact;
        ul.appendChild(li);
      }
      box.appendChild(ul);
    }

    const actions = document.createElement("div");
    actions.className = "actions";
    for (const action of hole.actions) {
      if (action.kind === "unfold_view") {
        const pre = document.createElement("pre");
        pre.className = "message expansion";
        pre.textContent = action.message;
        actions.appendChild(pre);
        continue;
      }
      const btn = document.createElement("button");
      btn.dataset.action = action.kind;
      btn.dataset.hole = hole.id;
      btn.textContent = ACTION_LABELS[action.kind](action);
      btn.title = action.message;
      btn.addEventListener("click", () => session.runAction(hole.id, action));
      actions.appendChild(btn);
    }
    box.appendChild(actions);

    const manual = document.createElement("div");
    manual.className = "manual-fill";
    const input = document.createElement("input");
    input.placeholder = "fill expression…";
    input.dataset.fill = hole.id;
    const go = document.createElement("button");
    go.textContent = "Fill";
    go.dataset.manualFill = hole.id;
    go.addEventListener("click", () => {
      if (input.value.trim()) session.fillManual(hole.id, input.value);
    });
    manual.append(input, go);
    box.appendChild(manual);
  }

  session.probeHealth();
  session.check();
  return { session, root };
}
