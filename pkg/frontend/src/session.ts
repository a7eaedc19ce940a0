// Session state: the current source, the latest check results, the selected
// hole, and an append-only log of compiler messages.  All service traffic is
// funneled through a single queue so at most one request is in flight;
// events arriving meanwhile run after the response lands.

import { ActionJson, CheckPayload, LqhClient, ServiceError } from "./api.js";

export interface SessionState {
  source: string;
  payload: CheckPayload | null;
  selected: string | null;
  log: string[];
  busy: boolean;
  online: boolean;
  stale: boolean; // source edited since the displayed results were computed
  error: string | null;
}

export type Listener = (state: SessionState) => void;

export class Session {
  state: SessionState;
  private queue: Promise<void> = Promise.resolve();
  private listener: Listener;

  constructor(
    private client: LqhClient,
    initialSource: string,
    listener: Listener = () => {},
  ) {
    this.listener = listener;
    this.state = {
      source: initialSource,
      payload: null,
      selected: null,
      log: [],
      busy: false,
      online: true,
      stale: true,
      error: null,
    };
  }

  private emit(): void {
    this.listener(this.state);
  }

  private update(patch: Partial<SessionState>): void {
    this.state = { ...this.state, ...patch };
    this.emit();
  }

  /** Resolves when every queued request has completed. */
  whenIdle(): Promise<void> {
    return this.queue;
  }

  private enqueue(job: () => Promise<void>): void {
    this.queue = this.queue.then(async () => {
      this.update({ busy: true, error: null });
      try {
        await job();
      } catch (err) {
        // service errors never destroy the session: source and results stay
        const msg = err instanceof ServiceError ? err.message : String(err);
        this.update({ error: msg, online: !(err instanceof ServiceError && err.status === 0) });
      } finally {
        this.update({ busy: false });
      }
    });
  }

  /** Explicit user typing is the only local mutation of the source. */
  edit(text: string): void {
    if (text !== this.state.source) {
      this.update({ source: text, stale: true });
    }
  }

  selectHole(id: string | null): void {
    this.update({ selected: id });
  }

  probeHealth(): void {
    this.enqueue(async () => {
      const ok = await this.client.health();
      this.update({ online: ok });
    });
  }

  check(): void {
    this.enqueue(async () => {
      const payload = await this.client.check(this.state.source);
      this.applyPayload(payload, this.state.source);
    });
  }

  runAction(holeId: string, action: ActionJson): void {
    if (action.kind === "unfold_view") {
      return; // informational only; no source change
    }
    const kind = action.kind === "case_split" ? "split" : action.kind;
    const args = action.args ?? undefined;
    this.enqueue(async () => {
      const payload = await this.client.action(this.state.source, holeId, kind, args);
      this.applyPayload(payload, payload.new_source ?? this.state.source);
    });
  }

  fillManual(holeId: string, exprText: string): void {
    this.enqueue(async () => {
      const payload = await this.client.action(this.state.source, holeId, "fill_expr", exprText);
      this.applyPayload(payload, payload.new_source ?? this.state.source);
    });
  }

  private applyPayload(payload: CheckPayload, source: string): void {
    // the log mirrors compiler messages verbatim and only ever grows
    const log = this.state.log.concat(payload.diagnostics.map((d) => d.message));
    const ids = payload.holes.map((h) => h.id);
    let selected = this.state.selected;
    if (selected === null || !ids.includes(selected)) {
      selected = ids.length ? ids[0] : null;
    }
    this.update({ payload, source, log, selected, stale: false });
  }

  selectedHole() {
    const p = this.state.payload;
    if (!p || this.state.selected === null) return null;
    return p.holes.find((h) => h.id === this.state.selected) ?? null;
  }

  /** Accepted and hole free. */
  green(): boolean {
    const p = this.state.payload;
    return !!p && !this.state.stale && p.diagnostics.length === 0 && p.holes.length === 0;
  }
}
