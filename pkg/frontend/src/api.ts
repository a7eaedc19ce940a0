// Typed client for the checker service JSON API (lqh/1 payloads).

export interface SpanJson {
  file: string;
  line: number;
  col: number;
  end_line: number;
  end_col: number;
}

export interface DiagnosticJson {
  severity: "error" | "warning" | "info";
  code: string;
  span: SpanJson;
  message: string;
}

export type ActionKind = "fill_unit" | "case_split" | "fill_expr" | "unfold_view";

export interface ActionJson {
  kind: ActionKind;
  message: string;
  edit_preview: string | null;
  args: string | null;
}

export interface EnvEntryJson {
  name: string;
  type: string;
}

export interface HoleJson {
  id: string;
  span: SpanJson;
  raw_type: string;
  simplified_type: string;
  env: EnvEntryJson[];
  facts: string[];
  actions: ActionJson[];
}

export interface CheckPayload {
  schema: string;
  diagnostics: DiagnosticJson[];
  holes: HoleJson[];
  new_source?: string;
}

export type ServiceActionKind = "split" | "fill_unit" | "fill_expr";

export class ServiceError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class LqhClient {
  constructor(
    private baseUrl: string,
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async post(path: string, body: unknown): Promise<CheckPayload> {
    let resp: Response;
    try {
      resp = await this.fetchFn(`${this.baseUrl}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
    } catch (err) {
      throw new ServiceError(0, `service unreachable: ${String(err)}`);
    }
    let doc: unknown;
    try {
      doc = await resp.json();
    } catch {
      doc = {};
    }
    if (!resp.ok) {
      const msg =
        typeof doc === "object" && doc !== null && "error" in doc
          ? String((doc as { error: unknown }).error)
          : `service returned ${resp.status}`;
      throw new ServiceError(resp.status, msg);
    }
    return doc as CheckPayload;
  }

  check(source: string): Promise<CheckPayload> {
    return this.post("/v1/check", { source });
  }

  action(
    source: string,
    hole: string,
    action: ServiceActionKind,
    args?: string,
  ): Promise<CheckPayload> {
    return this.post("/v1/action", { source, hole, action, args });
  }

  async health(): Promise<boolean> {
    try {
      const resp = await this.fetchFn(`${this.baseUrl}/healthz`);
      return resp.ok;
    } catch {
      return false;
    }
  }
}
