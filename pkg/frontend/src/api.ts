// Thin typed client over the service's JSON routes. Every non-2xx response
// carries {kind, message[, line, column]}; that payload becomes an ApiError
// so panels can surface it inline instead of leaking raw JSON.

import type {
  ErrorPayload,
  MetadataDoc,
  ScriptBundle,
  SessionState,
  SolveParams,
  SolveResult,
} from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly kind: string;
  readonly line?: number;
  readonly column?: number;

  constructor(status: number, payload: ErrorPayload) {
    super(payload.message);
    this.status = status;
    this.kind = payload.kind;
    this.line = payload.line;
    this.column = payload.column;
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  private base: string;
  private fetchImpl: FetchLike;

  constructor(baseUrl: string, fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/+$/, "");
    // bind so a bare `fetch` keeps its global receiver
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  get baseUrl(): string {
    return this.base;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T> {
    let resp: Response;
    try {
      resp = await this.fetchImpl(this.base + path, {
        method,
        headers: body === undefined ? {} : { "Content-Type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
      });
    } catch (err) {
      throw new ApiError(0, {
        kind: "network",
        message: `service unreachable at ${this.base}: ${String(err)}`,
      });
    }
    if (resp.status === 204) {
      return undefined as T;
    }
    const text = await resp.text();
    let doc: unknown = null;
    if (text !== "") {
      try {
        doc = JSON.parse(text);
      } catch {
        throw new ApiError(resp.status, {
          kind: "protocol",
          message: `unparseable response (${resp.status})`,
        });
      }
    }
    if (!resp.ok) {
      const p = (doc ?? {}) as Partial<ErrorPayload>;
      throw new ApiError(resp.status, {
        kind: p.kind ?? "error",
        message: p.message ?? `request failed (${resp.status})`,
        line: p.line,
        column: p.column,
      });
    }
    return doc as T;
  }

  async createSession(metadata: MetadataDoc): Promise<string> {
    const doc = await this.request<{ session_id: string }>(
      "POST",
      "/sessions",
      { metadata },
    );
    return doc.session_id;
  }

  state(sid: string): Promise<SessionState> {
    return this.request("GET", `/sessions/${sid}`);
  }

  async addModel(sid: string, doc: unknown): Promise<string> {
    const out = await this.request<{ model_id: string }>(
      "POST",
      `/sessions/${sid}/models`,
      doc,
    );
    return out.model_id;
  }

  addInstance(
    sid: string,
    decl: { name: string; model_id: string; label: string; minconf?: string },
  ): Promise<{ name: string }> {
    return this.request("POST", `/sessions/${sid}/instances`, decl);
  }

  async addConstraint(sid: string, text: string): Promise<number> {
    const out = await this.request<{ constraint_id: number }>(
      "POST",
      `/sessions/${sid}/constraints`,
      { text },
    );
    return out.constraint_id;
  }

  deleteConstraint(sid: string, cid: number): Promise<void> {
    return this.request("DELETE", `/sessions/${sid}/constraints/${cid}`);
  }

  solve(sid: string, params: SolveParams): Promise<SolveResult> {
    const body: SolveParams = {};
    if (params.project && params.project.length > 0) {
      body.project = params.project;
    }
    if (params.minimize) {
      body.minimize = params.minimize;
    }
    return this.request("POST", `/sessions/${sid}/solve`, body);
  }

  script(sid: string): Promise<ScriptBundle> {
    return this.request("GET", `/sessions/${sid}/script`);
  }
}
