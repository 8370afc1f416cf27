// Console state machine. All data here mirrors the service: after every
// mutation the session is re-read from GET /sessions/{sid}, and answers are
// recomputed only when the user solves. History keeps past renderings for
// side-by-side reading; it is never reused to answer a new query.

import { ApiClient, ApiError } from "./api.js";
import type {
  ConstraintRow,
  ErrorPayload,
  InstanceRow,
  MetadataDoc,
  ScriptBundle,
  SolveParams,
  SolveResult,
} from "./types.js";

export interface QueryRecord {
  seq: number;
  params: SolveParams;
  result: SolveResult;
}

export interface ConsoleState {
  sessionId: string | null;
  metadata: MetadataDoc | null;
  models: string[];
  instances: InstanceRow[];
  constraints: ConstraintRow[];
  /** true while a solve is pending; mutations are disabled meanwhile */
  solving: boolean;
  /** true while any mutation round-trip is pending */
  busy: boolean;
  answer: SolveResult | null;
  /** the session changed since `answer` was computed */
  answerStale: boolean;
  history: QueryRecord[];
  /** index into history currently displayed, or null for the live answer */
  viewing: number | null;
  banner: string | null;
  constraintError: { payload: ErrorPayload; source: string } | null;
}

function initialState(): ConsoleState {
  return {
    sessionId: null,
    metadata: null,
    models: [],
    instances: [],
    constraints: [],
    solving: false,
    busy: false,
    answer: null,
    answerStale: false,
    history: [],
    viewing: null,
    banner: null,
    constraintError: null,
  };
}

function describe(err: unknown): ErrorPayload {
  if (err instanceof ApiError) {
    return { kind: err.kind, message: err.message, line: err.line, column: err.column };
  }
  return { kind: "client", message: String(err) };
}

export class ConsoleStore {
  state: ConsoleState = initialState();
  private api: ApiClient | null = null;
  private listeners = new Set<() => void>();
  private seq = 0;

  subscribe(fn: () => void): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  private emit(): void {
    for (const fn of this.listeners) fn();
  }

  private patch(p: Partial<ConsoleState>): void {
    this.state = { ...this.state, ...p };
    this.emit();
  }

  get connected(): boolean {
    return this.state.sessionId !== null;
  }

  /** Create a session from an uploaded metadata document. */
  async connect(baseUrl: string, metadata: MetadataDoc): Promise<void> {
    const api = new ApiClient(baseUrl);
    try {
      const sid = await api.createSession(metadata);
      this.api = api;
      this.state = initialState();
      this.patch({ sessionId: sid, metadata, banner: null });
      await this.refresh();
    } catch (err) {
      this.patch({ banner: describe(err).message });
    }
  }

  /** For tests: attach a prepared client to an existing session. */
  attach(api: ApiClient, sid: string): Promise<void> {
    this.api = api;
    this.state = initialState();
    this.state.sessionId = sid;
    return this.refresh();
  }

  /** Re-read the session from the service; the dump is the ground truth. */
  async refresh(): Promise<void> {
    if (!this.api || !this.state.sessionId) return;
    const dump = await this.api.state(this.state.sessionId);
    this.patch({
      metadata: dump.metadata,
      models: dump.models,
      instances: dump.instances,
      constraints: dump.constraints,
    });
  }

  private async mutate(op: () => Promise<void>): Promise<boolean> {
    if (!this.api || this.state.solving || this.state.busy) return false;
    this.patch({ busy: true, banner: null });
    try {
      await op();
      await this.refresh();
      this.patch({ busy: false, answerStale: this.state.answer !== null });
      return true;
    } catch (err) {
      const e = describe(err);
      this.patch({ busy: false, banner: e.message });
      return false;
    }
  }

  addModel(doc: unknown): Promise<boolean> {
    return this.mutate(async () => {
      await this.api!.addModel(this.state.sessionId!, doc);
    });
  }

  addInstance(decl: {
    name: string;
    model_id: string;
    label: string;
    minconf?: string;
  }): Promise<boolean> {
    return this.mutate(async () => {
      await this.api!.addInstance(this.state.sessionId!, decl);
    });
  }

  /** Parse errors land in `constraintError` with their column intact. */
  async addConstraint(text: string): Promise<boolean> {
    if (!this.api || this.state.solving || this.state.busy) return false;
    this.patch({ busy: true, constraintError: null, banner: null });
    try {
      await this.api.addConstraint(this.state.sessionId!, text);
      await this.refresh();
      this.patch({ busy: false, answerStale: this.state.answer !== null });
      return true;
    } catch (err) {
      this.patch({
        busy: false,
        constraintError: { payload: describe(err), source: text },
      });
      return false;
    }
  }

  setBanner(message: string | null): void {
    this.patch({ banner: message });
  }

  retract(cid: number): Promise<boolean> {
    return this.mutate(async () => {
      await this.api!.deleteConstraint(this.state.sessionId!, cid);
    });
  }

  /** One solve in flight at a time; repeat clicks are dropped. */
  async solve(params: SolveParams): Promise<boolean> {
    if (!this.api || this.state.solving || this.state.busy) return false;
    this.patch({ solving: true, banner: null });
    try {
      const result = await this.api.solve(this.state.sessionId!, params);
      const record: QueryRecord = { seq: ++this.seq, params, result };
      this.patch({
        solving: false,
        answer: result,
        answerStale: false,
        viewing: null,
        history: [...this.state.history, record],
      });
      return true;
    } catch (err) {
      this.patch({ solving: false, banner: describe(err).message });
      return false;
    }
  }

  /** Show a past answer; mutations and solves keep working on the live one. */
  view(index: number | null): void {
    if (index !== null && (index < 0 || index >= this.state.history.length)) {
      return;
    }
    this.patch({ viewing: index });
  }

  exportScript(): Promise<ScriptBundle> {
    if (!this.api || !this.state.sessionId) {
      return Promise.reject(new Error("no session"));
    }
    return this.api.script(this.state.sessionId);
  }

  /** The record the answer panel should display. */
  displayed(): { record: QueryRecord | null; historical: boolean } {
    const { viewing, history, answer } = this.state;
    if (viewing !== null && history[viewing]) {
      return { record: history[viewing]!, historical: true };
    }
    if (answer === null) return { record: null, historical: false };
    const last = history[history.length - 1] ?? null;
    return { record: last, historical: false };
  }
}
