// In-memory stand-in for the explanation service, driven through the same
// FetchLike seam ApiClient uses. Holds mutable session state so tests can
// assert that the store treats the GET dump as ground truth.

import type { FetchLike } from "../src/api.js";

export interface RecordedCall {
  method: string;
  path: string;
  body: unknown;
}

export class FakeService {
  metadata: unknown = { features: [] };
  models: string[] = [];
  instances: {
    name: string;
    model_id: string;
    label: string;
    minconf?: string;
  }[] = [];
  constraints: { id: number; text: string }[] = [];
  calls: RecordedCall[] = [];
  solveResult: unknown = { members: [] };
  script = "model credit.json\n";
  /** when true, solve responses wait until releaseSolve() */
  deferSolves = false;
  failNextConstraint: { status: number; payload: unknown } | null = null;
  failNextSolve: { status: number; payload: unknown } | null = null;

  private nextCid = 1;
  private pendingSolves: ((r: Response) => void)[] = [];

  releaseSolve(): void {
    const resolve = this.pendingSolves.shift();
    if (!resolve) throw new Error("no pending solve");
    resolve(json(200, this.solveResult));
  }

  get pendingSolveCount(): number {
    return this.pendingSolves.length;
  }

  fetch: FetchLike = (input, init) => {
    const path = input.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body =
      typeof init?.body === "string" && init.body !== ""
        ? JSON.parse(init.body)
        : undefined;
    this.calls.push({ method, path, body });
    return Promise.resolve(this.route(method, path, body));
  };

  private route(method: string, path: string, body: unknown): Response {
    if (method === "POST" && path === "/sessions") {
      return json(201, { session_id: "s1" });
    }
    if (method === "GET" && path === "/sessions/s1") {
      return json(200, {
        metadata: this.metadata,
        models: this.models,
        instances: this.instances,
        constraints: this.constraints,
      });
    }
    if (method === "POST" && path === "/sessions/s1/models") {
      const doc = body as { model_id?: string };
      const id = doc.model_id ?? `m${this.models.length + 1}`;
      this.models.push(id);
      return json(201, { model_id: id });
    }
    if (method === "POST" && path === "/sessions/s1/instances") {
      const decl = body as (typeof this.instances)[number];
      this.instances.push(decl);
      return json(201, { name: decl.name });
    }
    if (method === "POST" && path === "/sessions/s1/constraints") {
      if (this.failNextConstraint) {
        const f = this.failNextConstraint;
        this.failNextConstraint = null;
        return json(f.status, f.payload);
      }
      const row = { id: this.nextCid++, text: (body as { text: string }).text };
      this.constraints.push(row);
      return json(201, { constraint_id: row.id });
    }
    const del = path.match(/^\/sessions\/s1\/constraints\/(\d+)$/);
    if (method === "DELETE" && del) {
      const cid = Number(del[1]);
      this.constraints = this.constraints.filter((c) => c.id !== cid);
      return new Response(null, { status: 204 });
    }
    if (method === "POST" && path === "/sessions/s1/solve") {
      if (this.failNextSolve) {
        const f = this.failNextSolve;
        this.failNextSolve = null;
        return json(f.status, f.payload);
      }
      if (this.deferSolves) {
        // the caller awaits this response; the test decides when it lands
        return new Promise<Response>((resolve) => {
          this.pendingSolves.push(resolve);
        }) as unknown as Response;
      }
      return json(200, this.solveResult);
    }
    if (method === "GET" && path === "/sessions/s1/script") {
      return json(200, {
        metadata: this.metadata,
        models: {},
        script: this.script,
      });
    }
    return json(404, { kind: "not_found", message: `no route ${method} ${path}` });
  }
}

function json(status: number, doc: unknown): Response {
  return new Response(JSON.stringify(doc), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}
