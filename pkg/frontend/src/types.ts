// Wire types for the explanation service. Everything the console shows is
// carried verbatim in these documents; the client never computes with them.

export interface FeatureMetaDoc {
  name: string;
  kind: "continuous" | "ordinal" | "nominal";
  min?: number | string;
  max?: number | string;
  values?: string[];
}

export interface MetadataDoc {
  features: FeatureMetaDoc[];
}

export interface InstanceRow {
  name: string;
  model_id: string;
  label: string;
  minconf?: string;
}

export interface ConstraintRow {
  id: number;
  text: string;
}

export interface SessionState {
  metadata: MetadataDoc;
  models: string[];
  instances: InstanceRow[];
  constraints: ConstraintRow[];
}

/** One member is a conjunction of constraint strings, already rendered. */
export interface AnswerDoc {
  members: { text: string }[][];
  min?: string;
  attained?: boolean;
  witnesses?: Record<string, Record<string, string>>[];
  note?: string;
}

export interface TimeoutDoc {
  status: "timeout";
  solved_members: number;
}

export type SolveResult = AnswerDoc | TimeoutDoc;

export function isTimeout(r: SolveResult): r is TimeoutDoc {
  return "status" in r && r.status === "timeout";
}

export interface SolveParams {
  project?: string[];
  minimize?: string;
}

export interface ScriptBundle {
  metadata: MetadataDoc;
  models: Record<string, unknown>;
  script: string;
}

export interface ErrorPayload {
  kind: string;
  message: string;
  line?: number;
  column?: number;
}
