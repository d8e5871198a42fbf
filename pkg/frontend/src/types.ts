// Wire types mirroring the server's JSON payloads.

/** Inclusive integer interval, the unit of every domain payload. */
export type Interval = [number, number];

export interface VariableEntry {
  ready: boolean;
  values: Interval[] | null; // null while the variable is Pending
}

export interface RestrictionJson {
  kind: "assign" | "exclude" | "range";
  value?: number | null;
  lo?: number | null;
  hi?: number | null;
}

export interface DecisionJson {
  id: number;
  variable: string;
  restriction: RestrictionJson;
}

export interface SnapshotJson {
  epoch: number;
  computing: boolean;
  decisions: DecisionJson[];
  variables: Record<string, VariableEntry>;
}

export interface ConsequencesJson {
  variables: Record<string, { values: Interval[] }>;
  complete: boolean;
  solutionCount: number | null;
}

export interface ModelResponse {
  modelId: string;
  modelConsequences: ConsequencesJson;
}

export interface SessionResponse {
  sessionId: string;
  state: SnapshotJson;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  details?: unknown;
}

export type StreamEvent =
  | { type: "epoch"; epoch: number }
  | { type: "variableReady"; epoch: number; variable: string; values: Interval[] }
  | { type: "complete"; epoch: number };

export function intervalsContain(values: Interval[], v: number): boolean {
  return values.some(([lo, hi]) => lo <= v && v <= hi);
}

export function intervalsList(values: Interval[]): number[] {
  const out: number[] = [];
  for (const [lo, hi] of values) {
    for (let v = lo; v <= hi; v++) out.push(v);
  }
  return out;
}
