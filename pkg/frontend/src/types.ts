/** Shared wire types; mirrors of the HTTP API documents. */

export interface DisplayNode {
  id: string;
  kind: string;
  label: string;
  child_count: number;
  children: DisplayNode[];
}

export interface TreeDoc {
  model: string;
  version: number;
  tree: DisplayNode;
}

export interface CodeDoc {
  id: string;
  kind: string;
  span: { start_line: number; end_line: number };
  text: string;
}

export interface ParseErrorDoc {
  code: string;
  line: number;
  col: number;
  message: string;
  hint: string;
}

export interface ValidationReport {
  ok: boolean;
  errors: ParseErrorDoc[];
  checks: { name: string; passed: boolean }[];
}

export interface ViolationDoc {
  code: string;
  locus: string;
  message: string;
}

export interface ParamSpecDoc {
  name: string;
  type: "int" | "float" | "string" | "choice" | "flag";
  default: unknown;
  min?: number;
  max?: number;
  choices?: string[];
}

export interface RegistryEntryDoc {
  name: string;
  kind: string;
  version: string;
  description: string;
  files: { path: string; sha256: string; bytes: number }[];
  params_schema?: ParamSpecDoc[];
}

export interface RunDoc {
  run_id: string;
  model: string;
  config: Record<string, unknown>;
  status: string;
  started_at: number;
  ended_at: number | null;
}

export interface SeriesPoint {
  step: number;
  value: number;
}

export interface SeriesDoc {
  run: string;
  name: string;
  points: SeriesPoint[];
}

export interface CompareDoc {
  metric: string;
  runs: { id: string; points: SeriesPoint[]; missing?: boolean }[];
}

export interface RunEvent {
  type: string;
  run?: string;
  ts?: number;
  step?: number;
  name?: string;
  value?: number;
  level?: string;
  text?: string;
  label?: string;
  status?: string;
}
