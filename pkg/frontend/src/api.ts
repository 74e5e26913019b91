import type {
  CodeDoc, CompareDoc, RegistryEntryDoc, RunDoc, SeriesDoc, TreeDoc,
  ValidationReport, ViolationDoc,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function unwrap<T>(resp: Response): Promise<T> {
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let code = "http-error";
  let message = `HTTP ${resp.status}`;
  try {
    const body = await resp.json();
    if (body && body.error) {
      code = body.error.code;
      message = body.error.message;
    }
  } catch {
    /* non-JSON error body; keep the status fallback */
  }
  throw new ApiError(resp.status, code, message);
}

/** Thin typed wrapper over the HTTP routes. The UI never recomputes what
 * these return; every displayed tree/shape/command/series comes from here. */
export class Api {
  constructor(private base: string = "") {}

  private url(path: string, params?: Record<string, string>): string {
    const q = params ? "?" + new URLSearchParams(params).toString() : "";
    return this.base + path + q;
  }

  private get<T>(path: string, params?: Record<string, string>): Promise<T> {
    return fetch(this.url(path, params)).then((r) => unwrap<T>(r));
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return fetch(this.url(path), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    }).then((r) => unwrap<T>(r));
  }

  // registry
  listRegistry(kind?: string): Promise<{ entries: RegistryEntryDoc[] }> {
    return this.get("/api/registry", kind ? { kind } : undefined);
  }

  addRegistryEntry(manifest: unknown, files: Record<string, string>) {
    return this.post<RegistryEntryDoc>("/api/registry", { manifest, files });
  }

  verifyEntry(kind: string, name: string, version: string) {
    return this.post<{ passed: boolean; files: { path: string; passed: boolean; reason: string }[] }>(
      `/api/registry/${kind}/${name}/${version}/verify`, {});
  }

  // models
  modelTree(name: string): Promise<TreeDoc> {
    return this.get(`/api/models/${name}/tree`);
  }

  moduleCode(name: string, moduleId: string): Promise<CodeDoc> {
    return this.get(`/api/models/${name}/modules/${moduleId || "-"}/code`);
  }

  validateModule(name: string, moduleId: string, newText: string): Promise<ValidationReport> {
    return this.post(`/api/models/${name}/modules/${moduleId || "-"}/validate`,
      { new_text: newText });
  }

  patchModule(name: string, moduleId: string, newText: string, baseVersion: number) {
    return this.post<{ version: number }>(
      `/api/models/${name}/modules/${moduleId || "-"}/patch`,
      { new_text: newText, base_version: baseVersion });
  }

  // flows
  validateFlow(doc: unknown): Promise<{ valid: boolean; violations: ViolationDoc[] }> {
    return this.post("/api/flows/validate", doc);
  }

  flowShapes(doc: unknown): Promise<{ shapes: Record<string, (number | string)[]> }> {
    return this.post("/api/flows/shapes", doc);
  }

  compileFlow(doc: unknown): Promise<{ name: string; source: string }> {
    return this.post("/api/flows/compile", doc);
  }

  // commands
  renderCommand(body: unknown): Promise<{ command: string }> {
    return this.post("/api/commands/render", body);
  }

  expandGrid(body: unknown): Promise<{ count: number; commands: string[] }> {
    return this.post("/api/commands/grid", body);
  }

  // runs
  createSyntheticRun(model: string, steps: number): Promise<RunDoc> {
    return this.post("/api/runs", { synthetic: true, model, steps });
  }

  listRuns(): Promise<{ runs: RunDoc[] }> {
    return this.get("/api/runs");
  }

  runSeries(runId: string, name: string, maxPoints: number): Promise<SeriesDoc> {
    return this.get(`/api/runs/${runId}/metrics`,
      { name, max_points: String(maxPoints) });
  }

  compareRuns(ids: string[], name: string, maxPoints: number): Promise<CompareDoc> {
    return this.get("/api/runs/compare",
      { ids: ids.join(","), name, max_points: String(maxPoints) });
  }

  exportUrl(runId: string, format: string): string {
    return this.url(`/api/runs/${runId}/export`, { format });
  }

  streamUrl(runId: string): string {
    return this.url(`/api/runs/${runId}/stream`);
  }
}
