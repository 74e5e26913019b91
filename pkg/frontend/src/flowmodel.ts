/** Data model behind the flow designer canvas. The model only collects
 * nodes and edges and serializes them; validation, shape inference, and
 * compilation are all server-side. */

export interface PaletteEntry {
  kind: string;
  params: { name: string; type: "int" | "float" }[];
}

export const PALETTE: PaletteEntry[] = [
  { kind: "Input", params: [] },
  { kind: "Output", params: [] },
  { kind: "Embedding", params: [{ name: "vocab", type: "int" }, { name: "dim", type: "int" }] },
  { kind: "Linear", params: [{ name: "in", type: "int" }, { name: "out", type: "int" }] },
  { kind: "LIF", params: [{ name: "threshold", type: "float" }, { name: "beta", type: "float" }] },
  { kind: "Attention", params: [{ name: "dim", type: "int" }, { name: "heads", type: "int" }] },
  { kind: "LayerNorm", params: [{ name: "dim", type: "int" }] },
  { kind: "Add", params: [] },
];

export interface CanvasNode {
  id: string;
  kind: string;
  params: Record<string, number>;
  x: number;
  y: number;
}

export interface CanvasEdge {
  from: string;
  to: string;
}

export class FlowModel {
  name = "Flow";
  nodes: CanvasNode[] = [];
  edges: CanvasEdge[] = [];

  addNode(kind: string, x = 0, y = 0, id?: string): CanvasNode {
    const entry = PALETTE.find((p) => p.kind === kind);
    if (!entry) {
      throw new Error(`unknown node kind ${kind}`);
    }
    const nodeId = id ?? this.freshId(kind);
    if (this.nodes.some((n) => n.id === nodeId)) {
      throw new Error(`duplicate node id ${nodeId}`);
    }
    const params: Record<string, number> = {};
    for (const p of entry.params) {
      params[p.name] = 0;
    }
    const node = { id: nodeId, kind, params, x, y };
    this.nodes.push(node);
    return node;
  }

  private freshId(kind: string): string {
    const base = kind.toLowerCase();
    let i = 0;
    let candidate = base;
    while (this.nodes.some((n) => n.id === candidate)) {
      i += 1;
      candidate = `${base}${i}`;
    }
    return candidate;
  }

  connect(from: string, to: string): void {
    if (!this.nodes.some((n) => n.id === from) ||
        !this.nodes.some((n) => n.id === to)) {
      throw new Error("edge endpoints must exist");
    }
    if (this.edges.some((e) => e.from === from && e.to === to)) {
      return; // drawing the same edge twice is a no-op
    }
    this.edges.push({ from, to });
  }

  removeNode(id: string): void {
    this.nodes = this.nodes.filter((n) => n.id !== id);
    this.edges = this.edges.filter((e) => e.from !== id && e.to !== id);
  }

  /** The wire-format flow document. Construction order does not matter to
   * the compiler, so serialization simply reflects insertion order. */
  toDoc(): unknown {
    return {
      name: this.name,
      nodes: this.nodes.map((n) => ({
        id: n.id,
        kind: n.kind,
        params: { ...n.params },
      })),
      edges: this.edges.map((e) => ({ from: e.from, to: e.to })),
    };
  }
}
