import { describe, expect, it } from "vitest";

import { countNodes, flattenTree } from "../src/tree.js";
import type { DisplayNode } from "../src/types.js";

function node(id: string, kind: string, label: string,
  children: DisplayNode[] = []): DisplayNode {
  return { id, kind, label, child_count: children.length, children };
}

// shape of the bundled two-class model as the tree endpoint returns it
const TINY = node("", "TinySpikeGPT", "TinySpikeGPT", [
  node("emb", "Embedding", "emb"),
  node("blocks.0", "Block", "0", [
    node("blocks.0.ln", "LayerNorm", "ln"),
    node("blocks.0.attn", "Attention", "attn"),
    node("blocks.0.lif", "LIF", "lif"),
  ]),
  node("blocks.1", "Block", "1", [
    node("blocks.1.ln", "LayerNorm", "ln"),
    node("blocks.1.attn", "Attention", "attn"),
    node("blocks.1.lif", "LIF", "lif"),
  ]),
  node("head", "Linear", "head"),
]);

describe("flattenTree", () => {
  it("keeps depth-first order with depths", () => {
    const rows = flattenTree(TINY);
    expect(rows.map((r) => r.id)).toEqual([
      "", "emb", "blocks.0", "blocks.0.ln", "blocks.0.attn", "blocks.0.lif",
      "blocks.1", "blocks.1.ln", "blocks.1.attn", "blocks.1.lif", "head",
    ]);
    expect(rows[0].depth).toBe(0);
    expect(rows[3].depth).toBe(2);
  });

  it("explorer row count equals tree node count", () => {
    expect(flattenTree(TINY).length).toBe(countNodes(TINY));
    expect(countNodes(TINY)).toBe(11);
  });

  it("single node", () => {
    const rows = flattenTree(node("", "M", "M"));
    expect(rows).toHaveLength(1);
    expect(rows[0].childCount).toBe(0);
  });
});
