import type { DisplayNode } from "./types.js";

export interface TreeRow {
  id: string;
  kind: string;
  label: string;
  depth: number;
  childCount: number;
}

/** Depth-first flattening of the display tree into indented rows, in the
 * order the API lists children. */
export function flattenTree(root: DisplayNode, depth = 0): TreeRow[] {
  const rows: TreeRow[] = [{
    id: root.id,
    kind: root.kind,
    label: root.label,
    depth,
    childCount: root.child_count,
  }];
  for (const child of root.children) {
    rows.push(...flattenTree(child, depth + 1));
  }
  return rows;
}

export function countNodes(root: DisplayNode): number {
  return 1 + root.children.reduce((n, c) => n + countNodes(c), 0);
}
