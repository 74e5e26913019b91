import { describe, expect, it } from "vitest";

import { computeLayout } from "../src/chart.js";

describe("computeLayout", () => {
  it("maps extremes to the padded plot corners", () => {
    const layout = computeLayout(
      [[{ step: 0, value: 1 }, { step: 10, value: 5 }]], 200, 100);
    expect(layout.xOf(0)).toBeCloseTo(28);
    expect(layout.xOf(10)).toBeCloseTo(172);
    expect(layout.yOf(5)).toBeCloseTo(28);
    expect(layout.yOf(1)).toBeCloseTo(72);
  });

  it("spans the union of several series", () => {
    const layout = computeLayout([
      [{ step: 0, value: 0 }],
      [{ step: 50, value: 9 }],
    ], 100, 100);
    expect(layout.xMin).toBe(0);
    expect(layout.xMax).toBe(50);
    expect(layout.yMax).toBe(9);
  });

  it("widens degenerate ranges instead of dividing by zero", () => {
    const layout = computeLayout([[{ step: 3, value: 7 }]], 100, 100);
    expect(Number.isFinite(layout.xOf(3))).toBe(true);
    expect(Number.isFinite(layout.yOf(7))).toBe(true);
  });

  it("defaults to a unit window with no data", () => {
    const layout = computeLayout([[]], 100, 100);
    expect(layout.xMin).toBe(0);
    expect(layout.xMax).toBe(1);
  });
});
