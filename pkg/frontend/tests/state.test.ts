import { describe, expect, it } from "vitest";

import { initialState, navigate, select } from "../src/state.js";

describe("navigate", () => {
  it("moves freely when clean", () => {
    const next = navigate(initialState(), "runs", () => {
      throw new Error("should not ask");
    });
    expect(next?.view).toBe("runs");
  });

  it("requires confirmation when dirty", () => {
    const dirty = { ...initialState(), dirty: true };
    expect(navigate(dirty, "flows", () => false)).toBeNull();
    const next = navigate(dirty, "flows", () => true);
    expect(next?.view).toBe("flows");
    expect(next?.dirty).toBe(false);
  });

  it("same-view navigation is a no-op", () => {
    const dirty = { ...initialState(), dirty: true };
    expect(navigate(dirty, "models", () => false)).toBe(dirty);
  });
});

describe("select", () => {
  it("guards module switches, not run selection", () => {
    const dirty = { ...initialState(), moduleId: "emb", dirty: true };
    expect(select(dirty, { moduleId: "head" }, () => false)).toBeNull();
    const runs = select(dirty, { runIds: ["r1"] }, () => false);
    expect(runs?.runIds).toEqual(["r1"]);
    expect(runs?.dirty).toBe(true);
  });
});
