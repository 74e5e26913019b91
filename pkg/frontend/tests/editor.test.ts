import { describe, expect, it } from "vitest";

import { lineCount, markersFor } from "../src/editor.js";

describe("markersFor", () => {
  it("shifts whole-file line numbers to segment-relative ones", () => {
    const markers = markersFor(3, 1, [{
      code: "E002", line: 3, col: 1,
      message: "bad indentation",
      hint: "use 4-space indentation",
    }]);
    expect(markers).toEqual([{
      editorLine: 1, col: 1, code: "E002",
      message: "bad indentation", hint: "use 4-space indentation",
    }]);
  });

  it("clamps out-of-range lines into the segment", () => {
    const errors = [
      { code: "E001", line: 1, col: 1, message: "x", hint: "h" },
      { code: "E001", line: 99, col: 1, message: "y", hint: "h" },
    ];
    const markers = markersFor(5, 3, errors);
    expect(markers.map((m) => m.editorLine)).toEqual([1, 3]);
  });
});

describe("lineCount", () => {
  it("counts newline-terminated segments", () => {
    expect(lineCount("")).toBe(0);
    expect(lineCount("a\n")).toBe(1);
    expect(lineCount("a\nb\n")).toBe(2);
    expect(lineCount("a\nb")).toBe(2);
  });
});
