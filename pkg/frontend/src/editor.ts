import type { ParseErrorDoc } from "./types.js";

export interface ErrorMarker {
  editorLine: number; // 1-based line inside the edited segment
  col: number;
  code: string;
  message: string;
  hint: string;
}

/** Validation errors arrive with line numbers in whole-file coordinates;
 * the editor shows only one segment, so shift them to segment-relative
 * lines (clamped into range so a trailing error still gets a marker). */
export function markersFor(
  segmentStartLine: number,
  segmentLineCount: number,
  errors: ParseErrorDoc[],
): ErrorMarker[] {
  return errors.map((e) => {
    let editorLine = e.line - segmentStartLine + 1;
    if (editorLine < 1) editorLine = 1;
    if (editorLine > segmentLineCount) editorLine = segmentLineCount;
    return {
      editorLine,
      col: e.col,
      code: e.code,
      message: e.message,
      hint: e.hint,
    };
  });
}

export function lineCount(text: string): number {
  if (text === "") return 0;
  const n = text.split("\n").length;
  return text.endsWith("\n") ? n - 1 : n;
}
