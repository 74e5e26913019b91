import type { SeriesPoint } from "./types.js";

export interface ChartLayout {
  xOf: (step: number) => number;
  yOf: (value: number) => number;
  xMin: number;
  xMax: number;
  yMin: number;
  yMax: number;
}

const PAD = 28;

/** Pixel mapping for one or more series on a fixed canvas. Degenerate
 * ranges (single point, constant series) get a unit-wide window so every
 * point stays on screen. */
export function computeLayout(
  seriesList: SeriesPoint[][],
  width: number,
  height: number,
): ChartLayout {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  for (const series of seriesList) {
    for (const p of series) {
      xMin = Math.min(xMin, p.step);
      xMax = Math.max(xMax, p.step);
      yMin = Math.min(yMin, p.value);
      yMax = Math.max(yMax, p.value);
    }
  }
  if (!isFinite(xMin)) {
    xMin = 0; xMax = 1; yMin = 0; yMax = 1;
  }
  if (xMax === xMin) xMax = xMin + 1;
  if (yMax === yMin) yMax = yMin + 1;
  const xOf = (step: number) =>
    PAD + ((step - xMin) / (xMax - xMin)) * (width - 2 * PAD);
  const yOf = (value: number) =>
    height - PAD - ((value - yMin) / (yMax - yMin)) * (height - 2 * PAD);
  return { xOf, yOf, xMin, xMax, yMin, yMax };
}

const COLORS = ["#4a90d9", "#d97a4a", "#5cb85c", "#b85cb8", "#777777"];

export function drawChart(
  canvas: HTMLCanvasElement,
  seriesList: { label: string; points: SeriesPoint[] }[],
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  const layout = computeLayout(seriesList.map((s) => s.points), width, height);

  ctx.strokeStyle = "#ccc";
  ctx.strokeRect(PAD, PAD, width - 2 * PAD, height - 2 * PAD);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(layout.yMax.toPrecision(4), 2, PAD + 4);
  ctx.fillText(layout.yMin.toPrecision(4), 2, height - PAD);
  ctx.fillText(String(layout.xMin), PAD, height - 8);
  ctx.fillText(String(layout.xMax), width - PAD - 20, height - 8);

  seriesList.forEach((series, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.beginPath();
    series.points.forEach((p, j) => {
      const x = layout.xOf(p.step);
      const y = layout.yOf(p.value);
      if (j === 0) ctx.moveTo(x, y);
      else ctx.lineTo(x, y);
    });
    ctx.stroke();
    ctx.fillStyle = COLORS[i % COLORS.length];
    ctx.fillText(series.label, PAD + 4, PAD + 14 + 13 * i);
  });
}
