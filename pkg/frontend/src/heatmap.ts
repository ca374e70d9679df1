/** Pure view model for the bias surface heatmap.
 *
 * Cell values are copied verbatim from the service payload (the fidelity
 * tests compare them with Object.is); the only client-side arithmetic is
 * mapping values to colors and computing the displayed row count from
 * service-provided totals.
 */

import type { ConstraintPayload, GridPayload } from "./types.js";

export type CellClass = "against" | "in_favor" | "fair";

export interface HeatmapCell {
  x: number;
  y: number;
  /** Bias value exactly as served. */
  b: number;
  feasible: boolean;
  color: string;
  cellClass: CellClass;
}

export interface ConstraintLine {
  axis: "x" | "y";
  value: number;
}

export interface HeatmapModel {
  xValues: number[];
  yValues: number[];
  /** cells[i][j] corresponds to (x_values[i], y_values[j]). */
  cells: HeatmapCell[][];
  maxAbs: number;
  tau: number;
  contour: Array<{ x: number; y: number }>;
  constraintLines: ConstraintLine[];
}

export function classify(b: number, tau: number): CellClass {
  if (b > tau) return "against";
  if (b < -tau) return "in_favor";
  return "fair";
}

/** Diverging scale anchored at the grid's +-max|b| with a hard white band
 * inside the tolerance: red against the focus group, blue in its favor. */
export function divergingColor(b: number, maxAbs: number, tau: number): string {
  const cls = classify(b, tau);
  if (cls === "fair" || maxAbs === 0) return "rgb(255,255,255)";
  const t = Math.min(Math.abs(b) / maxAbs, 1);
  const channel = Math.round(255 * (1 - t));
  return cls === "against"
    ? `rgb(255,${channel},${channel})`
    : `rgb(${channel},${channel},255)`;
}

export function buildHeatmapModel(
  payload: GridPayload,
  tau: number,
  constraints: ConstraintPayload[] = [],
): HeatmapModel {
  const nx = payload.x_values.length;
  const ny = payload.y_values.length;
  if (payload.b.length !== nx * ny) {
    throw new Error(
      `grid payload is inconsistent: ${payload.b.length} values for ${nx}x${ny} lattice`,
    );
  }
  let maxAbs = 0;
  for (const value of payload.b) {
    const magnitude = Math.abs(value);
    if (magnitude > maxAbs) maxAbs = magnitude;
  }
  const cells: HeatmapCell[][] = [];
  for (let i = 0; i < nx; i++) {
    const row: HeatmapCell[] = [];
    for (let j = 0; j < ny; j++) {
      const b = payload.b[i * ny + j];
      const feasible = payload.feasible ? payload.feasible[i * ny + j] === 1 : true;
      row.push({
        x: payload.x_values[i],
        y: payload.y_values[j],
        b,
        feasible,
        color: divergingColor(b, maxAbs, tau),
        cellClass: classify(b, tau),
      });
    }
    cells.push(row);
  }
  const contour = (payload.contour ?? [])
    .filter((point): point is [number, number] => point[1] !== null)
    .map(([x, y]) => ({ x, y }));
  const constraintLines: ConstraintLine[] = [];
  for (const constraint of constraints) {
    if (constraint.kind === "max_op" && constraint.axis && constraint.limit !== undefined) {
      constraintLines.push({ axis: constraint.axis, value: constraint.limit });
    }
  }
  return {
    xValues: payload.x_values,
    yValues: payload.y_values,
    cells,
    maxAbs,
    tau,
    contour,
    constraintLines,
  };
}

export interface HoverInfo {
  x: number;
  y: number;
  b: number;
  feasible: boolean;
  resultingN: number;
}

/** Hover readout for one cell. The resulting row count combines the
 * uploaded dataset's total with the two ops' signed step counts, all of
 * which came from service responses. */
export function hoverInfo(
  model: HeatmapModel,
  payload: GridPayload,
  baseTotal: number,
  i: number,
  j: number,
): HoverInfo {
  const cell = model.cells[i][j];
  const sx = payload.x_op.kind === "add" ? 1 : -1;
  const sy = payload.y_op.kind === "add" ? 1 : -1;
  return {
    x: cell.x,
    y: cell.y,
    b: cell.b,
    feasible: cell.feasible,
    resultingN: baseTotal + sx * cell.x + sy * cell.y,
  };
}
