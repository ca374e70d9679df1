import { describe, expect, it } from "vitest";

import {
  buildHeatmapModel,
  classify,
  divergingColor,
  hoverInfo,
} from "../src/heatmap.js";
import type { GridPayload } from "../src/types.js";

import gridFixture from "./fixtures/grid_adult.json";

const grid = gridFixture as unknown as GridPayload;

describe("heatmap model", () => {
  it("reproduces the service payload bit-for-bit", () => {
    const model = buildHeatmapModel(grid, 0.1);
    const ny = grid.y_values.length;
    let compared = 0;
    for (let i = 0; i < grid.x_values.length; i++) {
      for (let j = 0; j < ny; j++) {
        expect(Object.is(model.cells[i][j].b, grid.b[i * ny + j])).toBe(true);
        compared += 1;
      }
    }
    expect(compared).toBe(grid.b.length);
  });

  it("keeps the feasibility mask verbatim", () => {
    const model = buildHeatmapModel(grid, 0.1);
    const ny = grid.y_values.length;
    const feasible = grid.feasible!;
    for (let i = 0; i < grid.x_values.length; i++) {
      for (let j = 0; j < ny; j++) {
        expect(model.cells[i][j].feasible).toBe(feasible[i * ny + j] === 1);
      }
    }
    // the availability caps leave the lower-left rectangle feasible
    expect(model.cells[0][0].feasible).toBe(true);
    const lastX = grid.x_values.length - 1;
    const lastY = ny - 1;
    expect(model.cells[lastX][0].feasible).toBe(false);
    expect(model.cells[0][lastY].feasible).toBe(false);
  });

  it("copies the zero-bias contour from the payload", () => {
    const model = buildHeatmapModel(grid, 0.1);
    const source = (grid.contour ?? []).filter(([, y]) => y !== null);
    expect(model.contour.length).toBe(source.length);
    model.contour.forEach((point, index) => {
      expect(point.x).toBe(source[index][0]);
      expect(Object.is(point.y, source[index][1])).toBe(true);
    });
    const at4500 = model.contour.find((point) => point.x === 4500);
    expect(at4500).toBeDefined();
    expect(at4500!.y).toBeGreaterThanOrEqual(2076);
    expect(at4500!.y).toBeLessThanOrEqual(2078);
  });

  it("classifies against the tolerance band", () => {
    expect(classify(0.3, 0.1)).toBe("against");
    expect(classify(-0.3, 0.1)).toBe("in_favor");
    expect(classify(0.05, 0.1)).toBe("fair");
    expect(classify(0.1, 0.1)).toBe("fair"); // band is inclusive
  });

  it("renders an all-white surface when the tolerance covers everything", () => {
    const model = buildHeatmapModel(grid, 1.0);
    for (const row of model.cells) {
      for (const cell of row) {
        expect(cell.cellClass).toBe("fair");
        expect(cell.color).toBe("rgb(255,255,255)");
      }
    }
  });

  it("uses a diverging scale anchored at the grid maximum", () => {
    const model = buildHeatmapModel(grid, 0.0);
    const origin = model.cells[0][0];
    expect(origin.cellClass).toBe("against");
    expect(origin.color.startsWith("rgb(255,")).toBe(true);
    // the most biased cell saturates fully
    expect(divergingColor(model.maxAbs, model.maxAbs, 0)).toBe("rgb(255,0,0)");
    expect(divergingColor(-model.maxAbs, model.maxAbs, 0)).toBe("rgb(0,0,255)");
  });

  it("derives constraint lines from the request constraints", () => {
    const model = buildHeatmapModel(grid, 0.1, [
      { kind: "max_op", axis: "x", limit: 4500 },
      { kind: "max_op", axis: "y", limit: 3000 },
      { kind: "min_total", limit: 30000 },
    ]);
    expect(model.constraintLines).toEqual([
      { axis: "x", value: 4500 },
      { axis: "y", value: 3000 },
    ]);
  });

  it("rejects inconsistent payloads", () => {
    const broken = { ...grid, b: grid.b.slice(0, 5) };
    expect(() => buildHeatmapModel(broken, 0.1)).toThrow(/inconsistent/);
  });

  it("hover combines cell values with the uploaded total", () => {
    const model = buildHeatmapModel(grid, 0.1);
    const info = hoverInfo(model, grid, 32561, 2, 3);
    expect(info.x).toBe(grid.x_values[2]);
    expect(info.y).toBe(grid.y_values[3]);
    expect(Object.is(info.b, model.cells[2][3].b)).toBe(true);
    // both ops add rows, so the resulting total grows by x + y
    expect(info.resultingN).toBe(32561 + info.x + info.y);
  });
});
