/** Thin DOM bindings: paint a heatmap model onto a canvas, fill the plan
 * inspector table, and wire drag-to-reorder on the priority list. All
 * numbers shown come from the models verbatim. */

import type { HeatmapModel, HoverInfo } from "./heatmap.js";
import type { InspectorModel } from "./planInspector.js";
import { statusBadge } from "./planInspector.js";
import type { OrderEntryPayload } from "./types.js";
import { groupText } from "./planInspector.js";

export function paintHeatmap(canvas: HTMLCanvasElement, model: HeatmapModel): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const nx = model.xValues.length;
  const ny = model.yValues.length;
  const cw = canvas.width / nx;
  const ch = canvas.height / ny;
  for (let i = 0; i < nx; i++) {
    for (let j = 0; j < ny; j++) {
      const cell = model.cells[i][j];
      // y axis grows upward
      const py = canvas.height - (j + 1) * ch;
      ctx.fillStyle = cell.color;
      ctx.fillRect(i * cw, py, Math.ceil(cw), Math.ceil(ch));
      if (!cell.feasible) {
        ctx.fillStyle = "rgba(64,64,64,0.35)";
        ctx.fillRect(i * cw, py, Math.ceil(cw), Math.ceil(ch));
      }
    }
  }
  const xMax = model.xValues[nx - 1] || 1;
  const yMax = model.yValues[ny - 1] || 1;
  ctx.strokeStyle = "#000";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  model.contour.forEach((point, index) => {
    const px = (point.x / xMax) * canvas.width;
    const py = canvas.height - (point.y / yMax) * canvas.height;
    if (index === 0) ctx.moveTo(px, py);
    else ctx.lineTo(px, py);
  });
  ctx.stroke();
  ctx.strokeStyle = "#333";
  ctx.setLineDash([6, 4]);
  for (const line of model.constraintLines) {
    ctx.beginPath();
    if (line.axis === "x") {
      const px = (line.value / xMax) * canvas.width;
      ctx.moveTo(px, 0);
      ctx.lineTo(px, canvas.height);
    } else {
      const py = canvas.height - (line.value / yMax) * canvas.height;
      ctx.moveTo(0, py);
      ctx.lineTo(canvas.width, py);
    }
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

export function formatScenario(info: HoverInfo): string {
  return (
    `x=${info.x} y=${info.y} b=${info.b} ` +
    `${info.feasible ? "feasible" : "infeasible"} n=${info.resultingN}`
  );
}

export function renderHover(target: HTMLElement, info: HoverInfo): void {
  target.textContent = formatScenario(info);
}

export function renderPinned(target: HTMLElement, info: HoverInfo | null): void {
  target.textContent = info === null ? "" : `pinned scenario: ${formatScenario(info)}`;
}

export function renderInspector(table: HTMLTableElement, model: InspectorModel): void {
  const body = table.tBodies[0] ?? table.createTBody();
  body.replaceChildren();
  for (const row of model.rows) {
    const tr = body.insertRow();
    for (const value of [
      row.groupText,
      row.label,
      String(row.requested),
      String(row.funded),
      statusBadge(row.status),
      String(row.spent),
    ]) {
      tr.insertCell().textContent = value;
    }
    tr.dataset.status = row.status;
  }
  const footer = table.tFoot ?? table.createTFoot();
  footer.replaceChildren();
  const totals = footer.insertRow();
  totals.insertCell().textContent = "total";
  totals.insertCell().textContent = "";
  totals.insertCell().textContent = String(model.totalRequested);
  totals.insertCell().textContent = String(model.totalFunded);
  totals.insertCell().textContent = model.fullyFunded ? "fully funded" : "";
  totals.insertCell().textContent =
    model.remainingBudget === null ? "" : `remaining ${model.remainingBudget}`;
}

export function wirePriorityList(
  list: HTMLElement,
  order: OrderEntryPayload[],
  onReorder: (next: OrderEntryPayload[]) => void,
): void {
  list.replaceChildren();
  order.forEach((entry, index) => {
    const item = document.createElement("li");
    item.textContent = groupText(entry.group) + (entry.label ? `:${entry.label}` : "");
    item.draggable = true;
    item.dataset.index = String(index);
    item.addEventListener("dragstart", (event) => {
      event.dataTransfer?.setData("text/plain", String(index));
    });
    item.addEventListener("dragover", (event) => event.preventDefault());
    item.addEventListener("drop", (event) => {
      event.preventDefault();
      const from = Number(event.dataTransfer?.getData("text/plain"));
      const to = index;
      if (Number.isInteger(from) && from !== to) {
        const next = order.slice();
        const [moved] = next.splice(from, 1);
        next.splice(to, 0, moved);
        onReorder(next);
      }
    });
    list.appendChild(item);
  });
}
