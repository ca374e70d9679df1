/** Wire the explorer together: controls issue service requests; responses
 * repaint the surface and the plan inspector. Superseded requests are
 * aborted by the API client, so the view always shows the latest answer. */

import { ApiClient, ApiError } from "./api.js";
import {
  paintHeatmap,
  renderHover,
  renderInspector,
  renderPinned,
  wirePriorityList,
} from "./dom.js";
import { buildHeatmapModel, hoverInfo } from "./heatmap.js";
import { buildInspectorModel } from "./planInspector.js";
import {
  ExplorerState,
  fromQuery,
  gridRequest,
  mitigateRequest,
  toQuery,
  withBudget,
  withOrder,
  withTau,
} from "./state.js";
import type { GridPayload } from "./types.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function boot(baseUrl = ""): void {
  const api = new ApiClient(baseUrl);
  let state: ExplorerState | null = fromQuery(window.location.search);
  let lastGrid: GridPayload | null = null;
  let baseTotal = 0;

  const canvas = el<HTMLCanvasElement>("surface");
  const hover = el<HTMLElement>("hover");
  const pinned = el<HTMLElement>("pinned");
  const inspector = el<HTMLTableElement>("inspector");
  const priorityList = el<HTMLElement>("priority");
  const errorBox = el<HTMLElement>("error");
  const tauInput = el<HTMLInputElement>("tau");
  const budgetInput = el<HTMLInputElement>("budget");

  function showError(error: unknown): void {
    if (error instanceof DOMException && error.name === "AbortError") return;
    errorBox.textContent =
      error instanceof ApiError ? `${error.code}: ${error.detail}` : String(error);
  }

  async function refreshGrid(): Promise<void> {
    if (!state) return;
    errorBox.textContent = "";
    try {
      lastGrid = await api.grid(state.session, gridRequest(state));
      const model = buildHeatmapModel(lastGrid, state.tau, state.constraints);
      paintHeatmap(canvas, model);
      const cellAt = (event: MouseEvent) => {
        const nx = model.xValues.length;
        const ny = model.yValues.length;
        const i = Math.min(nx - 1, Math.floor((event.offsetX / canvas.width) * nx));
        const j = Math.min(
          ny - 1,
          Math.floor(((canvas.height - event.offsetY) / canvas.height) * ny),
        );
        return hoverInfo(model, lastGrid!, baseTotal, i, j);
      };
      canvas.onmousemove = (event) => renderHover(hover, cellAt(event));
      canvas.onclick = (event) => renderPinned(pinned, cellAt(event));
    } catch (error) {
      showError(error);
    }
  }

  async function refreshPlan(): Promise<void> {
    if (!state) return;
    try {
      const payload = await api.mitigate(state.session, mitigateRequest(state));
      renderInspector(inspector, buildInspectorModel(payload));
      if (state.order) {
        wirePriorityList(priorityList, state.order, (next) => {
          if (!state) return;
          state = withOrder(state, next);
          pushUrl();
          void refreshPlan();
        });
      }
    } catch (error) {
      showError(error);
    }
  }

  function pushUrl(): void {
    if (!state) return;
    window.history.replaceState(null, "", `?${toQuery(state)}`);
  }

  tauInput.addEventListener("change", () => {
    if (!state) return;
    state = withTau(state, Number(tauInput.value));
    pushUrl();
    void refreshGrid();
  });
  budgetInput.addEventListener("change", () => {
    if (!state) return;
    state = withBudget(state, Number(budgetInput.value));
    pushUrl();
    void refreshPlan();
  });

  if (state) {
    tauInput.value = String(state.tau);
    if (state.budget !== undefined) budgetInput.value = String(state.budget);
    void api
      .summary(state.session)
      .then((summary) => {
        baseTotal = summary.n;
        return Promise.all([refreshGrid(), refreshPlan()]);
      })
      .catch(showError);
  }
  // session upload wiring (file inputs) lives in the host page; it calls
  // window.fairtabBoot again with the new session in the URL
}

declare global {
  interface Window {
    fairtabBoot: typeof boot;
  }
}

if (typeof window !== "undefined") {
  window.fairtabBoot = boot;
}
