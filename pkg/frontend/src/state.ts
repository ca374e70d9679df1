/** Explorer state and its URL serialization.
 *
 * The whole view configuration round-trips through one query parameter so
 * a shared link reproduces the same scenario against the same session.
 */

import type {
  ConstraintPayload,
  FocusPayload,
  GridRequest,
  MitigateRequest,
  OpPayload,
  OrderEntryPayload,
} from "./types.js";

export interface ExplorerState {
  session: string;
  focus: FocusPayload;
  xOp: OpPayload;
  yOp: OpPayload;
  step?: number;
  tau: number;
  constraints: ConstraintPayload[];
  profileAttrs?: string[];
  budget?: number;
  order?: OrderEntryPayload[];
}

const QUERY_KEY = "view";

export function toQuery(state: ExplorerState): string {
  const params = new URLSearchParams();
  params.set(QUERY_KEY, JSON.stringify(state));
  return params.toString();
}

export function fromQuery(query: string): ExplorerState | null {
  const params = new URLSearchParams(query);
  const raw = params.get(QUERY_KEY);
  if (!raw) return null;
  const parsed = JSON.parse(raw) as ExplorerState;
  if (!parsed.session || !parsed.focus || !parsed.xOp || !parsed.yOp) {
    throw new Error("incomplete explorer state in URL");
  }
  return parsed;
}

export function gridRequest(state: ExplorerState): GridRequest {
  return {
    x_op: state.xOp,
    y_op: state.yOp,
    focus: state.focus,
    step: state.step,
    constraints: state.constraints,
    contour: true,
  };
}

export function mitigateRequest(state: ExplorerState): MitigateRequest {
  return {
    profile_attrs: state.profileAttrs,
    budget: state.budget,
    order: state.order,
    tau: state.tau,
  };
}

export function withBudget(state: ExplorerState, budget: number): ExplorerState {
  return { ...state, budget };
}

export function withOrder(
  state: ExplorerState,
  order: OrderEntryPayload[],
): ExplorerState {
  return { ...state, order };
}

export function withTau(state: ExplorerState, tau: number): ExplorerState {
  if (tau < 0) throw new RangeError("tolerance must be non-negative");
  return { ...state, tau };
}
