/** Payload shapes of the analytics service. The UI renders these numbers
 * verbatim; it never re-derives any measure client-side. */

export type GroupRef = Record<string, string>;

export interface OpPayload {
  kind: "add" | "delete";
  group: GroupRef;
  label: string;
  max: number;
}

export interface FocusPayload {
  group: GroupRef;
  label: string;
}

export interface GridPayload {
  v: number;
  digest: string;
  x_op: OpPayload;
  y_op: OpPayload;
  focus: FocusPayload;
  x_values: number[];
  y_values: number[];
  /** Row-major over x then y: b[i * y_values.length + j]. */
  b: number[];
  feasible?: number[];
  contour?: Array<[number, number | null]>;
}

export interface ReportCellPayload {
  group: GroupRef;
  label: string;
  f_group: number | null;
  f_label: number | null;
  b: number | null;
  class: string;
}

export interface ReportPayload {
  v: number;
  digest: string;
  tau: number;
  cells: ReportCellPayload[];
}

export interface PlanGroupPayload {
  group: GroupRef;
  pivot: string;
  free_var: number;
  delta: Record<string, number>;
}

export interface PlanPayload {
  targets: unknown[];
  rounding: string;
  groups: PlanGroupPayload[];
  source_digest: string;
}

export type FundingStatus = "funded" | "partial" | "unfunded";

export interface FundingRecordPayload {
  group: GroupRef;
  label: string;
  requested: number;
  funded: number;
  status: FundingStatus;
  unit_cost: number;
  spent: number;
}

export interface MitigatePayload {
  v: number;
  digest: string;
  plan: PlanPayload;
  funding?: FundingRecordPayload[];
  remaining_budget?: number;
  residual?: ReportPayload;
}

export interface SummaryPayload {
  v: number;
  n: number;
  cells: unknown[];
  digest: string;
}

export interface UploadPayload {
  v: number;
  session: string;
  digest: string;
  n: number;
  excluded: number;
  summary: { n: number; cells: unknown[]; digest: string };
}

export interface ConstraintPayload {
  kind: "max_op" | "min_total" | "budget";
  axis?: "x" | "y";
  limit?: number;
  budget?: number;
}

export interface OrderEntryPayload {
  group: GroupRef;
  label?: string;
}

export interface MitigateRequest {
  targets?: unknown[];
  profile_attrs?: string[];
  rounding?: string;
  costs?: unknown;
  budget?: number;
  order?: OrderEntryPayload[];
  tau?: number;
}

export interface GridRequest {
  x_op: OpPayload;
  y_op: OpPayload;
  focus: FocusPayload;
  step?: number;
  constraints?: ConstraintPayload[];
  contour?: boolean;
}

export interface ServiceErrorPayload {
  error: string;
  detail: string;
}
