/** View model for the mitigation plan inspector: per-cell additions with
 * their funding outcome under the current budget, plus the drag-reorderable
 * priority list that drives re-requests. */

import type {
  FundingRecordPayload,
  GroupRef,
  MitigatePayload,
  OrderEntryPayload,
  ReportCellPayload,
} from "./types.js";

export interface InspectorRow {
  groupText: string;
  label: string;
  requested: number;
  funded: number;
  status: "funded" | "partial" | "unfunded";
  unitCost: number;
  spent: number;
}

export interface InspectorModel {
  rows: InspectorRow[];
  totalRequested: number;
  totalFunded: number;
  totalSpent: number;
  remainingBudget: number | null;
  residual: ReportCellPayload[];
  fullyFunded: boolean;
}

export function groupText(group: GroupRef): string {
  return Object.entries(group)
    .map(([attr, value]) => `${attr}=${value}`)
    .join(",") || "(all)";
}

function toRow(record: FundingRecordPayload): InspectorRow {
  return {
    groupText: groupText(record.group),
    label: record.label,
    requested: record.requested,
    funded: record.funded,
    status: record.status,
    unitCost: record.unit_cost,
    spent: record.spent,
  };
}

export function buildInspectorModel(payload: MitigatePayload): InspectorModel {
  const funding = payload.funding ?? [];
  const rows = funding.map(toRow);
  const totalRequested = rows.reduce((acc, row) => acc + row.requested, 0);
  const totalFunded = rows.reduce((acc, row) => acc + row.funded, 0);
  const totalSpent = rows.reduce((acc, row) => acc + row.spent, 0);
  return {
    rows,
    totalRequested,
    totalFunded,
    totalSpent,
    remainingBudget: payload.remaining_budget ?? null,
    residual: payload.residual?.cells ?? [],
    fullyFunded: rows.length > 0 && rows.every((row) => row.funded === row.requested),
  };
}

/** Move one priority entry; returns a new order for the next request. */
export function reorder(
  order: OrderEntryPayload[],
  from: number,
  to: number,
): OrderEntryPayload[] {
  if (from < 0 || from >= order.length || to < 0 || to >= order.length) {
    throw new RangeError(`cannot move entry ${from} to ${to}`);
  }
  const next = order.slice();
  const [moved] = next.splice(from, 1);
  next.splice(to, 0, moved);
  return next;
}

export function statusBadge(status: InspectorRow["status"]): string {
  switch (status) {
    case "funded":
      return "✓ funded";
    case "partial":
      return "◑ partial";
    case "unfunded":
      return "✗ unfunded";
  }
}
