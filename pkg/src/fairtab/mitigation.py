"""Tuple-addition planning that drives a summary to target group rates.

For each base group the per-label additions solve the proportionality
system: pick the pivot label i maximizing count_i / weight_i (weights are
label totals, scaled by the per-cell targets when those are not 1), keep
the pivot cell as the free variable, and set every other cell to

    floor(weight_y / weight_i * (count_i + free)).

The pivot choice guarantees all additions are non-negative; free = 0 gives
the minimal plan. Flooring leaves each cell less than one tuple away from
exact proportionality, and the label frequencies of the whole table are
preserved up to the same slack. A nearest-integer rounding variant exists
behind the ``rounding`` flag.

Deletions are an explicit preprocessing edit, and a greedy budget allocator
funds plan cells in caller priority order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Mapping, Sequence

from .errors import (
    DigestMismatch,
    EmptyLabel,
    InfeasibleTargets,
    InvalidTargets,
    SchemaMismatch,
    ValidationError,
)
from .measures import UNDEFINED, BiasCell, BiasReport, _classify, nearest_int
from .schema import FairnessSchema, GroupKey
from .summary import SummaryTable

Rounding = Literal["floor", "nearest"]

#: Tolerance on the per-group identity sum(K_y * f_y) == 1.
IDENTITY_TOL = Fraction(1, 10**9)


def _round(x: Fraction, rounding: Rounding) -> int:
    if rounding == "floor":
        return x.numerator // x.denominator
    if rounding == "nearest":
        return nearest_int(x)
    raise ValidationError(f"unknown rounding mode {rounding!r}")


@dataclass(frozen=True)
class KTargets:
    """Per-(group, label) target ratios of group rate to population rate.

    The default all-ones targets demand exact rate parity. Any other choice
    must satisfy, for every base group s, sum_y K[s,y] * f_y = 1, where f_y
    are the source summary's label frequencies; otherwise no addition-only
    table can hit the targets.
    """

    schema: FairnessSchema
    values: Mapping[tuple[tuple[str, ...], str], Fraction] = field(default_factory=dict)

    def k(self, base: tuple[str, ...], label: str) -> Fraction:
        return self.values.get((tuple(base), label), Fraction(1))

    @property
    def is_uniform(self) -> bool:
        return all(v == 1 for v in self.values.values())

    @classmethod
    def uniform(cls, schema: FairnessSchema) -> "KTargets":
        return cls(schema, {})

    @classmethod
    def from_mapping(
        cls,
        schema: FairnessSchema,
        values: Mapping[tuple[tuple[str, ...], str], float | str | Fraction],
    ) -> "KTargets":
        clean: dict[tuple[tuple[str, ...], str], Fraction] = {}
        for (base, label), v in values.items():
            key = GroupKey(tuple(base))
            key.validate(schema)
            if not key.is_base:
                raise InvalidTargets("targets must be keyed by base groups")
            if label not in schema.label_values:
                raise InvalidTargets(f"unknown label {label!r} in targets")
            frac = Fraction(str(v)) if isinstance(v, float) else Fraction(v)
            if frac <= 0:
                raise InvalidTargets(f"target for ({base}, {label}) must be positive")
            clean[(tuple(base), label)] = frac
        return cls(schema, clean)

    @classmethod
    def group_profile(cls, summary: SummaryTable, attrs: Sequence[str]) -> "KTargets":
        """Targets that preserve each group's marginal profile over ``attrs``.

        For every base group, K[s,y] = f_{proj(s),y} / f_y where proj keeps
        only the named attributes; mitigated groups then match the label
        profile their marginal group already has. The consistency identity
        holds exactly by construction.
        """
        schema = summary.schema
        names = schema.attribute_names
        positions = []
        for attr in attrs:
            if attr not in names:
                raise ValidationError(f"unknown sensitive attribute {attr!r}")
            positions.append(names.index(attr))
        values: dict[tuple[tuple[str, ...], str], Fraction] = {}
        for base in summary.base_groups():
            marginal = GroupKey(
                tuple(v if i in positions else None for i, v in enumerate(base))
            )
            m_total = summary.group_count(marginal)
            for label in schema.label_values:
                n_label = summary.label_total(label)
                if n_label == 0:
                    raise EmptyLabel(f"label {label!r} has no tuples")
                m_label = summary.group_count(marginal, label)
                # (m_label/m_total) / (n_label/n)
                values[(base, label)] = Fraction(
                    m_label * summary.n, m_total * n_label
                )
        return cls(schema, values)

    def validate(self, summary: SummaryTable) -> None:
        """Check the per-group identity against the summary's frequencies."""
        for base in summary.base_groups():
            total = Fraction(0)
            for label in self.schema.label_values:
                total += self.k(base, label) * summary.label_frequency(label)
            if abs(total - 1) > IDENTITY_TOL:
                raise InvalidTargets(
                    f"targets for group {base} sum to {float(total):.12f} "
                    "(weighted by label frequencies) instead of 1"
                )

    def to_json(self) -> list[dict]:
        return [
            {
                "group": GroupKey(base).to_json(self.schema),
                "label": label,
                "k": [v.numerator, v.denominator],
            }
            for (base, label), v in sorted(self.values.items())
        ]

    @classmethod
    def from_json(cls, schema: FairnessSchema, doc) -> "KTargets":
        values: dict[tuple[tuple[str, ...], str], Fraction] = {}
        try:
            for entry in doc:
                key = GroupKey.from_json(schema, entry["group"])
                k = entry["k"]
                frac = Fraction(k[0], k[1]) if isinstance(k, list) else Fraction(str(k))
                values[(key.entries, entry["label"])] = frac  # type: ignore[index]
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidTargets(f"malformed targets document: {exc}") from exc
        return cls.from_mapping(schema, values)


@dataclass(frozen=True)
class CostModel:
    """Per-cell acquisition costs and an overall budget."""

    costs: Mapping[tuple[tuple[str, ...], str], float] = field(default_factory=dict)
    default_cost: float = 1.0
    budget: float = 0.0

    def cost(self, base: tuple[str, ...], label: str) -> float:
        return float(self.costs.get((tuple(base), label), self.default_cost))

    @classmethod
    def from_json(cls, schema: FairnessSchema, doc: Mapping) -> "CostModel":
        costs: dict[tuple[tuple[str, ...], str], float] = {}
        for entry in doc.get("costs", []):
            key = GroupKey.from_json(schema, entry["group"])
            costs[(key.entries, entry["label"])] = float(entry["cost"])  # type: ignore[index]
        return cls(costs, float(doc.get("default_cost", 1.0)), float(doc.get("budget", 0.0)))


@dataclass(frozen=True)
class PlanEntry:
    """Additions for one base group."""

    group: tuple[str, ...]
    pivot: str
    delta: Mapping[str, int]
    free_var: int = 0

    @property
    def total(self) -> int:
        return sum(self.delta.values())


@dataclass(frozen=True)
class MitigationPlan:
    """Per-group addition vectors plus the targets they satisfy."""

    schema: FairnessSchema
    entries: tuple[PlanEntry, ...]
    targets: KTargets
    source_digest: str
    rounding: Rounding = "floor"

    @property
    def total_additions(self) -> int:
        return sum(e.total for e in self.entries)

    def delta(self, base: tuple[str, ...], label: str) -> int:
        for e in self.entries:
            if e.group == tuple(base):
                return e.delta.get(label, 0)
        return 0

    def additions(self) -> dict[tuple[tuple[str, ...], str], int]:
        out: dict[tuple[tuple[str, ...], str], int] = {}
        for e in self.entries:
            for label, d in e.delta.items():
                if d:
                    out[(e.group, label)] = d
        return out

    def to_json(self) -> dict:
        return {
            "targets": self.targets.to_json(),
            "rounding": self.rounding,
            "groups": [
                {
                    "group": GroupKey(e.group).to_json(self.schema),
                    "pivot": e.pivot,
                    "free_var": e.free_var,
                    "delta": {label: e.delta.get(label, 0) for label in self.schema.label_values},
                }
                for e in self.entries
            ],
            "source_digest": self.source_digest,
        }

    @classmethod
    def from_json(cls, schema: FairnessSchema, doc: Mapping) -> "MitigationPlan":
        try:
            entries = []
            for g in doc["groups"]:
                key = GroupKey.from_json(schema, g["group"])
                delta = {label: int(v) for label, v in g["delta"].items()}
                if any(v < 0 for v in delta.values()):
                    raise ValidationError("plan deltas must be non-negative")
                entries.append(
                    PlanEntry(key.entries, g["pivot"], delta, int(g.get("free_var", 0)))  # type: ignore[arg-type]
                )
            targets = KTargets.from_json(schema, doc.get("targets", []))
            return cls(
                schema,
                tuple(entries),
                targets,
                str(doc["source_digest"]),
                doc.get("rounding", "floor"),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed plan document: {exc}") from exc

    @classmethod
    def from_cell_deltas(
        cls,
        summary: SummaryTable,
        deltas: Mapping[tuple[tuple[str, ...], str], int],
        targets: KTargets | None = None,
    ) -> "MitigationPlan":
        """Wrap explicit per-cell addition counts as a plan against ``summary``."""
        targets = targets or KTargets.uniform(summary.schema)
        grouped: dict[tuple[str, ...], dict[str, int]] = {}
        for (base, label), d in deltas.items():
            if d < 0:
                raise ValidationError("plan deltas must be non-negative")
            grouped.setdefault(tuple(base), {})[label] = d
        entries = []
        for base in summary.base_groups():
            delta = grouped.pop(tuple(base), {})
            entries.append(PlanEntry(tuple(base), pivot_label(summary, GroupKey(base), targets), delta))
        for base, delta in grouped.items():
            entries.append(PlanEntry(base, summary.schema.label_values[0], delta))
        return cls(summary.schema, tuple(entries), targets, summary.digest)


@dataclass(frozen=True)
class EditSet:
    """Additions (from a plan, possibly partially funded) plus deletions."""

    additions: Mapping[tuple[tuple[str, ...], str], int] = field(default_factory=dict)
    deletions: Mapping[tuple[tuple[str, ...], str], int] = field(default_factory=dict)


def _weights(
    summary: SummaryTable, base: tuple[str, ...], targets: KTargets
) -> dict[str, Fraction]:
    """Per-label proportionality weights K[s,y] * n^y (all must be positive)."""
    weights = {}
    for label in summary.schema.label_values:
        n_label = summary.label_total(label)
        if n_label == 0:
            raise EmptyLabel(f"label {label!r} has no tuples")
        weights[label] = targets.k(base, label) * n_label
    return weights


def pivot_label(
    summary: SummaryTable, group: GroupKey, targets: KTargets | None = None
) -> str:
    """Label maximizing count / (K * label_total) for the group; this is the
    free variable of the addition system and makes every delta non-negative.
    Ties break toward the schema's label order."""
    group.validate(summary.schema)
    if not group.is_base:
        raise ValidationError("pivot is defined for base groups only")
    targets = targets or KTargets.uniform(summary.schema)
    base = group.entries  # type: ignore[assignment]
    weights = _weights(summary, base, targets)
    best_label = None
    best_ratio: Fraction | None = None
    for label in summary.schema.label_values:
        ratio = Fraction(summary.cell(base, label)) / weights[label]
        if best_ratio is None or ratio > best_ratio:
            best_label, best_ratio = label, ratio
    assert best_label is not None
    return best_label


def general_solution(
    summary: SummaryTable,
    group: GroupKey,
    free_var: int,
    targets: KTargets | None = None,
    rounding: Rounding = "floor",
) -> dict[str, int]:
    """Additions for one group given the pivot cell's free variable.

    The pivot cell gains exactly ``free_var`` tuples; every other label y is
    topped up to round(weight_y / weight_pivot * (pivot_count + free_var)).
    All outputs are non-negative by the pivot choice.
    """
    if free_var < 0 or not isinstance(free_var, int):
        raise ValidationError("free_var must be a non-negative integer")
    group.validate(summary.schema)
    if not group.is_base:
        raise ValidationError("solutions are defined for base groups only")
    targets = targets or KTargets.uniform(summary.schema)
    base = group.entries  # type: ignore[assignment]
    weights = _weights(summary, base, targets)
    pivot = pivot_label(summary, group, targets)
    pivot_mit = summary.cell(base, pivot) + free_var
    delta: dict[str, int] = {}
    for label in summary.schema.label_values:
        if label == pivot:
            delta[label] = free_var
            continue
        mitigated = _round(weights[label] / weights[pivot] * pivot_mit, rounding)
        d = mitigated - summary.cell(base, label)
        if d < 0:
            # cannot happen with the argmax pivot and floor; guard the
            # nearest-rounding variant against half-step undershoot
            d = 0
        delta[label] = d
    return delta


def minimal_mitigation(
    summary: SummaryTable,
    targets: KTargets | None = None,
    rounding: Rounding = "floor",
) -> MitigationPlan:
    """The least-addition plan: every group's free variable is zero."""
    if summary.n == 0:
        raise ValidationError("cannot mitigate an empty summary")
    targets = targets or KTargets.uniform(summary.schema)
    targets.validate(summary)
    entries = []
    for base in summary.base_groups():
        group = GroupKey(base)
        pivot = pivot_label(summary, group, targets)
        delta = general_solution(summary, group, 0, targets, rounding)
        entries.append(PlanEntry(base, pivot, delta, 0))
    return MitigationPlan(summary.schema, tuple(entries), targets, summary.digest, rounding)


def mitigate_with_targets(
    summary: SummaryTable,
    targets: KTargets,
    rounding: Rounding = "floor",
) -> MitigationPlan:
    """Minimal plan driving every group rate to K[s,y] times the population rate."""
    for base in summary.base_groups():
        for label in summary.schema.label_values:
            share = targets.k(base, label) * summary.label_frequency(label)
            if share > 1:
                raise InvalidTargets(
                    f"target share K*f = {float(share):.6f} exceeds 1 for "
                    f"({base}, {label}); no group can spend more than all of "
                    "its tuples on one label"
                )
    plan = minimal_mitigation(summary, targets, rounding)
    for entry in plan.entries:
        if any(d < 0 for d in entry.delta.values()):  # pragma: no cover - defensive
            raise InfeasibleTargets(f"negative addition for group {entry.group}")
    return plan


def apply_plan(summary: SummaryTable, plan: MitigationPlan) -> SummaryTable:
    """Cell-wise application of a plan's additions."""
    if plan.source_digest != summary.digest:
        raise DigestMismatch("plan was computed against a different summary")
    return summary.with_edits(additions=plan.additions())


def apply_deletions(
    summary: SummaryTable, deletions: Mapping[tuple[tuple[str, ...], str], int]
) -> SummaryTable:
    """Remove tuples cell-wise (a preprocessing edit before planning)."""
    return summary.with_edits(deletions=deletions)


def verify_label_frequency_preservation(
    before: SummaryTable, after: SummaryTable, tol: float | None = None
) -> tuple[bool, float]:
    """Whether every label frequency moved by at most ``tol``.

    The default tolerance is the rounding-slack bound
    (k * number of base groups) / n_after: each cell contributes less than
    one tuple of flooring error.
    """
    if before.schema != after.schema:
        raise SchemaMismatch("summaries use different schemas")
    if after.n == 0 or before.n == 0:
        raise ValidationError("label frequencies are undefined for empty tables")
    if tol is None:
        tol_frac = Fraction(
            before.schema.k * len(after.base_groups()), after.n
        )
    else:
        tol_frac = Fraction(str(tol))
    worst = Fraction(0)
    for label in before.schema.label_values:
        dev = abs(after.label_frequency(label) - before.label_frequency(label))
        worst = max(worst, dev)
    return worst <= tol_frac, float(worst)


@dataclass(frozen=True)
class FundingRecord:
    """How far the budget got on one plan cell."""

    group: tuple[str, ...]
    label: str
    requested: int
    funded: int
    unit_cost: float
    spent: float

    @property
    def status(self) -> str:
        if self.funded == 0 and self.requested > 0:
            return "unfunded"
        if self.funded < self.requested:
            return "partial"
        return "funded"


@dataclass(frozen=True)
class BudgetedOutcome:
    funded: tuple[FundingRecord, ...]
    edits: EditSet
    residual: BiasReport
    remaining_budget: float

    def record(self, base: tuple[str, ...], label: str) -> FundingRecord:
        for r in self.funded:
            if r.group == tuple(base) and r.label == label:
                return r
        raise ValidationError(f"no funding record for ({base}, {label})")


def expand_order(
    plan: MitigationPlan, order: Sequence[tuple[GroupKey, str | None]]
) -> list[tuple[tuple[str, ...], str]]:
    """Resolve an order of (possibly wildcard) keys into concrete plan cells.

    A wildcard key covers every matching plan group; a None label covers all
    labels. First mention wins; cells the order never mentions stay unfunded.
    """
    seen: set[tuple[tuple[str, ...], str]] = set()
    cells: list[tuple[tuple[str, ...], str]] = []
    for key, label in order:
        key.validate(plan.schema)
        labels = plan.schema.label_values if label is None else (label,)
        if label is not None and label not in plan.schema.label_values:
            raise ValidationError(f"unknown label {label!r} in order")
        for entry in plan.entries:
            if not key.matches(entry.group):
                continue
            for lab in labels:
                cell = (entry.group, lab)
                if cell not in seen:
                    seen.add(cell)
                    cells.append(cell)
    return cells


def target_residual_report(
    summary: SummaryTable,
    targets: KTargets,
    groups: Sequence[GroupKey],
    tolerance: float,
) -> BiasReport:
    """Bias of each (group, label) relative to the targets: 1 - f_sy / (K * f_y).

    With all-ones targets this is the ordinary uniform bias. A fully funded
    plan leaves every residual within rounding slack of zero even when the
    targets themselves encode an accepted non-zero bias.
    """
    cells: list[BiasCell] = []
    tau = Fraction(str(tolerance))
    for group in groups:
        s = summary.group_count(group)
        for label in summary.schema.label_values:
            n_label = summary.label_total(label)
            label_freq = float(Fraction(n_label, summary.n)) if summary.n else None
            if s == 0 or n_label == 0:
                cells.append(BiasCell(group, label, None, label_freq, None, UNDEFINED))
                continue
            sy = summary.group_count(group, label)
            share = (
                targets.k(group.entries, label) * Fraction(n_label, summary.n)  # type: ignore[arg-type]
                if group.is_base
                else Fraction(n_label, summary.n)
            )
            b = 1 - Fraction(sy, s) / share
            cells.append(
                BiasCell(
                    group, label, float(Fraction(sy, s)), label_freq, float(b), _classify(b, tau)
                )
            )
    return BiasReport(summary.schema, tolerance, tuple(cells), summary.digest)


def budgeted_mitigation(
    summary: SummaryTable,
    plan: MitigationPlan,
    costs: CostModel,
    order: Sequence[tuple[GroupKey, str | None]],
    tolerance: float = 0.1,
) -> BudgetedOutcome:
    """Fund plan cells greedily in priority order until the budget runs out.

    Each cell is funded fully if affordable, else partially with the largest
    affordable tuple count. Residual biases are recomputed from the edited
    summary (never interpolated) and measured against the plan's targets.
    """
    if plan.source_digest != summary.digest:
        raise DigestMismatch("plan was computed against a different summary")
    if costs.budget < 0:
        raise ValidationError("budget must be non-negative")
    remaining = float(costs.budget)
    records: list[FundingRecord] = []
    additions: dict[tuple[tuple[str, ...], str], int] = {}
    for base, label in expand_order(plan, order):
        requested = plan.delta(base, label)
        unit = costs.cost(base, label)
        if unit < 0:
            raise ValidationError("costs must be non-negative")
        if requested == 0:
            records.append(FundingRecord(base, label, 0, 0, unit, 0.0))
            continue
        if unit == 0:
            funded = requested
        else:
            affordable = int(remaining // unit)
            funded = min(requested, affordable)
        spent = funded * unit
        remaining -= spent
        if funded:
            additions[(base, label)] = funded
        records.append(FundingRecord(base, label, requested, funded, unit, spent))
    edited = summary.with_edits(additions=additions)
    plan_groups = [GroupKey(e.group) for e in plan.entries]
    residual = target_residual_report(edited, plan.targets, plan_groups, tolerance)
    return BudgetedOutcome(tuple(records), EditSet(additions, {}), residual, remaining)
