"""What-if surfaces: bias over a 2-D lattice of count-editing operations.

Each axis is a single-cell edit (add or delete tuples of one base group and
label). All four quantities entering the bias of the focus pair — its cell
count, its group total, the label total, and the grand total — are affine
in the lattice coordinates, so every grid value has a closed form and a
512x512 surface is a handful of vectorized array operations. A from-scratch
recomputation path exists for testing the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import LatticeOverdelete, NoRootInRange, ValidationError
from .measures import BIAS_AGAINST, BIAS_IN_FAVOR, FAIR
from .mitigation import CostModel
from .schema import GroupKey
from .summary import SummaryTable

OpKind = Literal["add", "delete"]


@dataclass(frozen=True)
class PolicyOp:
    """One count-editing operation: add or delete tuples of a single cell."""

    kind: OpKind
    group: GroupKey
    label: str
    max_value: int

    def __post_init__(self):
        if self.kind not in ("add", "delete"):
            raise ValidationError(f"unknown op kind {self.kind!r}")
        if self.max_value < 0:
            raise ValidationError("op range must be non-negative")
        if not self.group.is_base:
            raise ValidationError("policy ops target base-group cells")

    @property
    def sign(self) -> int:
        return 1 if self.kind == "add" else -1

    def to_json(self, schema) -> dict:
        return {
            "kind": self.kind,
            "group": self.group.to_json(schema),
            "label": self.label,
            "max": self.max_value,
        }


@dataclass(frozen=True)
class MaxOpValue:
    op: PolicyOp
    limit: int

    def __post_init__(self):
        if self.limit < 0:
            raise ValidationError("limit must be non-negative")


@dataclass(frozen=True)
class MinTotalRows:
    limit: int

    def __post_init__(self):
        if self.limit < 0:
            raise ValidationError("limit must be non-negative")


@dataclass(frozen=True)
class Budget:
    costs: CostModel


Constraint = MaxOpValue | MinTotalRows | Budget


def _coefficients(
    summary: SummaryTable, op: PolicyOp, focus_group: GroupKey, focus_label: str
) -> tuple[int, int, int, int]:
    """Signed per-step contributions of an op to (cell, group, label, total)."""
    op.group.validate(summary.schema)
    if op.label not in summary.schema.label_values:
        raise ValidationError(f"unknown label {op.label!r}")
    sign = op.sign
    in_group = focus_group.matches(op.group.entries)  # type: ignore[arg-type]
    same_label = op.label == focus_label
    return (
        sign if (in_group and same_label) else 0,
        sign if in_group else 0,
        sign if same_label else 0,
        sign,
    )


@dataclass(frozen=True)
class PolicyGrid:
    """Bias values of the focus pair over the (x, y) lattice."""

    x_op: PolicyOp
    y_op: PolicyOp
    focus: tuple[GroupKey, str]
    x_values: np.ndarray
    y_values: np.ndarray
    b: np.ndarray  # shape (len(x_values), len(y_values))
    source_digest: str
    base_total: int = 0  # grand total of the source summary, for n constraints

    def to_json(
        self,
        schema,
        feasible: np.ndarray | None = None,
        contour: Sequence[tuple[int, float | None]] | None = None,
    ) -> dict:
        doc = {
            "x_op": self.x_op.to_json(schema),
            "y_op": self.y_op.to_json(schema),
            "focus": {"group": self.focus[0].to_json(schema), "label": self.focus[1]},
            "x_values": [int(v) for v in self.x_values],
            "y_values": [int(v) for v in self.y_values],
            "b": [round(float(v), 12) for v in self.b.ravel(order="C")],
            "digest": self.source_digest,
        }
        if feasible is not None:
            doc["feasible"] = [int(v) for v in feasible.ravel(order="C")]
        if contour is not None:
            doc["contour"] = [
                [int(x), None if y is None else round(float(y), 6)] for x, y in contour
            ]
        return doc

    def to_csv(self, feasible: np.ndarray | None = None) -> str:
        lines = ["x,y,b,feasible"]
        for i, x in enumerate(self.x_values):
            for j, y in enumerate(self.y_values):
                feas = 1 if feasible is None else int(feasible[i, j])
                lines.append(f"{int(x)},{int(y)},{self.b[i, j]!r},{feas}")
        return "\n".join(lines) + "\n"


def default_lattice(max_value: int, step: int | None = None) -> np.ndarray:
    """Integer lattice 0..max with the UI-bounded default step max(1, range/512)."""
    if step is None:
        step = max(1, max_value // 512)
    if step <= 0:
        raise ValidationError("step must be positive")
    return np.arange(0, max_value + 1, step, dtype=np.int64)


def _affine_parts(
    summary: SummaryTable,
    x_op: PolicyOp,
    y_op: PolicyOp,
    focus: tuple[GroupKey, str],
) -> tuple[tuple[int, int, int], ...]:
    """(base, x-coeff, y-coeff) for cell, group, label, and total counts."""
    focus_group, focus_label = focus
    focus_group.validate(summary.schema)
    if focus_label not in summary.schema.label_values:
        raise ValidationError(f"unknown label {focus_label!r}")
    cell0 = summary.group_count(focus_group, focus_label)
    group0 = summary.group_count(focus_group)
    label0 = summary.label_total(focus_label)
    total0 = summary.n
    cx = _coefficients(summary, x_op, focus_group, focus_label)
    cy = _coefficients(summary, y_op, focus_group, focus_label)
    bases = (cell0, group0, label0, total0)
    return tuple((bases[i], cx[i], cy[i]) for i in range(4))


def _check_delete_ranges(summary: SummaryTable, ops: Iterable[PolicyOp]) -> None:
    for op in ops:
        if op.kind == "delete":
            available = summary.cell(op.group.entries, op.label)  # type: ignore[arg-type]
            if op.max_value > available:
                raise LatticeOverdelete(
                    f"op deletes up to {op.max_value} from a cell holding {available}"
                )


def bias_surface(
    summary: SummaryTable,
    x_op: PolicyOp,
    y_op: PolicyOp,
    focus: tuple[GroupKey, str],
    x_values: np.ndarray | None = None,
    y_values: np.ndarray | None = None,
    step: int | None = None,
) -> PolicyGrid:
    """Closed-form bias of the focus pair at every lattice point.

    Equal to recomputing the bias on the correspondingly edited summary,
    to floating-point accuracy (the integer products stay below 2**53).
    """
    _check_delete_ranges(summary, (x_op, y_op))
    if x_values is None:
        x_values = default_lattice(x_op.max_value, step)
    if y_values is None:
        y_values = default_lattice(y_op.max_value, step)
    x_values = np.asarray(x_values, dtype=np.int64)
    y_values = np.asarray(y_values, dtype=np.int64)
    if x_values.size and (x_values.min() < 0 or x_values.max() > x_op.max_value):
        raise ValidationError("x lattice exceeds the op range")
    if y_values.size and (y_values.min() < 0 or y_values.max() > y_op.max_value):
        raise ValidationError("y lattice exceeds the op range")

    parts = _affine_parts(summary, x_op, y_op, focus)
    X = x_values[:, None].astype(np.float64)
    Y = y_values[None, :].astype(np.float64)
    cell, group, label, total = (b0 + cx * X + cy * Y for b0, cx, cy in parts)
    with np.errstate(divide="ignore", invalid="ignore"):
        b = 1.0 - (cell * total) / (group * label)
    return PolicyGrid(x_op, y_op, focus, x_values, y_values, b, summary.digest, summary.n)


def bias_at(
    summary: SummaryTable,
    x_op: PolicyOp,
    y_op: PolicyOp,
    focus: tuple[GroupKey, str],
    x: int,
    y: int,
) -> Fraction:
    """Exact rational bias at a single lattice point (testing / point queries)."""
    parts = _affine_parts(summary, x_op, y_op, focus)
    cell, group, label, total = (b0 + cx * x + cy * y for b0, cx, cy in parts)
    if group == 0 or label == 0:
        raise ValidationError("bias undefined: empty group or label at this point")
    return 1 - Fraction(cell * total, group * label)


def edited_summary(
    summary: SummaryTable, x_op: PolicyOp, y_op: PolicyOp, x: int, y: int
) -> SummaryTable:
    """Materialized summary after x steps of x_op and y steps of y_op
    (the recomputation path used to validate the closed form)."""
    additions: dict = {}
    deletions: dict = {}
    for op, steps in ((x_op, x), (y_op, y)):
        target = (op.group.entries, op.label)
        bucket = additions if op.kind == "add" else deletions
        bucket[target] = bucket.get(target, 0) + steps
    return summary.with_edits(additions=additions, deletions=deletions)


def feasible_mask(
    grid: PolicyGrid,
    constraints: Sequence[Constraint],
    costs: CostModel | None = None,
) -> np.ndarray:
    """Boolean matrix: lattice points satisfying every constraint."""
    X = grid.x_values[:, None].astype(np.int64)
    Y = grid.y_values[None, :].astype(np.int64)
    mask = np.ones((grid.x_values.size, grid.y_values.size), dtype=bool)
    n_after = grid.base_total + grid.x_op.sign * X + grid.y_op.sign * Y
    for constraint in constraints:
        if isinstance(constraint, MaxOpValue):
            if constraint.op == grid.x_op:
                mask &= X <= constraint.limit
            elif constraint.op == grid.y_op:
                mask &= Y <= constraint.limit
            else:
                raise ValidationError("constraint references an op not on the grid")
        elif isinstance(constraint, MinTotalRows):
            mask &= n_after >= constraint.limit
        elif isinstance(constraint, Budget):
            model = constraint.costs
            cx = model.cost(grid.x_op.group.entries, grid.x_op.label)  # type: ignore[arg-type]
            cy = model.cost(grid.y_op.group.entries, grid.y_op.label)  # type: ignore[arg-type]
            mask &= (cx * X + cy * Y) <= model.budget
        else:
            raise ValidationError(f"unknown constraint {constraint!r}")
    if costs is not None:
        cx = costs.cost(grid.x_op.group.entries, grid.x_op.label)  # type: ignore[arg-type]
        cy = costs.cost(grid.y_op.group.entries, grid.y_op.label)  # type: ignore[arg-type]
        mask &= (cx * X + cy * Y) <= costs.budget
    return mask


def zero_bias_contour(
    summary: SummaryTable,
    x_op: PolicyOp,
    y_op: PolicyOp,
    focus: tuple[GroupKey, str],
    x_values: np.ndarray | Sequence[int] | None = None,
    y_bounds: tuple[float, float] | None = None,
    strict: bool = False,
) -> list[tuple[int, float | None]]:
    """For each lattice x, the real y solving bias(x, y) = 0.

    The zero condition cell*total == group*label is a quadratic in y with
    exact integer coefficients; single-cell edits make it linear or leave
    one admissible root. x values with no root in range map to None, or
    raise NoRootInRange when strict.
    """
    _check_delete_ranges(summary, (x_op, y_op))
    if x_values is None:
        x_values = default_lattice(x_op.max_value)
    if y_bounds is None:
        y_bounds = (0.0, float(y_op.max_value))
    lo, hi = y_bounds
    parts = _affine_parts(summary, x_op, y_op, focus)
    out: list[tuple[int, float | None]] = []
    for x in (int(v) for v in np.asarray(x_values)):
        # at fixed x each quantity is a0 + a1*y
        (c0, cxc, cyc), (g0, gxc, gyc), (l0, lxc, lyc), (t0, txc, tyc) = parts
        cell = (c0 + cxc * x, cyc)
        group = (g0 + gxc * x, gyc)
        label = (l0 + lxc * x, lyc)
        total = (t0 + txc * x, tyc)
        # cell*total - group*label = A*y^2 + B*y + C
        A = cell[1] * total[1] - group[1] * label[1]
        B = cell[0] * total[1] + cell[1] * total[0] - group[0] * label[1] - group[1] * label[0]
        C = cell[0] * total[0] - group[0] * label[0]
        root = _admissible_root(A, B, C, lo, hi)
        if root is None and strict:
            raise NoRootInRange(x)
        out.append((x, root))
    return out


def _admissible_root(A: int, B: int, C: int, lo: float, hi: float) -> float | None:
    roots: list[float] = []
    if A == 0:
        if B != 0:
            roots.append(-C / B)
    else:
        disc = B * B - 4 * A * C
        if disc >= 0:
            sq = math.sqrt(disc)
            roots.extend(((-B - sq) / (2 * A), (-B + sq) / (2 * A)))
    candidates = [r for r in roots if lo - 1e-9 <= r <= hi + 1e-9]
    if not candidates:
        return None
    return min(candidates, key=abs)


def classify_surface(grid: PolicyGrid, tolerance: float) -> np.ndarray:
    """Per-cell classification codes: +1 bias against the focus group
    (b > tau), -1 bias in its favor (b < -tau), 0 within the fair band."""
    if tolerance < 0:
        raise ValidationError("tolerance must be non-negative")
    codes = np.zeros(grid.b.shape, dtype=np.int8)
    codes[grid.b > tolerance] = 1
    codes[grid.b < -tolerance] = -1
    return codes


CLASSIFICATION_NAMES = {1: BIAS_AGAINST, -1: BIAS_IN_FAVOR, 0: FAIR}
