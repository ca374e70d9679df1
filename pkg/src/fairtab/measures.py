"""Group bias measures over summary tables.

The central quantity is the uniform bias of a group/label pair,

    b = 1 - f_group_label / f_label,

the fraction by which the group's rate of a label falls short of (positive
b) or exceeds (negative b) the population rate. It is computed from exact
integer counts as a rational number and converted to float only at the
boundary, so equalities like ``b == 0`` hold exactly when they are true.

Classical comparison measures (impact ratio, odds ratio, mean difference)
are provided for binary protected/unprotected splits.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    EmptyGroup,
    EmptyLabel,
    InvalidPartition,
    ValidationError,
)
from .schema import FairnessSchema, GroupKey, enumerate_groups
from .summary import SummaryTable

#: Default admissible bias magnitude when none is given.
DEFAULT_TOLERANCE = 0.1

FAIR = "fair"
BIAS_AGAINST = "against"
BIAS_IN_FAVOR = "in_favor"
UNDEFINED = "undefined"


def uniform_bias_exact(summary: SummaryTable, group: GroupKey, label: str) -> Fraction:
    """Exact rational uniform bias of (group, label)."""
    n_label = summary.label_total(label)
    if n_label == 0:
        raise EmptyLabel(f"label {label!r} has no tuples")
    s = summary.group_count(group)
    if s == 0:
        raise EmptyGroup(f"group {group} is empty")
    sy = summary.group_count(group, label)
    # 1 - (sy/s) / (n_label/n) with pure integer arithmetic
    return 1 - Fraction(sy * summary.n, s * n_label)


def uniform_bias(summary: SummaryTable, group: GroupKey, label: str) -> float:
    """Uniform bias as a float; raises EmptyGroup / EmptyLabel when undefined."""
    return float(uniform_bias_exact(summary, group, label))


@dataclass(frozen=True)
class ClassicalMeasures:
    """Impact ratio, odds ratio, mean difference, and the ideal positive count.

    A measure whose denominator vanishes is reported as None and named in
    ``undefined``; the other measures are still returned.
    """

    ir: float | None
    or_: float | None
    md: float | None
    p_plus_zero: float | None
    p_plus_zero_int: int | None
    undefined: tuple[str, ...] = ()


def nearest_int(x: Fraction) -> int:
    """Nearest integer, half rounded up: floor(x + 1/2)."""
    y = x + Fraction(1, 2)
    return y.numerator // y.denominator


def classical_measures(
    summary: SummaryTable, protected: GroupKey, positive_label: str
) -> ClassicalMeasures:
    """Binary-split measures of the protected group versus its complement."""
    protected.validate(summary.schema)
    n = summary.n
    n_pos = summary.label_total(positive_label)
    p = summary.group_count(protected)
    p_pos = summary.group_count(protected, positive_label)
    u = n - p
    u_pos = n_pos - p_pos

    undefined: list[str] = []
    ir = or_ = md = pp0 = None
    pp0_int = None

    if n > 0:
        f_pos = Fraction(n_pos, n)
        pp0_frac = f_pos * p
        pp0 = float(pp0_frac)
        pp0_int = nearest_int(pp0_frac)
    else:
        undefined.append("p_plus_zero")

    f_p = Fraction(p_pos, p) if p else None
    f_u = Fraction(u_pos, u) if u else None

    if f_p is not None and f_u is not None:
        md = float(f_u - f_p)
    else:
        undefined.append("md")
    if f_p is not None and f_u is not None and f_u != 0:
        ir = float(f_p / f_u)
    else:
        undefined.append("ir")
    p_neg = p - p_pos
    u_neg = u - u_pos
    if p_pos > 0 and u_neg > 0:
        or_ = float(Fraction(u_pos * p_neg, u_neg * p_pos))
    else:
        undefined.append("or")
    return ClassicalMeasures(ir, or_, md, pp0, pp0_int, tuple(undefined))


def ir_from_bias(b: float, P: float, U: float) -> float:
    """Impact ratio implied by a uniform bias under a (P, U) population split.

    Consistency: for any binary summary, feeding the protected group's bias
    and shares through this function reproduces the directly computed IR.
    """
    if abs((P + U) - 1.0) > 1e-12:
        raise InvalidPartition(f"P + U must equal 1, got {P + U}")
    if not 0 < P < 1:
        raise InvalidPartition(f"P must lie strictly between 0 and 1, got {P}")
    return (1.0 - b) / (1.0 + b * P / U)


@dataclass(frozen=True)
class BiasCell:
    """One (group, label) entry of a bias report."""

    group: GroupKey
    label: str
    group_freq: float | None
    label_freq: float | None
    ub: float | None
    classification: str

    def to_json(self, schema: FairnessSchema) -> dict:
        return {
            "group": self.group.to_json(schema),
            "label": self.label,
            "f_group": self.group_freq,
            "f_label": self.label_freq,
            "b": self.ub,
            "class": self.classification,
        }


@dataclass(frozen=True)
class BiasReport:
    """Per-(group, label) bias values classified against a tolerance."""

    schema: FairnessSchema
    tolerance: float
    cells: tuple[BiasCell, ...]
    source_digest: str

    def cell(self, group: GroupKey, label: str) -> BiasCell:
        for c in self.cells:
            if c.group == group and c.label == label:
                return c
        raise ValidationError(f"no report cell for ({group}, {label})")

    def to_json(self) -> dict:
        return {
            "tau": self.tolerance,
            "digest": self.source_digest,
            "cells": [c.to_json(self.schema) for c in self.cells],
        }

    def to_text(self) -> str:
        headers = ["group", "label", "f_group", "f_label", "b", "class"]
        rows = []
        for c in self.cells:
            rows.append(
                [
                    str(c.group),
                    c.label,
                    "-" if c.group_freq is None else f"{c.group_freq:.4f}",
                    "-" if c.label_freq is None else f"{c.label_freq:.4f}",
                    "-" if c.ub is None else f"{c.ub:+.4f}",
                    c.classification,
                ]
            )
        widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(headers)]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for r in rows:
            lines.append("  ".join(v.ljust(w) for v, w in zip(r, widths)))
        return "\n".join(lines)


def _classify(b: Fraction, tolerance: Fraction) -> str:
    if abs(b) <= tolerance:
        return FAIR
    return BIAS_AGAINST if b > 0 else BIAS_IN_FAVOR


def bias_report(
    summary: SummaryTable,
    groups: Sequence[GroupKey] | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
    per_cell_tolerance: Mapping[tuple[GroupKey, str], float] | None = None,
) -> BiasReport:
    """Bias values for every (group, label) pair, classified against the
    tolerance (a per-cell override map may refine the global value).

    Empty groups and empty labels yield 'undefined' cells, never a silent 0.
    """
    if tolerance < 0:
        raise ValidationError("tolerance must be non-negative")
    if groups is None:
        groups = enumerate_groups(summary.schema, include_wildcards=True)
    cells: list[BiasCell] = []
    for group in groups:
        group.validate(summary.schema)
        s = summary.group_count(group)
        for label in summary.schema.label_values:
            n_label = summary.label_total(label)
            label_freq = float(Fraction(n_label, summary.n)) if summary.n else None
            if s == 0 or n_label == 0:
                cells.append(BiasCell(group, label, None, label_freq, None, UNDEFINED))
                continue
            sy = summary.group_count(group, label)
            b = 1 - Fraction(sy * summary.n, s * n_label)
            tau = tolerance
            if per_cell_tolerance is not None:
                tau = per_cell_tolerance.get((group, label), tolerance)
            cells.append(
                BiasCell(
                    group,
                    label,
                    float(Fraction(sy, s)),
                    label_freq,
                    float(b),
                    _classify(b, Fraction(str(tau))),
                )
            )
    return BiasReport(summary.schema, tolerance, tuple(cells), summary.digest)


def is_unbiased(
    summary: SummaryTable, tolerance: float = DEFAULT_TOLERANCE
) -> tuple[bool, tuple[GroupKey, str, float] | None]:
    """Whether every nonempty group (wildcards included) stays within the
    tolerance for every populated label; on failure returns the worst
    (group, label, bias) witness."""
    if tolerance < 0:
        raise ValidationError("tolerance must be non-negative")
    tau = Fraction(str(tolerance))
    worst: tuple[Fraction, GroupKey, str] | None = None
    for group in enumerate_groups(summary.schema, include_wildcards=True):
        if summary.group_count(group) == 0:
            continue
        for label in summary.schema.label_values:
            if summary.label_total(label) == 0:
                continue
            b = uniform_bias_exact(summary, group, label)
            if worst is None or abs(b) > abs(worst[0]):
                worst = (b, group, label)
    if worst is None or abs(worst[0]) <= tau:
        return True, None
    return False, (worst[1], worst[2], float(worst[0]))
