"""Exact integer contingency summaries over base groups and label values.

The :class:`SummaryTable` is the single source of truth for all downstream
math: counts are plain Python integers, marginals are sums of base cells,
and no count arithmetic ever passes through floating point.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .errors import UnknownLabel, ValidationError
from .schema import Dataset, FairnessSchema, GroupKey

BaseCells = Mapping[tuple[tuple[str, ...], str], int]


@dataclass(frozen=True)
class SummaryTable:
    """Counts of (base group, label) cells with derived marginals."""

    schema: FairnessSchema
    _cells: dict[tuple[tuple[str, ...], str], int] = field(repr=False)
    _group_totals: dict[tuple[str, ...], int] = field(repr=False)
    _label_totals: dict[str, int] = field(repr=False)
    n: int = 0
    digest: str = ""

    @classmethod
    def from_cells(cls, schema: FairnessSchema, cells: BaseCells) -> "SummaryTable":
        clean: dict[tuple[tuple[str, ...], str], int] = {}
        group_totals: dict[tuple[str, ...], int] = {}
        label_totals: dict[str, int] = {lab: 0 for lab in schema.label_values}
        for (base, label), count in cells.items():
            if not isinstance(count, int):
                raise ValidationError(f"cell count for ({base}, {label}) is not an integer")
            if count < 0:
                raise ValidationError(f"negative cell count for ({base}, {label})")
            if label not in label_totals:
                raise UnknownLabel(label)
            key = GroupKey(tuple(base))
            key.validate(schema)
            if not key.is_base:
                raise ValidationError("summary cells must use base (wildcard-free) groups")
            if count == 0:
                continue
            clean[(tuple(base), label)] = clean.get((tuple(base), label), 0) + count
        for (base, label), count in clean.items():
            group_totals[base] = group_totals.get(base, 0) + count
            label_totals[label] += count
        n = sum(label_totals.values())
        digest = _digest(schema, clean, n)
        return cls(schema, clean, group_totals, label_totals, n, digest)

    # -- lookups ------------------------------------------------------------

    def cell(self, base: tuple[str, ...], label: str) -> int:
        if label not in self.schema.label_values:
            raise UnknownLabel(label)
        return self._cells.get((tuple(base), label), 0)

    def group_total(self, base: tuple[str, ...]) -> int:
        return self._group_totals.get(tuple(base), 0)

    def label_total(self, label: str) -> int:
        if label not in self.schema.label_values:
            raise UnknownLabel(label)
        return self._label_totals[label]

    def group_count(self, group: GroupKey, label: str | None = None) -> int:
        """Tuples matched by ``group`` (wildcards match everything), optionally
        restricted to one label value."""
        group.validate(self.schema)
        if label is not None and label not in self.schema.label_values:
            raise UnknownLabel(label)
        total = 0
        for (base, cell_label), count in self._cells.items():
            if label is not None and cell_label != label:
                continue
            if group.matches(base):
                total += count
        return total

    def _base_rank(self, base: tuple[str, ...]) -> tuple[int, ...]:
        return tuple(
            domain.index(value) for value, (_, domain) in zip(base, self.schema.sensitive)
        )

    def base_groups(self) -> tuple[tuple[str, ...], ...]:
        """Nonempty base groups in schema enumeration order."""
        return tuple(sorted(self._group_totals, key=self._base_rank))

    def nonzero_cells(self) -> Iterable[tuple[tuple[str, ...], str, int]]:
        label_rank = {lab: i for i, lab in enumerate(self.schema.label_values)}
        for base, label in sorted(
            self._cells, key=lambda cell: (self._base_rank(cell[0]), label_rank[cell[1]])
        ):
            yield base, label, self._cells[(base, label)]

    def label_frequency(self, label: str) -> Fraction:
        if self.n == 0:
            raise ValidationError("empty summary has no label frequencies")
        return Fraction(self.label_total(label), self.n)

    # -- derived tables -----------------------------------------------------

    def with_edits(
        self,
        additions: Mapping[tuple[tuple[str, ...], str], int] | None = None,
        deletions: Mapping[tuple[tuple[str, ...], str], int] | None = None,
    ) -> "SummaryTable":
        """A new summary with cell-wise additions and subtractions applied."""
        from .errors import Overdelete

        cells = dict(self._cells)
        for (base, label), count in (additions or {}).items():
            if count < 0:
                raise ValidationError("additions must be non-negative")
            cells[(tuple(base), label)] = cells.get((tuple(base), label), 0) + count
        for (base, label), count in (deletions or {}).items():
            if count < 0:
                raise ValidationError("deletions must be non-negative")
            have = cells.get((tuple(base), label), 0)
            if count > have:
                raise Overdelete(GroupKey(tuple(base)), label, count, have)
            cells[(tuple(base), label)] = have - count
        return SummaryTable.from_cells(self.schema, cells)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        cells = [
            {
                "group": GroupKey(base).to_json(self.schema),
                "label": label,
                "count": count,
            }
            for base, label, count in self.nonzero_cells()
        ]
        return {"n": self.n, "cells": cells, "digest": self.digest}

    @classmethod
    def from_json(cls, schema: FairnessSchema, doc: Mapping) -> "SummaryTable":
        try:
            cells: dict[tuple[tuple[str, ...], str], int] = {}
            for entry in doc["cells"]:
                key = GroupKey.from_json(schema, entry["group"])
                if not key.is_base:
                    raise ValidationError("summary cells must name every attribute")
                cells[(key.entries, entry["label"])] = int(entry["count"])  # type: ignore[arg-type]
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed summary document: {exc}") from exc
        table = cls.from_cells(schema, cells)
        if "n" in doc and int(doc["n"]) != table.n:
            raise ValidationError(
                f"summary document claims n={doc['n']} but cells sum to {table.n}"
            )
        return table


def _digest(schema: FairnessSchema, cells: BaseCells, n: int) -> str:
    payload = {
        "schema": schema.to_json(),
        "n": n,
        "cells": sorted((list(base), label, count) for (base, label), count in cells.items()),
    }
    raw = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(raw).hexdigest()


def summarize(dataset: Dataset) -> SummaryTable:
    """Reduce a dataset to exact cell counts.

    A pure function of the multiset of rows; row order is irrelevant.
    """
    cells: dict[tuple[tuple[str, ...], str], int] = {}
    names = dataset.schema.attribute_names
    label_attr = dataset.schema.label_attr
    for row in dataset.rows:
        key = (tuple(row[name] for name in names), row[label_attr])
        cells[key] = cells.get(key, 0) + 1
    return SummaryTable.from_cells(dataset.schema, cells)


def group_count(summary: SummaryTable, group: GroupKey, label: str | None = None) -> int:
    """Module-level alias for :meth:`SummaryTable.group_count`."""
    return summary.group_count(group, label)
