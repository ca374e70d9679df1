"""Row-level realization of count-level plans.

Splits a dataset into an initial sample and an external candidate pool,
draws the tuples a plan demands from the pool, and exports datasets. All
randomness flows through a counter-based generator (Philox) keyed by the
caller's seed, so identical inputs reproduce identical bytes on any
platform. Sampling is always without replacement: realized tuples are real,
distinct rows.
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InvalidSize, IOFailure, SchemaMismatch, ValidationError
from .mitigation import EditSet, MitigationPlan
from .schema import Dataset, GroupKey
from .summary import summarize


@dataclass(frozen=True)
class PartitionSpec:
    """Size of the initial sample plus the seed that fixes the split."""

    initial_size: int
    seed: int


def _generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator; (seed, stream) pairs map to disjoint keys."""
    key = (int(seed) & 0xFFFFFFFFFFFFFFFF) | (int(stream) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def _permutation(seed: int, n: int, stream: int = 0) -> np.ndarray:
    """Deterministic permutation of range(n) from a counter-based generator."""
    return _generator(seed, stream).permutation(n)


def partition_dataset(dataset: Dataset, spec: PartitionSpec) -> tuple[Dataset, Dataset]:
    """Uniform random split without replacement into (initial, pool).

    The union of the two parts is exactly the original multiset of rows.
    """
    if not 0 <= spec.initial_size <= dataset.n:
        raise InvalidSize(
            f"initial size {spec.initial_size} outside [0, {dataset.n}]"
        )
    order = _permutation(spec.seed, dataset.n)
    chosen = order[: spec.initial_size]
    rest = order[spec.initial_size :]
    initial = Dataset(dataset.schema, tuple(dataset.rows[i] for i in chosen))
    pool = Dataset(dataset.schema, tuple(dataset.rows[i] for i in rest))
    return initial, pool


def uniform_sample(dataset: Dataset, size: int, seed: int) -> Dataset:
    """Seed-deterministic uniform sample without replacement."""
    if not 0 <= size <= dataset.n:
        raise InvalidSize(f"sample size {size} outside [0, {dataset.n}]")
    order = _permutation(seed, dataset.n, stream=1)
    return Dataset(dataset.schema, tuple(dataset.rows[i] for i in order[:size]))


@dataclass(frozen=True)
class RealizationCell:
    group: tuple[str, ...]
    label: str
    requested: int
    fulfilled: int

    @property
    def shortfall(self) -> int:
        return self.requested - self.fulfilled


@dataclass(frozen=True)
class RealizationReport:
    """Per-cell demand versus what the pool could supply."""

    cells: tuple[RealizationCell, ...]

    @property
    def total_shortfall(self) -> int:
        return sum(c.shortfall for c in self.cells)

    def cell(self, group: tuple[str, ...], label: str) -> RealizationCell:
        for c in self.cells:
            if c.group == tuple(group) and c.label == label:
                return c
        raise ValidationError(f"no realization cell for ({group}, {label})")

    def to_json(self, schema) -> dict:
        return {
            "cells": [
                {
                    "group": GroupKey(c.group).to_json(schema),
                    "label": c.label,
                    "requested": c.requested,
                    "fulfilled": c.fulfilled,
                    "shortfall": c.shortfall,
                }
                for c in self.cells
            ],
            "total_shortfall": self.total_shortfall,
        }


def _additions_of(plan) -> Mapping[tuple[tuple[str, ...], str], int]:
    if isinstance(plan, MitigationPlan):
        return plan.additions()
    if isinstance(plan, EditSet):
        return plan.additions
    if isinstance(plan, Mapping):
        return plan
    raise ValidationError(f"cannot realize object of type {type(plan)!r}")


def realize_plan(
    plan: MitigationPlan | EditSet | Mapping,
    pool: Dataset,
    seed: int,
) -> tuple[list[Mapping[str, str]], RealizationReport]:
    """Draw the rows a plan demands from the pool, uniformly per cell.

    Each cell receives min(delta, available) pool rows without replacement.
    Appending the returned rows to the plan's source dataset and
    re-summarizing reproduces the planned summary exactly when no cell
    falls short.
    """
    additions = _additions_of(plan)
    if isinstance(plan, MitigationPlan) and plan.schema != pool.schema:
        raise SchemaMismatch("plan and pool use different schemas")
    by_cell: dict[tuple[tuple[str, ...], str], list[int]] = {}
    for i, row in enumerate(pool.rows):
        by_cell.setdefault((pool.base_key(row), pool.label_of(row)), []).append(i)

    ordered = sorted(additions.items(), key=lambda kv: (kv[0][0], kv[0][1]))
    rows: list[Mapping[str, str]] = []
    cells: list[RealizationCell] = []
    for stream, ((base, label), requested) in enumerate(ordered, start=2):
        if requested < 0:
            raise ValidationError("requested additions must be non-negative")
        available = by_cell.get((tuple(base), label), [])
        take = min(requested, len(available))
        if take:
            gen = _generator(seed, stream)
            picked = gen.choice(len(available), size=take, replace=False)
            rows.extend(pool.rows[available[j]] for j in sorted(int(p) for p in picked))
        cells.append(RealizationCell(tuple(base), label, requested, take))
    return rows, RealizationReport(tuple(cells))


def append_rows(dataset: Dataset, rows: Sequence[Mapping[str, str]]) -> Dataset:
    """Dataset plus realized rows (validated against the schema lazily by
    any later summarize call)."""
    return Dataset(dataset.schema, dataset.rows + tuple(rows))


def mitigated_sample_pipeline(
    dataset: Dataset,
    spec: PartitionSpec,
    plan_builder,
    order: str = "mitigate_then_sample",
) -> tuple[Dataset, RealizationReport]:
    """Partition, mitigate the initial sample against the pool, and emit a
    dataset of the initial size.

    ``order`` selects whether the final uniform sample is drawn from the
    mitigated rows ("mitigate_then_sample") or the mitigation is applied to
    a uniform sample of the initial part ("sample_then_mitigate"). Both are
    defensible readings of an evaluation pipeline; neither changes the
    count-level guarantees.
    """
    if order not in ("mitigate_then_sample", "sample_then_mitigate"):
        raise ValidationError(f"unknown pipeline order {order!r}")
    initial, pool = partition_dataset(dataset, spec)
    if order == "sample_then_mitigate":
        initial = uniform_sample(initial, initial.n, spec.seed + 1)
    plan = plan_builder(summarize(initial))
    rows, report = realize_plan(plan, pool, spec.seed + 2)
    mitigated = append_rows(initial, rows)
    if order == "mitigate_then_sample":
        mitigated = uniform_sample(mitigated, min(spec.initial_size, mitigated.n), spec.seed + 3)
    return mitigated, report


def export_dataset(dataset: Dataset, destination) -> int:
    """Write the dataset as CSV; returns the byte count written.

    Round-trips through ``load_dataset`` with an identical summary.
    """
    if dataset.rows:
        fieldnames = list(dataset.rows[0].keys())
        extra = [k for row in dataset.rows for k in row.keys() if k not in fieldnames]
        for k in extra:
            if k not in fieldnames:
                fieldnames.append(k)
    else:
        fieldnames = list(dataset.schema.attribute_names) + [dataset.schema.label_attr]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, restval="")
    writer.writeheader()
    for row in dataset.rows:
        writer.writerow(row)
    payload = buffer.getvalue().encode("utf-8")
    if isinstance(destination, (str, os.PathLike)):
        try:
            with open(destination, "wb") as fh:
                fh.write(payload)
        except OSError as exc:
            raise IOFailure(f"cannot write {destination}: {exc}") from exc
    elif hasattr(destination, "write"):
        try:
            destination.write(payload)
        except TypeError:
            destination.write(payload.decode("utf-8"))
    else:
        raise IOFailure(f"unsupported destination: {type(destination)!r}")
    return len(payload)
