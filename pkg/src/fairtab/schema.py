"""Fairness schema, group keys, and dataset ingestion.

A :class:`FairnessSchema` declares the sensitive attributes (each with a
finite value domain) and the label attribute with its ordered values.
Declaring domains up front keeps empty groups representable and makes
ingestion a pure validation step: every row must carry an in-domain value
for each sensitive attribute and for the label.
"""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from itertools import combinations, product
from typing import IO, Mapping, Sequence

from .errors import (
    DomainViolation,
    IOFailure,
    MissingColumn,
    MissingValue,
    ValidationError,
)

#: Wildcard marker used in serialized group keys; internally wildcards are None.
WILDCARD = "*"


@dataclass(frozen=True)
class FairnessSchema:
    """Declares sensitive attributes, their domains, and the label."""

    sensitive: tuple[tuple[str, tuple[str, ...]], ...]
    label_attr: str
    label_values: tuple[str, ...]

    def __post_init__(self):
        names = [name for name, _ in self.sensitive]
        if len(set(names)) != len(names):
            raise ValidationError("sensitive attribute names must be distinct")
        if self.label_attr in names:
            raise ValidationError("label attribute cannot also be sensitive")
        if not self.sensitive:
            raise ValidationError("at least one sensitive attribute is required")
        for name, domain in self.sensitive:
            if not domain:
                raise ValidationError(f"domain of {name!r} is empty")
            if len(set(domain)) != len(domain):
                raise ValidationError(f"domain of {name!r} has duplicate values")
        if len(self.label_values) < 2:
            raise ValidationError("label needs at least two values")
        if len(set(self.label_values)) != len(self.label_values):
            raise ValidationError("label values must be distinct")

    @property
    def attribute_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.sensitive)

    @property
    def k(self) -> int:
        """Number of label values."""
        return len(self.label_values)

    def domain(self, attr: str) -> tuple[str, ...]:
        for name, dom in self.sensitive:
            if name == attr:
                return dom
        raise ValidationError(f"unknown sensitive attribute {attr!r}")

    def label_index(self, label: str) -> int:
        try:
            return self.label_values.index(label)
        except ValueError:
            from .errors import UnknownLabel

            raise UnknownLabel(label) from None

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "sensitive": [
                {"name": name, "values": list(domain)} for name, domain in self.sensitive
            ],
            "label": {"name": self.label_attr, "values": list(self.label_values)},
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "FairnessSchema":
        try:
            sensitive = tuple(
                (str(entry["name"]), tuple(str(v) for v in entry["values"]))
                for entry in doc["sensitive"]
            )
            label = doc["label"]
            return cls(sensitive, str(label["name"]), tuple(str(v) for v in label["values"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed schema document: {exc}") from exc

    @classmethod
    def from_file(cls, path: str | os.PathLike) -> "FairnessSchema":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise IOFailure(f"cannot read schema file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"schema file is not valid JSON: {exc}") from exc
        return cls.from_json(doc)


@dataclass(frozen=True)
class GroupKey:
    """An intersectional group selector: one entry per sensitive attribute.

    Each entry is either a concrete value or ``None`` (the wildcard that
    matches every value of that attribute). The all-wildcard key denotes
    the full population.
    """

    entries: tuple[str | None, ...]

    @property
    def is_base(self) -> bool:
        return all(e is not None for e in self.entries)

    @property
    def is_population(self) -> bool:
        return all(e is None for e in self.entries)

    @property
    def n_concrete(self) -> int:
        return sum(1 for e in self.entries if e is not None)

    def matches(self, base: tuple[str, ...]) -> bool:
        return all(e is None or e == v for e, v in zip(self.entries, base))

    def validate(self, schema: FairnessSchema) -> None:
        if len(self.entries) != len(schema.sensitive):
            raise ValidationError(
                f"group key length {len(self.entries)} does not match "
                f"{len(schema.sensitive)} sensitive attributes"
            )
        for entry, (name, domain) in zip(self.entries, schema.sensitive):
            if entry is not None and entry not in domain:
                raise ValidationError(f"value {entry!r} not in domain of {name!r}")

    def to_json(self, schema: FairnessSchema) -> dict:
        """Mapping form with wildcards omitted, e.g. ``{"gender": "w"}``."""
        return {
            name: entry
            for entry, (name, _) in zip(self.entries, schema.sensitive)
            if entry is not None
        }

    @classmethod
    def from_json(cls, schema: FairnessSchema, doc: Mapping[str, str]) -> "GroupKey":
        names = schema.attribute_names
        unknown = set(doc) - set(names)
        if unknown:
            raise ValidationError(f"unknown attributes in group key: {sorted(unknown)}")
        key = cls(tuple(doc.get(name) for name in names))
        key.validate(schema)
        return key

    @classmethod
    def population(cls, schema: FairnessSchema) -> "GroupKey":
        return cls((None,) * len(schema.sensitive))

    def __str__(self) -> str:
        return "(" + ",".join(WILDCARD if e is None else e for e in self.entries) + ")"


@dataclass(frozen=True)
class RowIssue:
    """One excluded row in lenient ingestion mode."""

    row: int
    attr: str
    reason: str
    value: str | None = None


@dataclass(frozen=True)
class Dataset:
    """Validated rows plus the schema they satisfy.

    Rows keep every CSV column, not only the schema attributes, so exports
    and realized samples preserve the source's shape. ``excluded`` is empty
    unless the dataset was loaded in lenient mode.
    """

    schema: FairnessSchema
    rows: tuple[Mapping[str, str], ...]
    excluded: tuple[RowIssue, ...] = field(default=(), compare=False)

    @property
    def n(self) -> int:
        return len(self.rows)

    def base_key(self, row: Mapping[str, str]) -> tuple[str, ...]:
        return tuple(row[name] for name in self.schema.attribute_names)

    def label_of(self, row: Mapping[str, str]) -> str:
        return row[self.schema.label_attr]


def _as_text_stream(source) -> IO[str]:
    if isinstance(source, (str, os.PathLike)):
        try:
            return open(source, "r", encoding="utf-8", newline="")
        except OSError as exc:
            raise IOFailure(f"cannot open {source}: {exc}") from exc
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    if hasattr(source, "read"):
        data = source.read()
        if isinstance(data, bytes):
            data = data.decode("utf-8")
        return io.StringIO(data)
    raise IOFailure(f"unsupported CSV source: {type(source)!r}")


def load_dataset(
    source,
    schema: FairnessSchema,
    *,
    delimiter: str = ",",
    lenient: bool = False,
) -> Dataset:
    """Parse a header-bearing delimited file into a validated :class:`Dataset`.

    Rows with a missing or out-of-domain sensitive/label value are fatal by
    default. With ``lenient=True`` they are excluded instead and reported in
    ``Dataset.excluded``.
    """
    required = set(schema.attribute_names) | {schema.label_attr}
    label_domain = set(schema.label_values)
    domains = {name: set(dom) for name, dom in schema.sensitive}

    stream = _as_text_stream(source)
    try:
        reader = csv.DictReader(stream, delimiter=delimiter)
        header = reader.fieldnames
        if header is None:
            header = []
        for attr in sorted(required):
            if attr not in header:
                raise MissingColumn(attr)

        rows: list[Mapping[str, str]] = []
        issues: list[RowIssue] = []
        for idx, row in enumerate(reader):
            problem: RowIssue | None = None
            for attr in schema.attribute_names:
                value = row.get(attr)
                if value is None or value == "":
                    problem = RowIssue(idx, attr, "missing")
                    break
                if value not in domains[attr]:
                    problem = RowIssue(idx, attr, "domain", value)
                    break
            if problem is None:
                value = row.get(schema.label_attr)
                if value is None or value == "":
                    problem = RowIssue(idx, schema.label_attr, "missing")
                elif value not in label_domain:
                    problem = RowIssue(idx, schema.label_attr, "domain", value)
            if problem is not None:
                if lenient:
                    issues.append(problem)
                    continue
                if problem.reason == "missing":
                    raise MissingValue(problem.row, problem.attr)
                raise DomainViolation(problem.row, problem.attr, problem.value or "")
            rows.append(dict(row))
        return Dataset(schema, tuple(rows), tuple(issues))
    finally:
        if isinstance(source, (str, os.PathLike, bytes)):
            stream.close()


def infer_schema(
    source,
    sensitive_attrs: Sequence[str],
    label_attr: str,
    *,
    delimiter: str = ",",
) -> FairnessSchema:
    """Build a schema by scanning a CSV for the observed value domains.

    Convenience for exploratory use; declared schemas are preferred because
    inference cannot represent categories absent from the data.
    """
    stream = _as_text_stream(source)
    try:
        reader = csv.DictReader(stream, delimiter=delimiter)
        fields = reader.fieldnames or []
        for attr in list(sensitive_attrs) + [label_attr]:
            if attr not in fields:
                raise MissingColumn(attr)
        seen: dict[str, list[str]] = {attr: [] for attr in sensitive_attrs}
        labels: list[str] = []
        for row in reader:
            for attr in sensitive_attrs:
                v = row.get(attr)
                if v and v not in seen[attr]:
                    seen[attr].append(v)
            lv = row.get(label_attr)
            if lv and lv not in labels:
                labels.append(lv)
        return FairnessSchema(
            tuple((attr, tuple(sorted(seen[attr]))) for attr in sensitive_attrs),
            label_attr,
            tuple(sorted(labels)),
        )
    finally:
        if isinstance(source, (str, os.PathLike, bytes)):
            stream.close()


def enumerate_groups(schema: FairnessSchema, include_wildcards: bool = False) -> tuple[GroupKey, ...]:
    """All group keys of a schema in a fixed, report-stable order.

    Base-only enumeration is the plain product of the domains in attribute
    order. With wildcards, keys are ordered by how many attributes they pin
    down (marginal groups first), then by which attributes, then by value;
    the all-wildcard population key is excluded.
    """
    names_domains = schema.sensitive
    m = len(names_domains)
    if not include_wildcards:
        return tuple(
            GroupKey(values) for values in product(*(dom for _, dom in names_domains))
        )
    keys: list[GroupKey] = []
    for size in range(1, m + 1):
        for positions in combinations(range(m), size):
            value_choices = [names_domains[i][1] for i in positions]
            for values in product(*value_choices):
                entries: list[str | None] = [None] * m
                for pos, val in zip(positions, values):
                    entries[pos] = val
                keys.append(GroupKey(tuple(entries)))
    return tuple(keys)
