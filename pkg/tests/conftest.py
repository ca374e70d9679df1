import csv
import random

import pytest

from fairtab import Dataset, FairnessSchema, SummaryTable

from . import reference as ref


@pytest.fixture(scope="session")
def compas_schema() -> FairnessSchema:
    return FairnessSchema(ref.COMPAS_SENSITIVE, "score", ref.COMPAS_LABELS)


@pytest.fixture(scope="session")
def compas_summary(compas_schema) -> SummaryTable:
    return SummaryTable.from_cells(compas_schema, ref.COMPAS_CELLS)


@pytest.fixture(scope="session")
def adult_schema() -> FairnessSchema:
    return FairnessSchema(ref.ADULT_SENSITIVE, "income", ref.ADULT_LABELS)


@pytest.fixture(scope="session")
def adult_summary(adult_schema) -> SummaryTable:
    return SummaryTable.from_cells(adult_schema, ref.ADULT_CELLS)


def rows_from_cells(schema: FairnessSchema, cells, seed: int = 7) -> list[dict]:
    """Expand cell counts into shuffled rows (deterministically)."""
    rows = []
    for (base, label), count in cells.items():
        row = dict(zip(schema.attribute_names, base))
        row[schema.label_attr] = label
        rows.extend([dict(row)] * count)
    random.Random(seed).shuffle(rows)
    return rows


def write_csv(path, schema: FairnessSchema, rows) -> None:
    fieldnames = list(schema.attribute_names) + [schema.label_attr]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(rows)


@pytest.fixture(scope="session")
def compas_dataset(compas_schema) -> Dataset:
    rows = rows_from_cells(compas_schema, ref.COMPAS_CELLS)
    return Dataset(compas_schema, tuple(rows))


@pytest.fixture(scope="session")
def adult_dataset(adult_schema) -> Dataset:
    rows = rows_from_cells(adult_schema, ref.ADULT_CELLS)
    return Dataset(adult_schema, tuple(rows))


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory, compas_schema, adult_schema):
    """Directory with compas.csv / adult.csv plus their schema JSON files."""
    import json

    d = tmp_path_factory.mktemp("data")
    write_csv(d / "compas.csv", compas_schema, rows_from_cells(compas_schema, ref.COMPAS_CELLS))
    write_csv(d / "adult.csv", adult_schema, rows_from_cells(adult_schema, ref.ADULT_CELLS))
    (d / "compas.json").write_text(json.dumps(compas_schema.to_json()))
    (d / "adult.json").write_text(json.dumps(adult_schema.to_json()))
    return d


def binary_summary(p_pos: int, p_neg: int, u_pos: int, u_neg: int) -> SummaryTable:
    """Two-group, two-label summary with a protected group named 'p'."""
    schema = FairnessSchema((("group", ("p", "u")),), "label", ("+", "-"))
    return SummaryTable.from_cells(
        schema,
        {
            (("p",), "+"): p_pos,
            (("p",), "-"): p_neg,
            (("u",), "+"): u_pos,
            (("u",), "-"): u_neg,
        },
    )
