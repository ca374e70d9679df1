"""CLI surface: subcommands, formats, and exit codes."""

import json

import pytest

from fairtab import load_dataset, summarize
from fairtab.cli import cli_dispatch

from . import reference as ref


def run(capsys, *argv):
    code = cli_dispatch(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestReport:
    def test_json_report_matches_reference(self, data_dir, capsys):
        code, out, _ = run(
            capsys,
            "report",
            "--data", str(data_dir / "compas.csv"),
            "--schema", str(data_dir / "compas.json"),
            "--tau", "0.1",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["v"] == 1 and doc["tau"] == 0.1
        assert len(doc["cells"]) == 24
        by_key = {
            (tuple(sorted(c["group"].items())), c["label"]): c for c in doc["cells"]
        }
        cell = by_key[((("gender", "w"),), "H")]
        assert cell["b"] == pytest.approx(0.304, abs=0.001)
        assert cell["class"] == "against"

    def test_measures_columns(self, data_dir, capsys):
        code, out, _ = run(
            capsys,
            "report",
            "--data", str(data_dir / "adult.csv"),
            "--schema", str(data_dir / "adult.json"),
            "--measures", "ub,ir,or,md",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["measures"] == ["ub", "ir", "or", "md"]
        female_pos = next(
            c for c in doc["cells"] if c["group"] == {"gender": "Female"} and c["label"] == "+"
        )
        assert female_pos["ir"] == pytest.approx(0.358, abs=0.001)
        assert female_pos["or"] == pytest.approx(3.583, abs=0.001)
        assert female_pos["md"] == pytest.approx(0.196, abs=0.001)

    def test_unknown_measure_rejected(self, data_dir, capsys):
        code, _, err = run(
            capsys,
            "report",
            "--data", str(data_dir / "adult.csv"),
            "--schema", str(data_dir / "adult.json"),
            "--measures", "ub,zeta",
        )
        assert code == 2 and "zeta" in err

    def test_text_report_with_measures(self, data_dir, capsys):
        code, out, _ = run(
            capsys,
            "report",
            "--data", str(data_dir / "adult.csv"),
            "--schema", str(data_dir / "adult.json"),
            "--format", "text",
            "--measures", "ub,ir",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0].rstrip().endswith("ir")
        assert len(lines) == 1 + 4  # 2 groups x 2 labels

    def test_text_report(self, data_dir, capsys):
        code, out, _ = run(
            capsys,
            "report",
            "--data", str(data_dir / "compas.csv"),
            "--schema", str(data_dir / "compas.json"),
            "--format", "text",
        )
        assert code == 0
        assert out.splitlines()[0].startswith("group")
        assert len(out.splitlines()) == 25

    def test_missing_file_is_io_error(self, data_dir, capsys):
        code, _, err = run(
            capsys,
            "report",
            "--data", str(data_dir / "nope.csv"),
            "--schema", str(data_dir / "compas.json"),
        )
        assert code == 1 and "io error" in err

    def test_bad_schema_is_validation_error(self, data_dir, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"sensitive": [], "label": {"name": "x", "values": ["a","b"]}}')
        code, _, err = run(
            capsys,
            "report",
            "--data", str(data_dir / "compas.csv"),
            "--schema", str(bad),
        )
        assert code == 2 and "error" in err

    def test_usage_error(self, capsys):
        assert run(capsys, "report")[0] == 2
        assert run(capsys, "definitely-not-a-command")[0] == 2


class TestMitigate:
    def test_plan_applies_to_reference_table(self, data_dir, capsys):
        code, out, _ = run(
            capsys,
            "mitigate",
            "--data", str(data_dir / "compas.csv"),
            "--schema", str(data_dir / "compas.json"),
        )
        assert code == 0
        doc = json.loads(out)
        deltas = {}
        for group in doc["plan"]["groups"]:
            key = (group["group"]["gender"], group["group"]["race"])
            deltas[key] = group["delta"]
        mitigated = {
            (base, label): ref.COMPAS_CELLS[(base, label)] + deltas[base][label]
            for (base, label) in ref.COMPAS_CELLS
        }
        assert mitigated == ref.COMPAS_MITIGATED_CELLS

    def test_budgeted_run_reports_funding(self, data_dir, tmp_path, capsys):
        order = [
            {"group": {"gender": "w"}},
            {"group": {"gender": "m"}, "label": "L"},
            {"group": {"gender": "m"}, "label": "H"},
            {"group": {"gender": "m"}, "label": "M"},
        ]
        order_file = tmp_path / "order.json"
        order_file.write_text(json.dumps(order))
        code, out, _ = run(
            capsys,
            "mitigate",
            "--data", str(data_dir / "compas.csv"),
            "--schema", str(data_dir / "compas.json"),
            "--budget", "7500",
            "--order", str(order_file),
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["remaining_budget"] == 0
        assert {r["status"] for r in doc["funding"]} >= {"funded", "partial"}
        assert "residual" in doc


class TestGrid:
    def test_grid_json_headline_values(self, data_dir, capsys):
        code, out, _ = run(
            capsys,
            "grid",
            "--data", str(data_dir / "adult.csv"),
            "--schema", str(data_dir / "adult.json"),
            "--x", "add:Male:-:5100",
            "--y", "add:Female:+:5100",
            "--focus", "Female:+",
            "--step", "100",
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["b"][0] == pytest.approx(0.5454, abs=0.001)
        contour = {x: y for x, y in doc["contour"]}
        assert contour[4500] == pytest.approx(2076.65, abs=0.01)

    def test_grid_csv(self, data_dir, capsys):
        code, out, _ = run(
            capsys,
            "grid",
            "--data", str(data_dir / "adult.csv"),
            "--schema", str(data_dir / "adult.json"),
            "--x", "add:Male:-:5100",
            "--y", "add:Female:+:5100",
            "--focus", "Female:+",
            "--step", "2550",
            "--max-x", "4500",
            "--format", "csv",
        )
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "x,y,b,feasible"
        assert any(line.endswith(",0") for line in lines[1:])  # infeasible cells


class TestSamplingCommands:
    def test_partition_sample_realize_flow(self, data_dir, tmp_path, capsys):
        code, out, _ = run(
            capsys,
            "partition",
            "--data", str(data_dir / "compas.csv"),
            "--schema", str(data_dir / "compas.json"),
            "--size", "20000",
            "--seed", "3",
            "--out-initial", str(tmp_path / "initial.csv"),
            "--out-pool", str(tmp_path / "pool.csv"),
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["initial"]["n"] == 20000 and doc["pool"]["n"] == ref.COMPAS_N - 20000

        code, out, _ = run(
            capsys,
            "mitigate",
            "--data", str(tmp_path / "initial.csv"),
            "--schema", str(data_dir / "compas.json"),
            "--out", str(tmp_path / "plan.json"),
        )
        assert code == 0

        code, out, _ = run(
            capsys,
            "realize",
            "--pool", str(tmp_path / "pool.csv"),
            "--schema", str(data_dir / "compas.json"),
            "--plan", str(tmp_path / "plan.json"),
            "--seed", "17",
            "--base", str(tmp_path / "initial.csv"),
            "--out-rows", str(tmp_path / "mitigated.csv"),
        )
        assert code == 0
        doc = json.loads(out)
        assert doc["report"]["total_shortfall"] == 0

        from fairtab import FairnessSchema, is_unbiased

        schema = FairnessSchema.from_file(data_dir / "compas.json")
        mitigated = summarize(load_dataset(tmp_path / "mitigated.csv", schema))
        ok, _ = is_unbiased(mitigated, 0.02)
        assert ok

    def test_sample_command(self, data_dir, tmp_path, capsys):
        code, out, _ = run(
            capsys,
            "sample",
            "--data", str(data_dir / "adult.csv"),
            "--schema", str(data_dir / "adult.json"),
            "--size", "1000",
            "--seed", "5",
            "--out-sample", str(tmp_path / "sample.csv"),
        )
        assert code == 0
        assert json.loads(out)["sample"]["n"] == 1000
