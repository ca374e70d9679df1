"""Uniform bias, classical measures, reports, and their invariants."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fairtab import (
    EmptyGroup,
    EmptyLabel,
    FairnessSchema,
    GroupKey,
    InvalidPartition,
    SummaryTable,
    bias_report,
    classical_measures,
    enumerate_groups,
    ir_from_bias,
    is_unbiased,
    uniform_bias,
    uniform_bias_exact,
)
from fairtab.measures import BIAS_AGAINST, BIAS_IN_FAVOR, FAIR, UNDEFINED

from . import reference as ref
from .conftest import binary_summary

FEMALE = GroupKey(("Female",))


class TestUniformBias:
    def test_adult_female_positive(self, adult_summary):
        assert uniform_bias(adult_summary, FEMALE, "+") == pytest.approx(0.55, abs=0.005)

    def test_compas_marginals(self, compas_summary):
        assert uniform_bias(compas_summary, GroupKey(("m", None)), "L") == pytest.approx(
            0.022, abs=0.0005
        )
        assert uniform_bias(compas_summary, GroupKey(("w", None)), "H") == pytest.approx(
            0.304, abs=0.0005
        )
        assert uniform_bias(compas_summary, GroupKey((None, "c")), "H") == pytest.approx(
            0.325, abs=0.0005
        )

    def test_hiring_tables(self):
        p, u = ref.HIRING_P, ref.HIRING_U
        for table, expected in [
            (ref.HIRING_T0, Fraction(0)),
            (ref.HIRING_T1, Fraction(1, 5)),
            (ref.HIRING_T2_BIAS, Fraction(-1, 5)),
        ]:
            summary = binary_summary(
                table["p_pos"], p - table["p_pos"], table["u_pos"], u - table["u_pos"]
            )
            assert uniform_bias_exact(summary, GroupKey(("p",)), "+") == expected

    def test_empty_group_raises(self, adult_schema):
        summary = SummaryTable.from_cells(adult_schema, {(("Male",), "+"): 5, (("Male",), "-"): 5})
        with pytest.raises(EmptyGroup):
            uniform_bias(summary, FEMALE, "+")

    def test_empty_label_raises(self, adult_schema):
        summary = SummaryTable.from_cells(
            adult_schema, {(("Male",), "-"): 5, (("Female",), "-"): 5}
        )
        with pytest.raises(EmptyLabel):
            uniform_bias(summary, FEMALE, "+")

    def test_value_at_most_one_and_one_iff_absent(self, adult_schema):
        summary = SummaryTable.from_cells(
            adult_schema,
            {(("Male",), "+"): 5, (("Male",), "-"): 5, (("Female",), "-"): 3},
        )
        assert uniform_bias_exact(summary, FEMALE, "+") == 1

    def test_sign_semantics(self, compas_summary):
        # positive bias <=> group rate below population rate, and conversely
        f_H = Fraction(compas_summary.label_total("H"), compas_summary.n)
        for key in enumerate_groups(compas_summary.schema, include_wildcards=True):
            b = uniform_bias_exact(compas_summary, key, "H")
            group_rate = Fraction(
                compas_summary.group_count(key, "H"), compas_summary.group_count(key)
            )
            assert b <= 1
            assert (b > 0) == (group_rate < f_H)
            assert (b == 0) == (group_rate == f_H)


class TestClassicalMeasures:
    def test_adult_reference_values(self, adult_summary):
        m = classical_measures(adult_summary, FEMALE, "+")
        assert m.ir == pytest.approx(ref.ADULT_EXPECTED["ir"], abs=0.005)
        assert m.or_ == pytest.approx(ref.ADULT_EXPECTED["or"], abs=0.005)
        assert m.md == pytest.approx(ref.ADULT_EXPECTED["md"], abs=0.005)
        assert m.p_plus_zero_int == ref.ADULT_EXPECTED["p_plus_zero_int"]
        assert m.p_plus_zero == pytest.approx(2593.7, abs=0.1)

    def test_equal_rates_give_neutral_measures(self):
        summary = binary_summary(30, 70, 60, 140)
        m = classical_measures(summary, GroupKey(("p",)), "+")
        assert m.ir == 1 and m.or_ == 1 and m.md == 0

    def test_selection_rate_row(self):
        # rates .482 vs .502 at population rate .5
        summary = binary_summary(241, 259, 2259, 2241)
        m = classical_measures(summary, GroupKey(("p",)), "+")
        assert m.ir == pytest.approx(0.960, abs=0.0005)
        assert 1 / m.or_ == pytest.approx(0.923, abs=0.0005)
        assert uniform_bias(summary, GroupKey(("p",)), "+") == pytest.approx(0.036, abs=0.0005)

    def test_hiring_table_ratio_measures(self):
        # T1 and the ratio columns of T2 (whose published row pairs the
        # caption's population rate with a different positive count)
        t1 = binary_summary(40, 110, 160, 290)
        m1 = classical_measures(t1, GroupKey(("p",)), "+")
        assert m1.ir == pytest.approx(3 / 4, rel=1e-12)
        assert m1.md == pytest.approx(4 / 45, rel=1e-12)
        t2 = binary_summary(60, 90, 110, 340)
        m2 = classical_measures(t2, GroupKey(("p",)), "+")
        assert m2.ir == pytest.approx(18 / 11, rel=1e-12)
        assert m2.md == pytest.approx(-7 / 45, rel=1e-12)

    def test_division_by_zero_reported_not_raised(self, adult_schema):
        summary = SummaryTable.from_cells(
            adult_schema, {(("Female",), "-"): 10, (("Male",), "+"): 10}
        )
        m = classical_measures(summary, FEMALE, "+")
        assert m.or_ is None and "or" in m.undefined
        assert m.ir == 0.0  # f_p = 0, f_u = 1


class TestIrFromBias:
    def test_zero_bias_is_unit_ratio(self):
        assert ir_from_bias(0.0, 0.3, 0.7) == 1.0

    def test_family_row_p900(self):
        b = float(1 - Fraction(2, 5) / Fraction(41, 100))
        assert ir_from_bias(b, 0.9, 0.1) == pytest.approx(0.8, abs=1e-3)

    def test_family_row_p580(self):
        # the published row prints p = 520, but its own positive counts
        # (232 protected of 442 total at rate .4) pin p = 580, u = 420
        b = float(1 - Fraction(2, 5) / Fraction(442, 1000))
        assert ir_from_bias(b, 0.58, 0.42) == pytest.approx(0.8, abs=1e-3)

    def test_invalid_partition(self):
        with pytest.raises(InvalidPartition):
            ir_from_bias(0.1, 0.5, 0.6)
        with pytest.raises(InvalidPartition):
            ir_from_bias(0.1, 1.0, 0.0)

    @given(
        p_pos=st.integers(0, 50),
        p_neg=st.integers(0, 50),
        u_pos=st.integers(0, 50),
        u_neg=st.integers(0, 50),
    )
    @settings(max_examples=120, deadline=None)
    def test_consistency_with_direct_ir(self, p_pos, p_neg, u_pos, u_neg):
        p, u = p_pos + p_neg, u_pos + u_neg
        if p == 0 or u == 0 or u_pos == 0 or p_pos + u_pos == 0:
            return
        summary = binary_summary(p_pos, p_neg, u_pos, u_neg)
        protected = GroupKey(("p",))
        b = uniform_bias(summary, protected, "+")
        direct = classical_measures(summary, protected, "+").ir
        n = p + u
        assert ir_from_bias(b, p / n, u / n) == pytest.approx(direct, rel=1e-12)


class TestBiasReport:
    def test_compas_full_table(self, compas_summary):
        report = bias_report(compas_summary, tolerance=0.1)
        assert len(report.cells) == 24
        for (entries, label), expected in ref.COMPAS_BIASES.items():
            cell = report.cell(GroupKey(entries), label)
            assert cell.ub == pytest.approx(expected, abs=0.001), (entries, label)

    def test_population_rows_exactly_zero(self, compas_summary):
        report = bias_report(
            compas_summary, groups=[GroupKey.population(compas_summary.schema)]
        )
        assert all(cell.ub == 0.0 for cell in report.cells)
        assert all(cell.classification == FAIR for cell in report.cells)

    def test_classification_thresholds(self, compas_summary):
        report = bias_report(compas_summary, tolerance=0.1)
        assert report.cell(GroupKey(("w", "c")), "H").classification == BIAS_AGAINST
        assert report.cell(GroupKey(("m", "o")), "H").classification == BIAS_IN_FAVOR
        assert report.cell(GroupKey(("m", None)), "L").classification == FAIR

    def test_undefined_cells(self, adult_schema):
        summary = SummaryTable.from_cells(adult_schema, {(("Male",), "+"): 5, (("Male",), "-"): 5})
        report = bias_report(summary, groups=[FEMALE])
        assert all(c.classification == UNDEFINED for c in report.cells)
        assert all(c.ub is None for c in report.cells)

    def test_mitigated_table_is_nearly_unbiased(self, compas_summary):
        # the worst cell, (w,c,H), sits at 1.0006e-3: a whisker above the
        # round 1e-3 but well inside its derivable flooring slack
        # 1/(f_H * S_wc) = 1.46e-3
        from fairtab import apply_plan, minimal_mitigation

        mitigated = apply_plan(compas_summary, minimal_mitigation(compas_summary))
        report = bias_report(mitigated, tolerance=0.0011)
        assert all(abs(cell.ub) <= 0.0010006 for cell in report.cells)
        assert all(cell.classification == FAIR for cell in report.cells)

    def test_per_cell_tolerance_override(self, compas_summary):
        wc_h = (GroupKey(("w", "c")), "H")
        report = bias_report(
            compas_summary, tolerance=0.1, per_cell_tolerance={wc_h: 0.5}
        )
        assert report.cell(*wc_h).classification == FAIR

    def test_text_rendering_aligned(self, compas_summary):
        text = bias_report(compas_summary).to_text()
        lines = text.splitlines()
        assert len(lines) == 25
        assert len({line.index("class") for line in lines[:1]}) == 1


class TestIsUnbiased:
    def test_compas_witness(self, compas_summary):
        ok, witness = is_unbiased(compas_summary, 0.1)
        assert not ok
        group, label, value = witness
        assert group == GroupKey(("w", "c")) and label == "H"
        assert value == pytest.approx(0.384, abs=0.0005)

    def test_single_group_tau_zero(self):
        schema = FairnessSchema((("g", ("only",)),), "lab", ("a", "b"))
        summary = SummaryTable.from_cells(
            schema, {(("only",), "a"): 3, (("only",), "b"): 7}
        )
        ok, witness = is_unbiased(summary, 0.0)
        assert ok and witness is None


class TestInvariantProperties:
    def test_scale_invariance(self, compas_summary):
        scaled = SummaryTable.from_cells(
            compas_summary.schema,
            {cell: 17 * count for (cell, count) in (
                ((base, label), compas_summary.cell(base, label))
                for base in compas_summary.base_groups()
                for label in compas_summary.schema.label_values
            )},
        )
        protected = GroupKey(("w", None))
        for label in compas_summary.schema.label_values:
            assert uniform_bias_exact(compas_summary, protected, label) == uniform_bias_exact(
                scaled, protected, label
            )
        base_m = classical_measures(compas_summary, protected, "H")
        scaled_m = classical_measures(scaled, protected, "H")
        assert (base_m.ir, base_m.or_, base_m.md) == (scaled_m.ir, scaled_m.or_, scaled_m.md)

    def test_population_weighted_bias_is_zero(self, compas_summary):
        # over any base partition the group-size-weighted bias cancels exactly
        for label in compas_summary.schema.label_values:
            total = Fraction(0)
            for base in compas_summary.base_groups():
                share = Fraction(compas_summary.group_total(base), compas_summary.n)
                total += share * uniform_bias_exact(compas_summary, GroupKey(base), label)
            assert total == 0

    @given(
        counts=st.lists(st.integers(0, 30), min_size=6, max_size=6),
    )
    @settings(max_examples=80, deadline=None)
    def test_population_weighted_bias_is_zero_random(self, counts):
        schema = FairnessSchema((("g", ("a", "b", "c")),), "lab", ("0", "1"))
        cells = {}
        groups = [("a",), ("b",), ("c",)]
        for i, base in enumerate(groups):
            cells[(base, "0")] = counts[2 * i]
            cells[(base, "1")] = counts[2 * i + 1]
        summary = SummaryTable.from_cells(schema, cells)
        for label in ("0", "1"):
            if summary.label_total(label) == 0:
                continue
            total = Fraction(0)
            for base in summary.base_groups():
                share = Fraction(summary.group_total(base), summary.n)
                total += share * uniform_bias_exact(summary, GroupKey(base), label)
            assert total == 0
