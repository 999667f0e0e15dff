import numpy as np
import pytest

from qdid.data_model import (
    CovariateCell,
    PanelData,
    RcsData,
    build_cells,
    validate,
)


def make_panel(y_pre, y_post, treated, covariates=None, unit_ids=None):
    n = len(y_pre)
    if covariates is None:
        covariates = np.empty((n, 0), dtype=int)
    if unit_ids is None:
        unit_ids = np.arange(n)
    return PanelData(
        unit_ids=unit_ids,
        y_pre=y_pre,
        y_post=y_post,
        treated=treated,
        covariates=covariates,
    )


class TestBuildCells:
    def test_exact_partition_two_cells(self):
        data = make_panel(
            [0.0, 1.0, 2.0, 3.0],
            [1.0, 2.0, 3.0, 4.0],
            [True, False, True, False],
            covariates=np.array([[0], [0], [1], [1]]),
        )
        cells = build_cells(data, min_cell_size=1)
        assert [c.code for c in cells] == [(0,), (1,)]
        assert all(c.n_treated + c.n_control == 2 for c in cells)

    def test_empty_arity_single_cell(self):
        data = make_panel([0.0, 1.0, 2.0], [0.0, 1.0, 2.0], [True, False, False])
        cells = build_cells(data, min_cell_size=1)
        assert len(cells) == 1
        assert cells[0].code == ()
        assert cells[0].n_treated + cells[0].n_control == 3

    def test_cell_without_controls_flagged_not_dropped(self):
        data = make_panel(
            [0.0, 1.0, 2.0],
            [0.0, 1.0, 2.0],
            [True, False, True],
            covariates=np.array([[0], [0], [1]]),
        )
        cells = build_cells(data, min_cell_size=1)
        assert len(cells) == 2
        flagged = cells[1]
        assert flagged.code == (1,)
        assert not flagged.viable
        assert "control" in flagged.reason
        assert cells[0].viable

    def test_partition_exhaustive_and_exclusive(self):
        rng = np.random.default_rng(3)
        n = 200
        data = make_panel(
            rng.normal(size=n),
            rng.normal(size=n),
            rng.integers(0, 2, n).astype(bool),
            covariates=rng.integers(0, 3, size=(n, 2)),
        )
        cells = build_cells(data, min_cell_size=0)
        seen = np.concatenate([np.concatenate([c.treated_rows, c.control_rows]) for c in cells])
        assert sorted(seen.tolist()) == list(range(n))

    def test_lexicographic_order_and_determinism(self):
        covs = np.array([[1, 0], [0, 1], [0, 0], [1, 1], [0, 1]])
        data = make_panel(
            np.zeros(5), np.zeros(5), [True, False, True, False, True], covariates=covs
        )
        first = build_cells(data, min_cell_size=0)
        second = build_cells(data, min_cell_size=0)
        assert [c.code for c in first] == [(0, 0), (0, 1), (1, 0), (1, 1)]
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.treated_rows, b.treated_rows)
            np.testing.assert_array_equal(a.control_rows, b.control_rows)

    def test_rcs_viability_checks_all_four_arms(self):
        data = RcsData(
            y=np.arange(5.0),
            period=np.array([0, 1, 0, 1, 0]),
            treated=np.array([False, False, True, True, True]),
            covariates=np.empty((5, 0), dtype=int),
        )
        cells = build_cells(data, min_cell_size=1)
        assert cells[0].viable
        short = build_cells(data, min_cell_size=2)
        assert not short[0].viable
        assert "treated post" in short[0].reason


class TestValidate:
    def test_clean_panel_accepted(self):
        data = make_panel(np.arange(10.0), np.arange(10.0), [True] * 5 + [False] * 5)
        assert validate(data).ok

    def test_nan_outcome_rejected_with_row(self):
        y = np.arange(10.0)
        y[3] = np.nan
        data = make_panel(y, np.arange(10.0), [True] * 5 + [False] * 5)
        report = validate(data)
        assert not report.ok
        assert 3 in report.issues[0].rows

    def test_duplicate_unit_rejected(self):
        data = make_panel(
            [0.0, 1.0], [0.0, 1.0], [True, False], unit_ids=np.array(["a", "a"])
        )
        assert not validate(data).ok

    def test_rcs_duplicate_unit_period_rejected(self):
        data = RcsData(
            y=np.zeros(3),
            period=np.array([0, 0, 1]),
            treated=np.array([True, True, False]),
            covariates=np.empty((3, 0), dtype=int),
            unit_ids=np.array(["u1", "u1", "u1"]),
        )
        report = validate(data)
        assert not report.ok
        assert "duplicate (unit, period)" in str(report)

    def test_rcs_without_unit_ids_accepted(self):
        data = RcsData(
            y=np.zeros(4),
            period=np.array([0, 0, 1, 1]),
            treated=np.array([True, False, True, False]),
            covariates=np.empty((4, 0), dtype=int),
        )
        assert validate(data).ok

    def test_rcs_bad_period_rejected(self):
        data = RcsData(
            y=np.zeros(2),
            period=np.array([0, 2]),
            treated=np.array([True, False]),
            covariates=np.empty((2, 0), dtype=int),
        )
        assert not validate(data).ok

    def test_fractional_covariates_rejected(self):
        data = make_panel(
            [0.0, 1.0],
            [0.0, 1.0],
            [True, False],
            covariates=np.array([[0.5], [1.0]]),
        )
        report = validate(data)
        assert not report.ok
        assert "discrete" in str(report)

    def test_integer_valued_float_covariates_accepted(self):
        data = make_panel(
            [0.0, 1.0],
            [0.0, 1.0],
            [True, False],
            covariates=np.array([[2.0], [1.0]]),
        )
        assert validate(data).ok


class TestConstruction:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            make_panel([0.0, 1.0], [0.0], [True, False])
        with pytest.raises(ValueError):
            make_panel([0.0, 1.0], [0.0, 1.0], [True, False], covariates=np.zeros((3, 1)))

    def test_n_total(self):
        panel = make_panel(np.zeros(4), np.zeros(4), [True, False, True, False])
        assert panel.n_total == 4
        rcs = RcsData(
            y=np.zeros(6),
            period=np.array([0, 0, 0, 1, 1, 1]),
            treated=np.array([True, False, True, False, True, False]),
            covariates=np.empty((6, 0), dtype=int),
        )
        assert rcs.n_total == 6

    def test_cell_label(self):
        assert CovariateCell((), np.array([0]), np.array([1])).label() == "all"
        assert CovariateCell((1, 2), np.array([0]), np.array([1])).label() == "1|2"
