from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from eigenmarket import (
    ExclusionCalendar,
    ExclusionWarning,
    FillFlag,
    PanelIntegrityError,
    PanelParseError,
    align_and_fill,
    apply_exclusions,
    load_exclusions,
    load_metadata,
    load_panel,
)
from eigenmarket.ingest import fill_counts, write_metadata_csv, write_panel_csv
from helpers import make_price_panel

O = FillFlag.OBSERVED
B = FillFlag.BACKFILLED_FROM_LISTING
F = FillFlag.FORWARD_FILLED
M = FillFlag.MISSING


def write(tmp_path, text, name="panel.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadPanel:
    def test_complete_csv(self, tmp_path):
        p = write(tmp_path, "date,1,2\n2020-01-02,10,20\n2020-01-03,11,21\n")
        panel = load_panel(p)
        assert panel.n == 2 and panel.t == 2
        assert (panel.fill_flags == O).all()
        assert panel.prices[1, 1] == 21.0
        assert panel.labels == (1, 2)

    def test_empty_cell_marked_missing(self, tmp_path):
        p = write(tmp_path, "date,1\n2020-01-02,10\n2020-01-03,\n2020-01-06,12\n")
        panel = load_panel(p)
        assert panel.has_missing()
        assert panel.fill_flags[0, 1] == M
        assert np.isnan(panel.prices[0, 1])

    def test_bad_month_is_parse_error(self, tmp_path):
        p = write(tmp_path, "date,1\n2020-13-01,10\n")
        with pytest.raises(PanelParseError, match="2020-13-01"):
            load_panel(p)

    def test_non_numeric_cell_names_instrument(self, tmp_path):
        p = write(tmp_path, "date,1,2\n2020-01-02,10,oops\n")
        with pytest.raises(PanelParseError, match="'oops'.*instrument 2"):
            load_panel(p)

    def test_duplicate_date_is_integrity_error(self, tmp_path):
        p = write(tmp_path, "date,1\n2020-01-02,10\n2020-01-02,11\n")
        with pytest.raises(PanelIntegrityError, match="duplicate date"):
            load_panel(p)

    def test_dates_sorted_ascending(self, tmp_path):
        p = write(tmp_path, "date,1\n2020-01-03,11\n2020-01-02,10\n")
        panel = load_panel(p)
        assert panel.dates == (date(2020, 1, 2), date(2020, 1, 3))
        assert list(panel.prices[0]) == [10.0, 11.0]

    def test_comment_lines_skipped(self, tmp_path):
        p = write(tmp_path, "# generator: whatever\ndate,1\n2020-01-02,10\n")
        assert load_panel(p).t == 1

    def test_non_integer_header_label(self, tmp_path):
        p = write(tmp_path, "date,AAPL\n2020-01-02,10\n")
        with pytest.raises(PanelParseError, match="not an integer label"):
            load_panel(p)

    def test_metadata_attachment(self, tmp_path):
        meta_csv = write(
            tmp_path,
            "label,name,exchange,country,listing_date\n"
            "1,Corn,BMF,Brazil,2008-11-18\n",
            "meta.csv",
        )
        p = write(tmp_path, "date,1\n2020-01-02,10\n2020-01-03,11\n")
        meta = load_metadata(meta_csv)
        panel = load_panel(p, meta)
        assert panel.instruments[0].name == "Corn"
        assert panel.instruments[0].listing_date == date(2008, 11, 18)

    def test_missing_metadata_label(self, tmp_path):
        meta_csv = write(
            tmp_path, "label,name,exchange,country,listing_date\n", "meta.csv"
        )
        p = write(tmp_path, "date,1\n2020-01-02,10\n")
        with pytest.raises(PanelIntegrityError, match="no metadata"):
            load_panel(p, load_metadata(meta_csv))


class TestAlignAndFill:
    def test_backfill_and_forward_fill(self):
        raw = make_price_panel([[np.nan, np.nan, 105, np.nan, 110]])
        filled = align_and_fill(raw)
        assert list(filled.prices[0]) == [105, 105, 105, 105, 110]
        assert list(filled.fill_flags[0]) == [B, B, O, F, O]

    def test_fully_observed_unchanged(self):
        raw = make_price_panel([[100, 101, 102]])
        assert align_and_fill(raw) is raw

    def test_consecutive_gaps_fall_back(self):
        raw = make_price_panel([[np.nan, 100, np.nan, np.nan, 102]])
        filled = align_and_fill(raw)
        assert list(filled.prices[0]) == [100, 100, 100, 100, 102]
        assert list(filled.fill_flags[0]) == [B, O, F, F, O]

    def test_zero_observations_names_instrument(self):
        raw = make_price_panel([[100, 101], [np.nan, np.nan]])
        with pytest.raises(PanelIntegrityError, match="instrument 2"):
            align_and_fill(raw)

    def test_observed_count_preserved(self):
        raw = make_price_panel([[np.nan, 10, np.nan, 12], [1, np.nan, 3, 4]])
        filled = align_and_fill(raw)
        assert fill_counts(filled)["observed"] == 5
        assert not filled.has_missing()

    @given(
        st.lists(
            st.lists(st.one_of(st.none(), st.floats(1.0, 1e4)), min_size=2, max_size=12),
            min_size=1,
            max_size=5,
        )
    )
    @settings(max_examples=60, deadline=None)
    def test_idempotent(self, grid):
        width = max(len(row) for row in grid)
        rows = [
            [np.nan if (i >= len(row) or row[i] is None) else row[i] for i in range(width)]
            for row in grid
        ]
        if any(all(np.isnan(x) for x in row) for row in rows):
            return
        raw = make_price_panel(rows)
        once = align_and_fill(raw)
        twice = align_and_fill(once)
        assert np.array_equal(once.prices, twice.prices)
        assert np.array_equal(once.fill_flags, twice.fill_flags)


class TestApplyExclusions:
    def test_removes_date_panel_wide(self):
        panel = make_price_panel([[1, 2, 3, 4, 5], [6, 7, 8, 9, 10]])
        cal = ExclusionCalendar(frozenset({panel.dates[2]}))
        out = apply_exclusions(panel, cal)
        assert out.t == 4 and out.n == 2
        assert panel.dates[2] not in out.dates
        assert list(out.prices[0]) == [1, 2, 4, 5]

    def test_empty_calendar_identity(self):
        panel = make_price_panel([[1, 2, 3]])
        assert apply_exclusions(panel, ExclusionCalendar.empty()) is panel

    def test_absent_date_warns_and_ignored(self):
        panel = make_price_panel([[1, 2, 3]])
        cal = ExclusionCalendar(frozenset({date(1999, 1, 1)}))
        with pytest.warns(ExclusionWarning) as record:
            out = apply_exclusions(panel, cal)
        assert len(record) == 1
        assert np.array_equal(out.prices, panel.prices)

    def test_fill_then_exclude_handles_sole_observation(self):
        # the excluded date carries the instrument's only observation:
        # the fixed fill-then-exclude order works, the reverse cannot
        raw = make_price_panel([[np.nan, 50, np.nan], [1, 2, 3]])
        cal = ExclusionCalendar(frozenset({raw.dates[1]}))
        filled_first = apply_exclusions(align_and_fill(raw), cal)
        assert list(filled_first.prices[0]) == [50, 50]
        with pytest.raises(PanelIntegrityError):
            align_and_fill(apply_exclusions(raw, cal))


class TestSidecarsAndRoundTrip:
    def test_exclusion_file(self, tmp_path):
        p = write(tmp_path, "# change dates\n2012-05-21\n\n2013-01-02  # note\n", "ex.txt")
        cal = load_exclusions(p)
        assert cal.dates == frozenset({date(2012, 5, 21), date(2013, 1, 2)})

    def test_bad_exclusion_date(self, tmp_path):
        p = write(tmp_path, "2012-99-21\n", "ex.txt")
        with pytest.raises(PanelParseError):
            load_exclusions(p)

    def test_metadata_roundtrip(self, tmp_path):
        panel = make_price_panel([[1, 2], [3, 4]])
        path = tmp_path / "meta.csv"
        write_metadata_csv(panel.instruments, path)
        loaded = load_metadata(path)
        assert loaded[1] == panel.instruments[0]
        assert loaded[2] == panel.instruments[1]

    def test_panel_roundtrip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(3)
        panel = make_price_panel(100.0 * np.exp(rng.normal(0, 0.01, (3, 7))))
        path = tmp_path / "panel.csv"
        write_panel_csv(panel, path, header_comment="roundtrip check")
        back = load_panel(path)
        assert back.dates == panel.dates
        assert np.array_equal(back.prices, panel.prices)

    def test_missing_cells_roundtrip(self, tmp_path):
        panel = make_price_panel([[np.nan, 10.5, np.nan]])
        path = tmp_path / "panel.csv"
        write_panel_csv(panel, path)
        back = load_panel(path)
        assert back.has_missing()
        assert list(back.fill_flags[0]) == [M, O, M]
