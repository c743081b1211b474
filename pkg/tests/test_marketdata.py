import numpy as np
import pytest

from basket_miner.errors import ContractViolationError
from basket_miner.marketdata import (
    SESSION_START,
    BarPanel,
    SessionSpec,
    TickRecord,
    bars_per_day,
    coarsen,
    increments,
    panel_to_ticks,
    parse_ticks,
    sample_bars,
)

from conftest import cumsum_per_day, dense_day_ticks

# Per-day increment counts for every time scale; steps that do not divide the
# 20700 s session lose the residual seconds before 15:45.
PER_DAY_COUNTS = {
    5: 4140, 10: 2070, 15: 1380, 20: 1035, 25: 828, 30: 690,
    35: 591, 40: 517, 45: 460, 50: 414, 55: 376, 60: 345,
}


class TestParseTicks:
    def test_single_line(self):
        parsed = parse_ticks("symbol,timestamp,bid,ask,trade\n1,36000.500,10.00,10.02,10.01\n")
        assert parsed.n_accepted == 1 and parsed.n_rejected == 0
        rec = parsed.records[0]
        assert rec == TickRecord(1, 36000.5, 10.00, 10.02, 10.01)

    def test_crossed_quote_rejected(self):
        parsed = parse_ticks("symbol,timestamp,bid,ask,trade\n1,36000.0,10.05,10.02,10.03\n")
        assert parsed.n_accepted == 0
        assert parsed.n_rejected == 1
        assert parsed.rejects_by_reason == {"crossed_quote": 1}

    def test_non_monotone_timestamp_rejected(self):
        text = (
            "symbol,timestamp,bid,ask,trade\n"
            "1,36010.0,10.00,10.02,10.01\n"
            "1,36005.0,10.00,10.02,10.01\n"
        )
        parsed = parse_ticks(text)
        assert parsed.n_accepted == 1
        assert parsed.rejects_by_reason == {"non_monotone": 1}
        assert parsed.records[0].timestamp == 36010.0

    def test_equal_timestamps_kept(self):
        text = (
            "symbol,timestamp,bid,ask,trade\n"
            "1,36010.0,10.00,10.02,10.01\n"
            "1,36010.0,10.01,10.03,10.02\n"
        )
        assert parse_ticks(text).n_accepted == 2

    def test_empty_input_is_not_an_error(self):
        assert parse_ticks("").n_accepted == 0
        assert parse_ticks("symbol,timestamp,bid,ask,trade\n").n_accepted == 0

    def test_malformed_and_nonpositive_counted(self):
        text = (
            "symbol,timestamp,bid,ask,trade\n"
            "not,a,tick,line\n"
            "1,36000.0,-10.00,10.02,10.01\n"
            "1,36001.0,10.00,10.02,10.01\n"
        )
        parsed = parse_ticks(text)
        assert parsed.n_accepted == 1
        assert parsed.rejects_by_reason == {"malformed": 1, "nonpositive_price": 1}

    def test_date_column(self):
        text = (
            "date,symbol,timestamp,bid,ask,trade\n"
            "2007-01-03,1,36000.0,10.00,10.02,10.01\n"
            "2007-01-04,1,35999.0,10.00,10.02,10.01\n"  # earlier ts on a new day is fine
        )
        parsed = parse_ticks(text)
        assert parsed.n_accepted == 2
        assert [r.date for r in parsed.records] == ["2007-01-03", "2007-01-04"]

    def test_default_date_applied(self):
        parsed = parse_ticks("symbol,timestamp,bid,ask,trade\n1,36000.0,10.00,10.02,10.01\n",
                             default_date="2007-02-01")
        assert parsed.records[0].date == "2007-02-01"


class TestBarArithmetic:
    def test_per_day_counts_at_every_scale(self):
        for step, count in PER_DAY_COUNTS.items():
            assert bars_per_day(step) == count

    def test_floor_rule(self):
        for step in range(1, 101):
            assert bars_per_day(step) == 20700 // step

    def test_session_spec_validation(self):
        with pytest.raises(ContractViolationError):
            SessionSpec(start=36000, end=56000)
        with pytest.raises(ContractViolationError):
            SessionSpec(step_seconds=0)


class TestSampleBars:
    def test_last_trade_midprice_rule(self):
        # Hand application of the sampling rule: the trade at 36004.8 is the
        # last at or before grid time 36005, so the bar is (10.01+10.03)/2.
        ticks = [
            TickRecord(1, 35990.0, 9.99, 10.01, 10.00),
            TickRecord(1, 36001.2, 10.00, 10.02, 10.01),
            TickRecord(1, 36004.8, 10.01, 10.03, 10.02),
        ]
        panel = sample_bars(ticks, SessionSpec(step_seconds=5), [1])
        assert panel.days == ("day0",)
        assert panel.midprices[0, 1, 0] == pytest.approx(10.02, abs=1e-12)

    def test_trade_exactly_at_grid_time_is_included(self):
        ticks = [
            TickRecord(1, 35990.0, 9.99, 10.01, 10.00),
            TickRecord(1, 36005.0, 10.10, 10.12, 10.11),
        ]
        panel = sample_bars(ticks, SessionSpec(step_seconds=5), [1])
        assert panel.midprices[0, 1, 0] == pytest.approx(10.11, abs=1e-12)
        assert panel.midprices[0, 0, 0] == pytest.approx(10.00, abs=1e-12)

    def test_day_dropped_when_any_symbol_unresolvable(self):
        good = dense_day_ticks(1, "d1", seed=1) + dense_day_ticks(2, "d1", seed=2)
        # on d2 symbol 2 only trades after the first grid time
        bad = dense_day_ticks(1, "d2", seed=3) + [
            TickRecord(2, SESSION_START + 100.0, 10.00, 10.02, 10.01, "d2")
        ]
        panel = sample_bars(good + bad, SessionSpec(step_seconds=30), [1, 2])
        assert panel.days == ("d1",)
        assert len(panel.dropped_days) == 1
        assert panel.dropped_days[0][0] == "d2"
        assert "symbol 2" in panel.dropped_days[0][1]

    @pytest.mark.parametrize("step,count", [(5, 4140), (35, 591), (45, 460)])
    def test_full_session_counts(self, step, count):
        ticks = dense_day_ticks(7, "d0", seed=4)
        panel = sample_bars(ticks, SessionSpec(step_seconds=step), [7])
        assert panel.midprices.shape == (1, count + 1, 1)
        inc = increments(panel)
        assert inc.values.shape == (1, count)

    def test_idempotent_resampling(self):
        ticks = dense_day_ticks(1, "d1", seed=5) + dense_day_ticks(1, "d2", seed=6)
        session = SessionSpec(step_seconds=15)
        panel = sample_bars(ticks, session, [1])
        again = sample_bars(panel_to_ticks(panel), session, [1])
        assert again.days == panel.days
        assert np.array_equal(again.midprices, panel.midprices)


class TestIncrements:
    def _panel_from_mids(self, mids, step=5):
        mids = np.asarray(mids, dtype=np.float64)
        return BarPanel(symbols=tuple(range(mids.shape[0])), days=tuple(f"d{i}" for i in range(mids.shape[2])),
                        midprices=mids, step_seconds=step)

    def test_basic_subtraction(self):
        panel = self._panel_from_mids(np.array([[[10.00], [10.02], [10.01]]]))
        inc = increments(panel)
        assert inc.values[0] == pytest.approx([0.02, -0.01], abs=1e-12)
        assert list(inc.day_boundaries) == [0]

    def test_constant_midprices_give_zero_increments(self):
        panel = self._panel_from_mids(np.full((2, 5, 3), 42.0))
        assert np.all(increments(panel).values == 0.0)

    def test_ten_days_at_5s_gives_41400(self):
        rng = np.random.default_rng(0)
        mids = 100.0 + rng.random((2, 4141, 10))
        inc = increments(self._panel_from_mids(mids))
        assert inc.values.shape == (2, 41400)
        assert list(inc.day_boundaries) == [4140 * d for d in range(10)]

    def test_cumsum_recovers_midprices(self):
        rng = np.random.default_rng(1)
        mids = 100.0 + rng.random((3, 21, 4))
        panel = self._panel_from_mids(mids)
        inc = increments(panel)
        levels = cumsum_per_day(inc.values, inc.day_boundaries)
        for d in range(4):
            rebuilt = mids[:, 0, d][:, None] + levels[:, d * 20 : (d + 1) * 20]
            assert np.allclose(rebuilt, mids[:, 1:, d], atol=1e-9)

    def test_day_slice(self):
        rng = np.random.default_rng(2)
        inc = increments(self._panel_from_mids(100.0 + rng.random((2, 11, 5))))
        part = inc.day_slice(1, 3)
        assert part.days == ("d1", "d2")
        assert np.array_equal(part.values, inc.values[:, 10:30])
        assert list(part.day_boundaries) == [0, 10]


class TestCoarsen:
    def test_matches_direct_sampling(self):
        ticks = dense_day_ticks(1, "d1", seed=7) + dense_day_ticks(1, "d2", seed=8)
        base = increments(sample_bars(ticks, SessionSpec(step_seconds=5), [1]))
        for step in (10, 35, 60):
            direct = increments(sample_bars(ticks, SessionSpec(step_seconds=step), [1]))
            derived = coarsen(base, step)
            assert derived.values.shape == direct.values.shape
            assert np.allclose(derived.values, direct.values, atol=1e-9)
            assert np.array_equal(derived.day_boundaries, direct.day_boundaries)

    def test_rejects_non_multiple(self):
        ticks = dense_day_ticks(1, "d1", seed=9)
        base = increments(sample_bars(ticks, SessionSpec(step_seconds=5), [1]))
        with pytest.raises(ContractViolationError):
            coarsen(base, 12)
