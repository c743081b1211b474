import json

import numpy as np
import pytest

from basket_miner.errors import ContractViolationError, InsufficientDataError
from basket_miner.marketdata import IncrementPanel, coarsen
from basket_miner.montecarlo import SynthSpec, planted_market, population_minimizer, synth_iid
from basket_miner.pipeline import (
    RollingRun,
    aggregate,
    build_histogram,
    read_results_jsonl,
    run_rolling,
    run_window,
    window_from_record,
    write_report,
    write_results_jsonl,
)
from basket_miner.stats import hurst_periodogram, sample_autocorr


def iid_panels(n_stocks=6, n_days=16, bars=600, seed=0, deltas=(5, 10)):
    base = synth_iid(SynthSpec(n_stocks=n_stocks, n_days=n_days, bars_per_day=bars, seed=seed))
    return {d: coarsen(base, d) for d in sorted(set(deltas) | {5})}


class TestWindowArithmetic:
    def test_sixteen_windows_for_thirty_days(self):
        panels = iid_panels(n_stocks=4, n_days=30, bars=300, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(5,), delta_list=[5])
        assert len(run.windows) == 16
        assert [w.start_day for w in run.windows] == list(range(16))

    def test_eleven_days_single_window(self):
        panels = iid_panels(n_stocks=4, n_days=11, bars=300, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[5])
        assert len(run.windows) == 1

    def test_ten_days_insufficient(self):
        panels = iid_panels(n_stocks=4, n_days=10, bars=300, deltas=(5,))
        with pytest.raises(InsufficientDataError):
            run_rolling(panels, d_days=10, s_list=(1,), delta_list=[5])

    def test_short_tail_windows_emit_s1_only(self):
        panels = iid_panels(n_stocks=4, n_days=13, bars=300, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1, 5), delta_list=[5])
        assert len(run.windows) == 3  # 13 - 10 - 1 + 1
        assert all(1 in w.rho_test for w in run.windows)
        assert all(5 not in w.rho_test for w in run.windows)

    def test_window_count_per_s(self):
        panels = iid_panels(n_stocks=4, n_days=18, bars=300, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1, 5), delta_list=[5])
        n_days = 18
        assert len(run.windows) == n_days - 10 - 1 + 1
        assert sum(5 in w.rho_test for w in run.windows) == n_days - 10 - 5 + 1


class TestWindowContents:
    def test_significance_definition(self):
        panels = iid_panels(n_days=16, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1, 5), delta_list=[5])
        for w in run.windows:
            for s, rho in w.rho_test.items():
                assert w.significant[s] == (rho < -w.ci_test[s])

    def test_ci_uses_test_period_length(self):
        panels = iid_panels(n_days=16, bars=600, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1, 5), delta_list=[5])
        w = run.windows[0]
        assert w.ci_test[1] == pytest.approx(2.0 / np.sqrt(600), abs=1e-12)
        assert w.ci_test[5] == pytest.approx(2.0 / np.sqrt(3000), abs=1e-12)

    def test_single_stock_quadratic_optimality(self):
        panels = iid_panels(n_stocks=8, n_days=12, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[5])
        for w in run.windows:
            # canonical vectors' quadratic form is the diagonal of C_sym
            c_sym = (w.c_hat + w.c_hat.T) / 2.0
            assert w.lambda_min <= np.diag(c_sym).min() + 1e-12

    def test_negating_weights_changes_nothing(self):
        panels = iid_panels(n_days=12, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[5])
        w = run.windows[0]
        panel = panels[5]
        insample = panel.day_slice(0, 10)
        b = -w.weights @ insample.values
        assert sample_autocorr(b, 1, boundaries=insample.day_boundaries).rho == pytest.approx(
            w.rho_min, abs=1e-12
        )
        assert hurst_periodogram(b).h == pytest.approx(w.hurst.h, abs=1e-12)

    def test_identical_stocks_rank_one_panel(self):
        # All stocks share one anti-persistent series: the minimized basket
        # is the uniform one, its autocorrelation equals the single stock's,
        # and the flat (N-1)-dimensional remainder of the spectrum is flagged.
        rng = np.random.default_rng(3)
        row = np.empty(3000)
        row[0] = rng.standard_normal()
        for t in range(1, 3000):
            row[t] = -0.5 * row[t - 1] + rng.standard_normal()
        values = np.tile(row, (4, 1))
        panel = IncrementPanel(values=values, day_boundaries=np.array([0, 1500]), step_seconds=5,
                               symbols=(0, 1, 2, 3), days=("d0", "d1"))
        result = run_window({5: panel}, 0, 2, (), 5, hurst_delta=5)
        assert result.degenerate
        single = sample_autocorr(row, 1, boundaries=[0, 1500]).rho
        assert result.rho_min == pytest.approx(single, abs=1e-10)
        assert np.allclose(np.abs(result.weights), 0.5, atol=1e-10)

    def test_hurst_uses_finest_scale_panel(self):
        # delta=10 windows must estimate H from the 5 s panel of the same days
        panels = iid_panels(n_days=12, bars=600, deltas=(5, 10))
        run = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[10])
        w = run.windows[0]
        five = panels[5].day_slice(0, 10)
        expected = hurst_periodogram(w.weights @ five.values).h
        assert w.hurst.h == pytest.approx(expected, abs=1e-12)


class TestRolling:
    def test_deterministic_and_thread_invariant(self):
        panels = iid_panels(n_days=14, deltas=(5, 10))
        a = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[5, 10], n_threads=1)
        b = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[5, 10], n_threads=2)
        assert len(a.windows) == len(b.windows)
        for wa, wb in zip(a.windows, b.windows):
            assert wa.delta == wb.delta and wa.window_index == wb.window_index
            assert wa.rho_min == wb.rho_min
            assert np.array_equal(wa.weights, wb.weights)

    def test_ordering_by_delta_then_window(self):
        panels = iid_panels(n_days=13, deltas=(5, 10))
        run = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[10, 5])
        keys = [(w.delta, w.window_index) for w in run.windows]
        assert keys == sorted(keys)

    def test_degenerate_window_skipped_with_reason(self):
        base = synth_iid(SynthSpec(n_stocks=4, n_days=14, bars_per_day=200, seed=4))
        values = base.values.copy()
        # stock 0 goes flat for exactly the days of one window (3..12)
        values[0, 3 * 200 : 13 * 200] = 0.0
        panel = IncrementPanel(values=values, day_boundaries=base.day_boundaries,
                               step_seconds=5, symbols=base.symbols, days=base.days)
        run = run_rolling({5: panel}, d_days=10, s_list=(1,), delta_list=[5])
        assert len(run.skipped) == 1
        assert run.skipped[0].start_day == 3
        assert "stock 0" in run.skipped[0].reason
        assert len(run.windows) == 14 - 10 - 1 + 1 - 1

    def test_requires_hurst_scale_panel(self):
        panels = iid_panels(n_days=12, deltas=(5, 10))
        del panels[5]
        with pytest.raises(ContractViolationError):
            run_rolling(panels, d_days=10, s_list=(1,), delta_list=[10])

    def test_planted_smoke(self):
        for seed in (0, 1):
            spec = SynthSpec(n_stocks=30, n_days=15, bars_per_day=4140, seed=seed,
                             kind="planted", phi=-0.4)
            market = planted_market(spec)
            run = run_rolling({5: market.panel}, d_days=10, s_list=(1, 5), delta_list=[5])
            w = run.windows[0]
            e_star, _ = population_minimizer(spec, market.loadings)
            assert w.rho_min < -0.2
            assert w.significant[5]
            assert abs(float(w.weights @ e_star)) >= 0.9

    def test_iid_minimum_is_modest(self):
        panels = iid_panels(n_stocks=30, n_days=11, bars=500, seed=5, deltas=(5,))
        run = run_rolling(panels, d_days=10, s_list=(1,), delta_list=[5])
        assert abs(run.windows[0].rho_min) < 0.2


class TestAggregate:
    def _toy_run(self):
        panels = iid_panels(n_stocks=5, n_days=16, bars=600, deltas=(5, 10))
        return run_rolling(panels, d_days=10, s_list=(1, 5), delta_list=[5, 10])

    def test_fraction_significant_counting(self):
        run = self._toy_run()
        report = aggregate(run)
        for row in report.summary:
            ws = [w for w in run.windows if w.delta == row["delta"]]
            sig = [w.significant[5] for w in ws if 5 in w.significant]
            assert row["frac_sig_s5"] == pytest.approx(np.mean(sig), abs=1e-12)

    def test_fraction_significant_hand_cases(self):
        run = self._toy_run()
        for w in run.windows:
            w.ci_test[1] = 0.031
        half = len(run.windows) // 2
        for i, w in enumerate(run.windows):
            w.rho_test[1] = -0.05 if i < half else -0.01
            w.significant[1] = w.rho_test[1] < -w.ci_test[1]
        report = aggregate(run)
        pooled = [row["frac_sig_s1"] for row in report.summary]
        assert np.mean(pooled) == pytest.approx(0.5, abs=1e-12)
        for w in run.windows:
            w.rho_test[1] = -0.05
            w.significant[1] = True
        report = aggregate(run)
        assert all(row["frac_sig_s1"] == 1.0 for row in report.summary)

    def test_histogram_count_invariants(self):
        run = self._toy_run()
        report = aggregate(run)
        n_windows = len(run.windows)
        n_stocks = len(run.windows[0].weights)
        per_delta = {row["delta"] for row in report.summary}
        for delta in per_delta:
            ws = [w for w in run.windows if w.delta == delta]
            assert report.rho_histograms[(delta, "rho_min")].total == len(ws)
            assert report.rho_histograms[(delta, "rho_s1")].total == sum(1 in w.rho_test for w in ws)
        assert report.weight_histogram.total == n_windows * n_stocks
        assert report.chat_histogram.total == n_windows * n_stocks ** 2

    def test_histogram_bins(self):
        hist = build_histogram([-0.005, 0.003, 0.017, 0.017], 0.01)
        assert hist.left_edges == pytest.approx([-0.01, 0.0, 0.01], abs=1e-15)
        assert list(hist.counts) == [1, 1, 2]

    def test_empty_aggregate_raises(self):
        with pytest.raises(InsufficientDataError):
            aggregate(RollingRun(windows=[]))


class TestResultsIO:
    def test_jsonl_roundtrip(self, tmp_path):
        run = run_rolling(iid_panels(n_days=12, deltas=(5,)), d_days=10, s_list=(1,), delta_list=[5])
        path = tmp_path / "results.jsonl"
        write_results_jsonl(run, path)
        back = read_results_jsonl(path)
        assert len(back.windows) == len(run.windows)
        for wa, wb in zip(run.windows, back.windows):
            assert wa.rho_min == wb.rho_min
            assert wa.rho_test == wb.rho_test
            assert np.array_equal(wa.weights, wb.weights)
            assert np.array_equal(wa.c_hat, wb.c_hat)
            assert wa.hurst == wb.hurst

    def test_record_schema_keys(self, tmp_path):
        run = run_rolling(iid_panels(n_days=12, deltas=(5,)), d_days=10, s_list=(1,), delta_list=[5])
        path = tmp_path / "results.jsonl"
        write_results_jsonl(run, path)
        rec = json.loads(path.read_text().splitlines()[0])
        expected = {
            "window_index", "delta", "start_day", "minimization_days", "test_days",
            "lambda_min", "degenerate", "weights", "rho_min", "rho_test", "ci_test",
            "significant", "hurst", "c_hat",
        }
        assert set(rec) == expected
        assert window_from_record(rec).delta == 5

    def test_report_files(self, tmp_path):
        run = run_rolling(iid_panels(n_days=16, deltas=(5, 10)), d_days=10, s_list=(1, 5),
                          delta_list=[5, 10])
        report = aggregate(run)
        written = write_report(report, tmp_path)
        names = {p.name for p in written}
        assert "summary.csv" in names
        assert "hist_rho_min_d5.csv" in names and "hist_rho_min_d10.csv" in names
        assert "hist_weights.csv" in names and "hist_chat_entries.csv" in names
        assert "skipped.csv" in names
        header = (tmp_path / "summary.csv").read_text().splitlines()[0]
        assert header == "delta,mean_rho_min,mean_rho_s1,mean_rho_s5,frac_sig_s1,frac_sig_s5,mean_hurst"
        assert len((tmp_path / "summary.csv").read_text().splitlines()) == 3
