"""Rolling minimization/test procedure and report aggregation.

One window = fit weights on D consecutive days (minimization period), then
evaluate the same basket out-of-sample on the immediately following S days
(test period), for S in {1, 5}. The minimization period then shifts ahead
by one day. Windows are independent jobs; results are ordered
deterministically by (time scale, window index).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import ContractViolationError, DegenerateSeriesError, InsufficientDataError
from .lagcorr import basket_series, lagged_corr, min_eigvec, normalize
from .marketdata import IncrementPanel
from .stats import HurstEstimate, ci_halfwidth, hurst_periodogram, sample_autocorr

SPECTRUM_GAP = 1e-10


@dataclass
class WindowResult:
    """One rolling window: weights, eigenvalue, in/out-of-sample statistics.

    ``rho_test``, ``ci_test`` and ``significant`` are keyed by S; windows
    near the end of the data carry only the S values whose test days fit.
    ``significant[S]`` is exactly (rho_test[S] < -ci_test[S]).
    """

    window_index: int
    delta: int
    start_day: int
    minimization_days: tuple[str, ...]
    test_days: dict[int, tuple[str, ...]]
    lambda_min: float
    degenerate: bool
    weights: np.ndarray
    rho_min: float
    rho_test: dict[int, float]
    ci_test: dict[int, float]
    significant: dict[int, bool]
    hurst: HurstEstimate
    c_hat: np.ndarray


@dataclass
class SkippedWindow:
    """A window dropped with a reason code (e.g. a zero-variance stock)."""

    delta: int
    window_index: int
    start_day: int
    reason: str


@dataclass
class RollingRun:
    """All window results of one rolling run, plus the skipped windows."""

    windows: list[WindowResult]
    skipped: list[SkippedWindow] = field(default_factory=list)

    def __iter__(self) -> Iterator[WindowResult]:
        return iter(self.windows)

    def __len__(self) -> int:
        return len(self.windows)


def run_window(
    panels: Mapping[int, IncrementPanel],
    start_day: int,
    d_days: int,
    s_list: Sequence[int],
    delta: int,
    *,
    lag: int = 1,
    hurst_delta: int = 5,
    exclude_boundaries: bool = True,
) -> WindowResult:
    """Fit and test the minimum-autocorrelation basket for one window.

    Weights are fitted on the volatility-normalized increments of days
    [start_day, start_day + D) at time scale ``delta``; rho_min and every
    rho_test come from the *raw*-increment basket. The Hurst exponent is
    estimated from the same weights applied to the ``hurst_delta`` (5 s)
    increments of the minimization days, since H measures a global property
    best resolved at the finest scale.
    """
    panel = panels[delta]
    insample = panel.day_slice(start_day, start_day + d_days)
    corr = lagged_corr(normalize(insample), k=lag, exclude_boundaries=exclude_boundaries)
    weights = min_eigvec(corr)
    bounds_in = insample.day_boundaries if exclude_boundaries else None
    rho_min = sample_autocorr(basket_series(weights, insample), k=lag, boundaries=bounds_in).rho

    rho_test: dict[int, float] = {}
    ci_test: dict[int, float] = {}
    significant: dict[int, bool] = {}
    test_days: dict[int, tuple[str, ...]] = {}
    for s in sorted(int(s) for s in s_list):
        if start_day + d_days + s > panel.n_days:
            continue
        test = panel.day_slice(start_day + d_days, start_day + d_days + s)
        bounds = test.day_boundaries if exclude_boundaries else None
        est = sample_autocorr(basket_series(weights, test), k=lag, boundaries=bounds)
        ci = ci_halfwidth(est.n)
        rho_test[s] = est.rho
        ci_test[s] = ci
        significant[s] = bool(est.rho < -ci)
        test_days[s] = test.days

    hurst_window = panels[hurst_delta].day_slice(start_day, start_day + d_days)
    hurst = hurst_periodogram(basket_series(weights, hurst_window))

    eig_gaps = np.diff(weights.eigenvalues)
    return WindowResult(
        window_index=start_day,
        delta=int(delta),
        start_day=start_day,
        minimization_days=insample.days,
        test_days=test_days,
        lambda_min=weights.lambda_min,
        degenerate=bool(weights.degenerate or (eig_gaps < SPECTRUM_GAP).any()),
        weights=weights.e,
        rho_min=rho_min,
        rho_test=rho_test,
        ci_test=ci_test,
        significant=significant,
        hurst=hurst,
        c_hat=corr.c_hat,
    )


def run_rolling(
    panels: Mapping[int, IncrementPanel],
    d_days: int = 10,
    s_list: Sequence[int] = (1, 5),
    delta_list: Sequence[int] | None = None,
    *,
    lag: int = 1,
    hurst_delta: int = 5,
    exclude_boundaries: bool = True,
    n_threads: int = 1,
) -> RollingRun:
    """Roll the minimization/test window day by day over every time scale.

    The window count per time scale is n_days - D - min(S) + 1; windows
    whose longer test period does not fit emit results for the shorter S
    only. Degenerate windows are skipped with a diagnostic rather than
    silently vanishing.
    """
    if d_days < 2:
        raise ContractViolationError(f"D must be >= 2, got {d_days}")
    if delta_list is None:
        delta_list = sorted(panels.keys())
    missing = [d for d in (*delta_list, hurst_delta) if d not in panels]
    if missing:
        raise ContractViolationError(f"panels missing for time scales {missing}")
    day_sets = {p.days for p in panels.values()}
    if len(day_sets) != 1:
        raise ContractViolationError("all panels must cover the same days")
    n_days = len(next(iter(day_sets)))
    s_list = sorted(int(s) for s in s_list)
    if not s_list:
        raise ContractViolationError("need at least one test-period length S")
    n_windows = n_days - d_days - s_list[0] + 1
    if n_windows <= 0:
        raise InsufficientDataError(
            f"{n_days} days cannot host a window of D={d_days} plus S={s_list[0]} test days"
        )

    jobs = [(delta, w) for delta in delta_list for w in range(n_windows)]

    def one(job: tuple[int, int]):
        delta, w = job
        try:
            return run_window(
                panels, w, d_days, s_list, delta,
                lag=lag, hurst_delta=hurst_delta, exclude_boundaries=exclude_boundaries,
            )
        except DegenerateSeriesError as exc:
            return SkippedWindow(delta=delta, window_index=w, start_day=w, reason=str(exc))

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            outcomes = list(pool.map(one, jobs))
    else:
        outcomes = [one(j) for j in jobs]

    windows = [o for o in outcomes if isinstance(o, WindowResult)]
    skipped = [o for o in outcomes if isinstance(o, SkippedWindow)]
    windows.sort(key=lambda r: (r.delta, r.window_index))
    skipped.sort(key=lambda r: (r.delta, r.window_index))
    return RollingRun(windows=windows, skipped=skipped)


# ---------------------------------------------------------------------------
# aggregation and report emission
# ---------------------------------------------------------------------------


@dataclass
class Histogram:
    """Fixed-width histogram; bins are [left, left + width) aligned to zero."""

    width: float
    left_edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def build_histogram(values, width: float) -> Histogram:
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        return Histogram(width=width, left_edges=np.empty(0), counts=np.empty(0, dtype=np.int64))
    idx = np.floor(values / width).astype(np.int64)
    lo, hi = int(idx.min()), int(idx.max())
    counts = np.bincount(idx - lo, minlength=hi - lo + 1)
    left = (np.arange(lo, hi + 1)) * width
    return Histogram(width=width, left_edges=left, counts=counts.astype(np.int64))


@dataclass
class RunReport:
    """Aggregated statistics of a rolling run, ready for CSV emission."""

    summary: list[dict]
    rho_histograms: dict[tuple[int, str], Histogram]
    weight_histogram: Histogram
    chat_histogram: Histogram
    hurst_histogram: Histogram
    skipped: list[SkippedWindow]


def _mean(values: list[float]) -> float:
    return float(np.mean(values)) if values else float("nan")


def aggregate(
    run: RollingRun,
    *,
    bin_corr: float = 0.01,
    bin_weights: float = 0.02,
    bin_hurst: float = 0.02,
) -> RunReport:
    """Histograms, per-scale means, and fraction-significant statistics."""
    windows = run.windows if isinstance(run, RollingRun) else list(run)
    if not windows:
        raise InsufficientDataError("no window results to aggregate")
    deltas = sorted({w.delta for w in windows})
    summary: list[dict] = []
    rho_hists: dict[tuple[int, str], Histogram] = {}
    for delta in deltas:
        ws = [w for w in windows if w.delta == delta]
        rho_min = [w.rho_min for w in ws]
        rho_s1 = [w.rho_test[1] for w in ws if 1 in w.rho_test]
        rho_s5 = [w.rho_test[5] for w in ws if 5 in w.rho_test]
        sig_s1 = [w.significant[1] for w in ws if 1 in w.significant]
        sig_s5 = [w.significant[5] for w in ws if 5 in w.significant]
        summary.append(
            {
                "delta": delta,
                "mean_rho_min": _mean(rho_min),
                "mean_rho_s1": _mean(rho_s1),
                "mean_rho_s5": _mean(rho_s5),
                "frac_sig_s1": _mean([float(s) for s in sig_s1]),
                "frac_sig_s5": _mean([float(s) for s in sig_s5]),
                "mean_hurst": _mean([w.hurst.h for w in ws]),
            }
        )
        rho_hists[(delta, "rho_min")] = build_histogram(rho_min, bin_corr)
        rho_hists[(delta, "rho_s1")] = build_histogram(rho_s1, bin_corr)
        rho_hists[(delta, "rho_s5")] = build_histogram(rho_s5, bin_corr)
    all_weights = np.concatenate([w.weights for w in windows])
    all_chat = np.concatenate([w.c_hat.ravel() for w in windows])
    all_hurst = np.asarray([w.hurst.h for w in windows])
    skipped = run.skipped if isinstance(run, RollingRun) else []
    return RunReport(
        summary=summary,
        rho_histograms=rho_hists,
        weight_histogram=build_histogram(all_weights, bin_weights),
        chat_histogram=build_histogram(all_chat, bin_corr),
        hurst_histogram=build_histogram(all_hurst, bin_hurst),
        skipped=list(skipped),
    )


def _fmt(x) -> str:
    """Canonical text for a float: shortest round-trip repr, 'nan' when undefined."""
    x = float(x)
    return repr(x)


def write_text_lf(path, text: str) -> None:
    """Write text with LF endings regardless of platform (outputs are byte-stable)."""
    Path(path).write_text(text, newline="\n")


def _window_record(w: WindowResult) -> dict:
    return {
        "window_index": w.window_index,
        "delta": w.delta,
        "start_day": w.start_day,
        "minimization_days": list(w.minimization_days),
        "test_days": {str(s): list(days) for s, days in w.test_days.items()},
        "lambda_min": float(w.lambda_min),
        "degenerate": bool(w.degenerate),
        "weights": [float(x) for x in w.weights],
        "rho_min": float(w.rho_min),
        "rho_test": {str(s): float(v) for s, v in w.rho_test.items()},
        "ci_test": {str(s): float(v) for s, v in w.ci_test.items()},
        "significant": {str(s): bool(v) for s, v in w.significant.items()},
        "hurst": {
            "h": float(w.hurst.h),
            "slope": float(w.hurst.slope),
            "n_frequencies_used": int(w.hurst.n_frequencies_used),
        },
        "c_hat": [[float(x) for x in row] for row in w.c_hat],
    }


def window_from_record(rec: dict) -> WindowResult:
    """Inverse of the JSONL record schema (used by the standalone report command)."""
    return WindowResult(
        window_index=int(rec["window_index"]),
        delta=int(rec["delta"]),
        start_day=int(rec["start_day"]),
        minimization_days=tuple(rec["minimization_days"]),
        test_days={int(s): tuple(days) for s, days in rec["test_days"].items()},
        lambda_min=float(rec["lambda_min"]),
        degenerate=bool(rec["degenerate"]),
        weights=np.asarray(rec["weights"], dtype=np.float64),
        rho_min=float(rec["rho_min"]),
        rho_test={int(s): float(v) for s, v in rec["rho_test"].items()},
        ci_test={int(s): float(v) for s, v in rec["ci_test"].items()},
        significant={int(s): bool(v) for s, v in rec["significant"].items()},
        hurst=HurstEstimate(
            h=float(rec["hurst"]["h"]),
            slope=float(rec["hurst"]["slope"]),
            n_frequencies_used=int(rec["hurst"]["n_frequencies_used"]),
        ),
        c_hat=np.asarray(rec["c_hat"], dtype=np.float64),
    )


def write_results_jsonl(run: RollingRun, path) -> None:
    """One JSON record per window, sorted keys, LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        for w in run.windows:
            fh.write(json.dumps(_window_record(w), sort_keys=True))
            fh.write("\n")


def read_results_jsonl(path) -> RollingRun:
    windows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                windows.append(window_from_record(json.loads(line)))
    return RollingRun(windows=windows)


def write_histogram_csv(hist: Histogram, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["bin_left,bin_right,count"]
    for left, count in zip(hist.left_edges, hist.counts):
        if count == 0:
            continue
        lines.append(f"{_fmt(left)},{_fmt(left + hist.width)},{int(count)}")
    write_text_lf(path, "\n".join(lines) + "\n")


def write_report(report: RunReport, outdir) -> list[Path]:
    """Emit summary.csv, per-scale rho histograms, the pooled weight / C_hat /
    Hurst histograms, and skipped.csv. Returns the paths written."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    summary_path = outdir / "summary.csv"
    cols = ["delta", "mean_rho_min", "mean_rho_s1", "mean_rho_s5", "frac_sig_s1", "frac_sig_s5", "mean_hurst"]
    lines = [",".join(cols)]
    for row in report.summary:
        lines.append(",".join([str(row["delta"])] + [_fmt(row[c]) for c in cols[1:]]))
    write_text_lf(summary_path, "\n".join(lines) + "\n")
    written.append(summary_path)

    for (delta, kind), hist in sorted(report.rho_histograms.items()):
        p = outdir / f"hist_{kind}_d{delta}.csv"
        write_histogram_csv(hist, p)
        written.append(p)
    for name, hist in (
        ("hist_weights.csv", report.weight_histogram),
        ("hist_chat_entries.csv", report.chat_histogram),
        ("hist_hurst.csv", report.hurst_histogram),
    ):
        p = outdir / name
        write_histogram_csv(hist, p)
        written.append(p)

    skipped_path = outdir / "skipped.csv"
    lines = ["delta,window_index,start_day,reason"]
    for s in report.skipped:
        reason = s.reason.replace(",", ";")
        lines.append(f"{s.delta},{s.window_index},{s.start_day},{reason}")
    write_text_lf(skipped_path, "\n".join(lines) + "\n")
    written.append(skipped_path)
    return written
