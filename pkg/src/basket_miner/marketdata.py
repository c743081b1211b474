"""Tick ingestion and fixed-clock midprice bar sampling.

Turns raw trade records (each carrying the bid/ask quotes that prevailed
immediately before the transaction) into a rectangular panel of midprice
bars on a fixed seconds grid covering the 10:00:00-15:45:00 session, and
into the raw midprice increments the rest of the package consumes.

Sampling rule: at every grid time we take the last trade at or before that
time and use the midprice (bid+ask)/2 of the quotes attached to it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import ContractViolationError, InsufficientDataError

SESSION_START = 36000  # 10:00:00, seconds since midnight
SESSION_END = 56700    # 15:45:00
SESSION_SECONDS = SESSION_END - SESSION_START  # 20700

# Prices are snapped to an integer micro-price grid (1e-6 currency units)
# before any bar arithmetic, so midprices carry no accumulated float drift.
PRICE_SCALE = 10 ** 6

TICK_CSV_COLUMNS = ("symbol", "timestamp", "bid", "ask", "trade")


def bars_per_day(step_seconds: int) -> int:
    """Increments per session at the given clock step.

    Residual seconds before 15:45 are discarded whenever the step does not
    divide the 20700 s session exactly (e.g. 35 s -> 591 increments, the
    last 15 s of the session unused).
    """
    step = int(step_seconds)
    if step < 1 or step > SESSION_SECONDS:
        raise ContractViolationError(f"step_seconds must be in [1, {SESSION_SECONDS}], got {step_seconds}")
    return SESSION_SECONDS // step


@dataclass(frozen=True)
class TickRecord:
    """One trade with its immediately-preceding quotes.

    ``timestamp`` is seconds since midnight with millisecond precision.
    Valid records have positive prices, bid <= ask, and non-decreasing
    timestamps per symbol; ``parse_ticks`` filters anything else out.
    """

    symbol_id: int
    timestamp: float
    bid: float
    ask: float
    trade_price: float
    date: str | None = None


@dataclass(frozen=True)
class SessionSpec:
    """The fixed 10:00:00-15:45:00 trading session with a bar clock."""

    date: str | None = None
    step_seconds: int = 5
    start: int = SESSION_START
    end: int = SESSION_END

    def __post_init__(self) -> None:
        if self.end - self.start != SESSION_SECONDS:
            raise ContractViolationError(
                f"session must span {SESSION_SECONDS} s, got {self.end - self.start}"
            )
        bars_per_day(self.step_seconds)  # validates the step

    @property
    def bars_per_day(self) -> int:
        return bars_per_day(self.step_seconds)

    def grid_times(self) -> np.ndarray:
        """Grid times (bars_per_day + 1 points), in seconds since midnight."""
        m = np.arange(self.bars_per_day + 1, dtype=np.int64)
        return self.start + m * int(self.step_seconds)


@dataclass
class BarPanel:
    """Midprice grid, shape (n_symbols, bars_per_day + 1, n_days)."""

    symbols: tuple[int, ...]
    days: tuple[str, ...]
    midprices: np.ndarray
    step_seconds: int
    dropped_days: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        self.midprices = np.asarray(self.midprices, dtype=np.float64)
        if self.midprices.size and not (np.isfinite(self.midprices).all() and (self.midprices > 0).all()):
            raise ContractViolationError("BarPanel midprices must be finite and positive")

    @property
    def n_days(self) -> int:
        return len(self.days)


@dataclass
class IncrementPanel:
    """Raw midprice differences, days concatenated along the time axis.

    ``day_boundaries`` holds the index where each day starts (first entry 0),
    so estimators can skip index pairs that straddle an overnight gap.
    """

    values: np.ndarray  # (n_symbols, total_increments)
    day_boundaries: np.ndarray
    step_seconds: int
    symbols: tuple[int, ...]
    days: tuple[str, ...]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        self.day_boundaries = np.asarray(self.day_boundaries, dtype=np.int64)

    @property
    def n_days(self) -> int:
        return len(self.days)

    @property
    def n_increments(self) -> int:
        return self.values.shape[1]

    def day_lengths(self) -> np.ndarray:
        return np.diff(np.append(self.day_boundaries, self.n_increments))

    def day_slice(self, start_day: int, stop_day: int) -> "IncrementPanel":
        """Sub-panel covering days [start_day, stop_day)."""
        if not (0 <= start_day < stop_day <= self.n_days):
            raise ContractViolationError(
                f"day range [{start_day}, {stop_day}) outside panel with {self.n_days} days"
            )
        lo = int(self.day_boundaries[start_day])
        hi = self.n_increments if stop_day == self.n_days else int(self.day_boundaries[stop_day])
        return IncrementPanel(
            values=self.values[:, lo:hi],
            day_boundaries=self.day_boundaries[start_day:stop_day] - lo,
            step_seconds=self.step_seconds,
            symbols=self.symbols,
            days=self.days[start_day:stop_day],
        )


@dataclass
class TickParse:
    """Outcome of parsing a tick stream: surviving records plus reject counts."""

    records: list[TickRecord]
    n_rejected: int
    rejects_by_reason: dict[str, int]

    @property
    def n_accepted(self) -> int:
        return len(self.records)


def _line_iter(source) -> Iterator[str]:
    if isinstance(source, bytes):
        yield from io.StringIO(source.decode("utf-8"))
        return
    if isinstance(source, Path):
        with open(source, "r", newline="") as fh:
            yield from fh
        return
    if isinstance(source, str):
        if not source or "\n" in source:
            yield from io.StringIO(source)
        elif "," in source and not Path(source).exists():
            yield from io.StringIO(source)
        else:
            with open(source, "r", newline="") as fh:
                yield from fh
        return
    yield from source  # file object or any iterable of lines


def parse_ticks(source, default_date: str | None = None) -> TickParse:
    """Parse a tick CSV stream, filtering records that fail sanity checks.

    Expected header: ``symbol,timestamp,bid,ask,trade`` with an optional
    ``date`` column for multi-day files. Records are dropped (and counted,
    by reason) when a line is malformed, a price is non-positive or
    non-finite, the quote is crossed (bid > ask), or the timestamp runs
    backwards within a (symbol, day). Empty input parses to an empty result.
    """
    records: list[TickRecord] = []
    rejects: dict[str, int] = {}
    last_ts: dict[tuple[int, str | None], float] = {}

    def reject(reason: str) -> None:
        rejects[reason] = rejects.get(reason, 0) + 1

    reader = csv.reader(_line_iter(source))
    col_map: dict[str, int] | None = None
    header_checked = False

    for row in reader:
        if not row or all(not cell.strip() for cell in row):
            continue
        if not header_checked:
            header_checked = True
            lowered = [cell.strip().lower() for cell in row]
            if set(TICK_CSV_COLUMNS) <= set(lowered):
                col_map = {name: lowered.index(name) for name in TICK_CSV_COLUMNS}
                if "date" in lowered:
                    col_map["date"] = lowered.index("date")
                continue
            # no header: assume the documented column order
            col_map = {name: i for i, name in enumerate(TICK_CSV_COLUMNS)}
        try:
            symbol = int(row[col_map["symbol"]])
            ts = float(row[col_map["timestamp"]])
            bid = float(row[col_map["bid"]])
            ask = float(row[col_map["ask"]])
            trade = float(row[col_map["trade"]])
        except (ValueError, IndexError):
            reject("malformed")
            continue
        date = row[col_map["date"]].strip() if "date" in col_map else default_date
        if not (math.isfinite(ts) and math.isfinite(bid) and math.isfinite(ask) and math.isfinite(trade)):
            reject("malformed")
            continue
        if bid <= 0 or ask <= 0 or trade <= 0:
            reject("nonpositive_price")
            continue
        if bid > ask:
            reject("crossed_quote")
            continue
        key = (symbol, date)
        if key in last_ts and ts < last_ts[key]:
            reject("non_monotone")
            continue
        last_ts[key] = ts
        records.append(TickRecord(symbol, ts, bid, ask, trade, date))

    return TickParse(records, sum(rejects.values()), rejects)


def _micro_mid(bids: np.ndarray, asks: np.ndarray) -> np.ndarray:
    """Midprices through the integer micro-price grid (exact for <=6 dp feeds)."""
    bu = np.rint(bids * PRICE_SCALE)
    au = np.rint(asks * PRICE_SCALE)
    return (bu + au) / 2.0 / PRICE_SCALE


def sample_bars(
    ticks: Sequence[TickRecord],
    session: SessionSpec,
    symbols: Sequence[int] | None = None,
) -> BarPanel:
    """Sample midprice bars on the session grid from a tick stream.

    For each grid time the bar value is the midprice attached to the last
    trade at or before it (ties inclusive). A trade before 10:00 may anchor
    the first grid point. If any symbol has no trade at or before the first
    grid time on some day, that whole day is dropped from the panel and
    recorded in ``dropped_days`` -- the minimization needs a complete
    rectangular panel, so day dropping is all-symbols-or-nothing.

    Ticks must be in non-decreasing timestamp order per (symbol, day),
    which is what ``parse_ticks`` guarantees.
    """
    if symbols is None:
        symbols = sorted({t.symbol_id for t in ticks})
    symbols = tuple(int(s) for s in symbols)
    fallback_date = session.date if session.date is not None else "day0"

    by_day: dict[str, dict[int, tuple[list[float], list[float], list[float]]]] = {}
    for t in ticks:
        day = t.date if t.date is not None else fallback_date
        per_sym = by_day.setdefault(day, {})
        ts_l, bid_l, ask_l = per_sym.setdefault(t.symbol_id, ([], [], []))
        ts_l.append(t.timestamp)
        bid_l.append(t.bid)
        ask_l.append(t.ask)

    grid = session.grid_times()
    n_bars = session.bars_per_day
    kept_days: list[str] = []
    kept_mids: list[np.ndarray] = []
    dropped: list[tuple[str, str]] = []

    for day in sorted(by_day):
        per_sym = by_day[day]
        day_mid = np.empty((len(symbols), n_bars + 1), dtype=np.float64)
        reason = None
        for si, sym in enumerate(symbols):
            if sym not in per_sym:
                reason = f"symbol {sym}: no trades"
                break
            ts = np.asarray(per_sym[sym][0], dtype=np.float64)
            if ts[0] > grid[0]:
                reason = f"symbol {sym}: no trade at or before first grid time"
                break
            mids = _micro_mid(
                np.asarray(per_sym[sym][1], dtype=np.float64),
                np.asarray(per_sym[sym][2], dtype=np.float64),
            )
            idx = np.searchsorted(ts, grid, side="right") - 1
            day_mid[si] = mids[idx]
        if reason is None:
            kept_days.append(day)
            kept_mids.append(day_mid)
        else:
            dropped.append((day, reason))

    if kept_mids:
        mid_grid = np.stack(kept_mids, axis=2)
    else:
        mid_grid = np.empty((len(symbols), n_bars + 1, 0), dtype=np.float64)
    return BarPanel(
        symbols=symbols,
        days=tuple(kept_days),
        midprices=mid_grid,
        step_seconds=int(session.step_seconds),
        dropped_days=tuple(dropped),
    )


def increments(panel: BarPanel) -> IncrementPanel:
    """Raw midprice differences per day, days concatenated in order."""
    n_sym, n_grid, n_days = panel.midprices.shape
    per_day = panel.midprices[:, 1:, :] - panel.midprices[:, :-1, :]
    # (sym, bar, day) -> (sym, day, bar) -> concatenated days
    values = per_day.transpose(0, 2, 1).reshape(n_sym, n_days * (n_grid - 1))
    boundaries = np.arange(n_days, dtype=np.int64) * (n_grid - 1)
    return IncrementPanel(
        values=values,
        day_boundaries=boundaries,
        step_seconds=panel.step_seconds,
        symbols=panel.symbols,
        days=panel.days,
    )


def coarsen(panel: IncrementPanel, step_seconds: int) -> IncrementPanel:
    """Aggregate increments to a coarser clock that is a multiple of the panel's.

    Per day, groups of ``step/panel.step`` consecutive increments are summed;
    a partial group at the end of the day is discarded, matching the bar
    sampler's discard of residual seconds before 15:45.
    """
    step = int(step_seconds)
    if step == panel.step_seconds:
        return panel
    if step % panel.step_seconds != 0 or step < panel.step_seconds:
        raise ContractViolationError(
            f"cannot coarsen a {panel.step_seconds}s panel to {step}s (not a multiple)"
        )
    factor = step // panel.step_seconds
    n_sym = panel.values.shape[0]
    chunks: list[np.ndarray] = []
    boundaries: list[int] = []
    acc = 0
    lengths = panel.day_lengths()
    for d in range(panel.n_days):
        lo = int(panel.day_boundaries[d])
        keep = (int(lengths[d]) // factor) * factor
        if keep == 0:
            raise InsufficientDataError(
                f"day {panel.days[d]} has fewer than {factor} increments at {panel.step_seconds}s"
            )
        seg = panel.values[:, lo : lo + keep]
        chunks.append(seg.reshape(n_sym, keep // factor, factor).sum(axis=2))
        boundaries.append(acc)
        acc += keep // factor
    return IncrementPanel(
        values=np.concatenate(chunks, axis=1) if chunks else np.empty((n_sym, 0)),
        day_boundaries=np.asarray(boundaries, dtype=np.int64),
        step_seconds=step,
        symbols=panel.symbols,
        days=panel.days,
    )


def panel_to_ticks(panel: BarPanel) -> list[TickRecord]:
    """Reconstruct a degenerate tick stream (bid = ask = mid at grid times).

    Useful for idempotence checks and for exporting synthetic panels in the
    tick CSV format; resampling the result reproduces the panel exactly for
    any feed whose midprices lie on the micro-price grid.
    """
    grid = SessionSpec(step_seconds=panel.step_seconds).grid_times()
    out: list[TickRecord] = []
    for d, day in enumerate(panel.days):
        for si, sym in enumerate(panel.symbols):
            mids = panel.midprices[si, :, d]
            for m in range(len(grid)):
                p = float(mids[m])
                out.append(TickRecord(sym, float(grid[m]), p, p, p, day))
    return out
