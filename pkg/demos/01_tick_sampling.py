#!/usr/bin/env python3
"""From raw trades to fixed-clock midprice bars.

Builds one synthetic trading session of ticks, parses it through the same
CSV filters used on real data, and samples midprice bars at several clock
steps. The per-day increment counts follow floor(20700 / step): scales that
do not divide the 5.75-hour session lose a few seconds before 15:45.
"""

import io

import numpy as np

from basket_miner import SessionSpec, increments, parse_ticks, sample_bars

rng = np.random.default_rng(0)

# One symbol, one trade roughly every 4 seconds, prices on the cent grid.
# The first trade lands before 10:00 so it can anchor the first grid point.
times = np.cumsum(rng.uniform(2.0, 6.0, size=6000)) + 35990.0
cents = 100_000 + np.cumsum(rng.integers(-2, 3, size=len(times)))

lines = ["symbol,timestamp,bid,ask,trade"]
for ts, c in zip(times, cents):
    lines.append(f"1,{ts:.3f},{(c - 1) / 100:.2f},{(c + 1) / 100:.2f},{c / 100:.2f}")
# a couple of misprints that the parser must reject
lines.append("1,50000.000,10.05,10.01,10.02")   # crossed quote
lines.append("not,really,a,tick,line")          # malformed

parsed = parse_ticks(io.StringIO("\n".join(lines)))
print(f"parsed {parsed.n_accepted} ticks, rejected {parsed.n_rejected}: {parsed.rejects_by_reason}")

for step in (5, 35, 45, 60):
    session = SessionSpec(step_seconds=step)
    panel = sample_bars(parsed.records, session, [1])
    inc = increments(panel)
    discarded = 20700 - session.bars_per_day * step
    print(
        f"step {step:>2}s: {panel.midprices.shape[1]} grid points, "
        f"{inc.values.shape[1]} increments per day"
        + (f" ({discarded}s before 15:45 discarded)" if discarded else "")
    )

# The bar value at a grid time is the midprice of the last trade at or
# before it, quotes taken immediately before that transaction.
panel = sample_bars(parsed.records, SessionSpec(step_seconds=5), [1])
print("\nfirst bars:", np.round(panel.midprices[0, :5, 0], 4))
