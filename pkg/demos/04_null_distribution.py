#!/usr/bin/env python3
"""What the minimization finds when there is nothing to find.

Running the optimizer on independent Gaussian stocks yields spuriously
negative in-sample autocorrelations; this distribution is the proper null
for judging minimized values (the +-2/sqrt(n) band does not apply to a
minimum over weights). Even at T=5000 the magnitude is modest and it
shrinks as the sample grows.
"""

import numpy as np

from basket_miner.montecarlo import null_min_autocorr
from basket_miner.pipeline import build_histogram

RUNS = 300  # the acceptance suite runs 2000; this is a quick look

values = null_min_autocorr(t_list=(5000, 10000, 20000), runs=RUNS, n_stocks=30, seed=0)

for t_len, vals in values.items():
    med = np.median(np.abs(vals))
    worst = np.abs(vals).max()
    frac = np.mean(np.abs(vals) > 0.12)
    print(f"T={t_len:>6}: median |rho_min| = {med:.4f}, max = {worst:.4f}, frac > 0.12 = {frac:.3f}")

print("\nhistogram at T=5000 (bin width 0.01):")
hist = build_histogram(values[5000], 0.01)
peak = hist.counts.max()
for left, count in zip(hist.left_edges, hist.counts):
    if count:
        bar = "#" * max(1, int(40 * count / peak))
        print(f"  [{left:+.2f}, {left + 0.01:+.2f})  {bar} {count}")
