#!/usr/bin/env python3
"""The lag-1 autocorrelation estimator and its significance band.

Under IID increments, rho_hat(1) is asymptotically N(0, 1/n), so the 95%
band is +-2/sqrt(n). The demo checks that calibration empirically, and
shows the day-boundary option: products spanning the overnight gap can be
left out of the numerator.
"""

import numpy as np

from basket_miner import ci_halfwidth, sample_autocorr
from basket_miner.montecarlo import substream

print("hand cases:")
print("  rho( 1,-1, 1,-1 ) =", sample_autocorr([1, -1, 1, -1], 1).rho)
print("  rho( 1, 2, 3, 4, 5 ) =", sample_autocorr([1, 2, 3, 4, 5], 1).rho)

n = 4140  # one 5-second day
band = ci_halfwidth(n)
print(f"\n95% band at n={n}: +-{band:.5f}")

inside = 0
seeds = 1000
for seed in range(seeds):
    y = substream(seed).standard_normal(n)
    inside += abs(sample_autocorr(y, 1).rho) <= band
print(f"IID normal series inside the band: {inside / seeds:.1%} (nominal 95%)")

# An AR(1) with negative coefficient violates the band almost surely.
phi = -0.1
y = np.empty(n)
y[0] = substream(99).standard_normal()
eps = substream(100).standard_normal(n)
for t in range(1, n):
    y[t] = phi * y[t - 1] + eps[t]
est = sample_autocorr(y, 1)
print(f"AR(1) phi={phi}: rho_hat = {est.rho:.4f}, significant = {est.rho < -band}")

# Day boundaries: omit numerator terms that straddle the overnight gap.
# A large overnight jump fakes negative autocorrelation when days are
# naively concatenated; skipping the boundary pair removes the artifact.
day1 = np.array([0.2, -0.1, 0.3, -0.2, 5.0])   # day ends on a big up move
day2 = np.array([-5.0, 0.1, -0.3, 0.2, -0.1])  # next day opens with a drop
two_days = np.concatenate([day1, day2])
plain = sample_autocorr(two_days, 1).rho
skipped = sample_autocorr(two_days, 1, boundaries=[0, 5]).rho
print(f"\ntwo concatenated days: rho plain = {plain:.4f}, overnight pair skipped = {skipped:.4f}")
