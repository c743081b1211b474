"""basket_miner: anti-autocorrelated basket construction on second-scale bars.

Builds fixed-clock midprice bars from tick data, forms the lag-1 delay
correlation matrix of volatility-normalized increments, extracts the
minimum-eigenvalue basket, and validates out-of-sample whether its negative
autocorrelation persists -- with seeded synthetic markets (IID null,
planted mean-reverting mode, exact fractional Gaussian noise) to calibrate
every step.
"""

from .errors import (
    BasketMinerError,
    ContractViolationError,
    DegenerateSeriesError,
    DegenerateStockError,
    EmbeddingFailureError,
    InsufficientDataError,
    UnsupportedSizeError,
)
from .marketdata import (
    BarPanel,
    IncrementPanel,
    SessionSpec,
    TickRecord,
    bars_per_day,
    coarsen,
    increments,
    panel_to_ticks,
    parse_ticks,
    sample_bars,
)
from .stats import AutocorrEstimate, HurstEstimate, ci_halfwidth, hurst_periodogram, periodogram, sample_autocorr
from .lagcorr import (
    BasketWeights,
    LaggedCorrMatrix,
    NormalizedPanel,
    basket_series,
    jacobi_eigh,
    lagged_corr,
    min_eigvec,
    normalize,
)
from .montecarlo import (
    PlantedMarket,
    SynthSpec,
    fgn,
    hurst_null,
    null_min_autocorr,
    planted_market,
    population_lag1_matrix,
    population_minimizer,
    substream,
    synth_iid,
)
from .pipeline import (
    Histogram,
    RollingRun,
    RunReport,
    SkippedWindow,
    WindowResult,
    aggregate,
    build_histogram,
    run_rolling,
    run_window,
    write_report,
    write_results_jsonl,
)

__version__ = "0.1.0"
