"""Command-line front end.

Subcommands: ``synth`` (write synthetic data), ``sample`` (tick CSVs to
bar/increment files), ``mine`` (rolling minimization + reports), ``null``
(distribution of minimized autocorrelation under independence), ``hurst``
(random-basket Hurst benchmark), ``report`` (re-aggregate an existing
results file).

Configuration is plain-text ``key=value`` with CLI-flag overrides (flags
win); every run writes the fully-resolved config next to its results, and
all randomness flows from the single root seed, so reruns are
byte-identical. ``BASKET_MINER_THREADS`` caps worker threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .errors import BasketMinerError, InsufficientDataError
from .marketdata import (
    IncrementPanel,
    SessionSpec,
    coarsen,
    increments,
    parse_ticks,
    sample_bars,
)
from .montecarlo import SynthSpec, hurst_null, null_min_autocorr, planted_market, synth_iid
from .pipeline import (
    aggregate,
    build_histogram,
    read_results_jsonl,
    run_rolling,
    write_histogram_csv,
    write_report,
    write_results_jsonl,
    write_text_lf,
)


@dataclass
class RunConfig:
    """Fully-resolved run parameters (defaults < config file < CLI flags)."""

    kind: str = "iid"              # iid | planted | ticks
    data: str = ""                 # comma-separated tick CSV paths or a directory
    date_column: bool = False      # multi-day files carry a `date` column
    out: str = "out"
    seed: int = 0
    days: int = 10                 # minimization period D
    test: tuple[int, ...] = (1, 5)
    delta: tuple[int, ...] = tuple(range(5, 65, 5))
    lag: int = 1
    boundary: str = "skip"         # skip | concat overnight pairs
    stocks: int = 30
    synth_days: int = 16
    bars: int = 4140               # synthetic bars per day at base_step
    base_step: int = 5
    phi: float = -0.4
    noise: float = 1.0
    beta_low: float = 0.5
    beta_high: float = 1.0
    runs: int = 2000
    null_t: tuple[int, ...] = (5000, 10000, 20000)
    hurst_delta: int = 5
    hurst_days: int = 10
    bin_corr: float = 0.01
    bin_weights: float = 0.02
    bin_hurst: float = 0.02
    results: str = ""              # input for the report command

    def __post_init__(self) -> None:
        if self.days < 2:
            raise BasketMinerError(f"days (D) must be >= 2, got {self.days}")
        if self.lag < 1:
            raise BasketMinerError(f"lag must be >= 1, got {self.lag}")
        for d in self.delta:
            if not 1 <= d <= 20700:
                raise BasketMinerError(f"delta {d} outside [1, 20700]")
        if self.boundary not in ("skip", "concat"):
            raise BasketMinerError(f"boundary must be skip or concat, got {self.boundary!r}")
        if self.kind not in ("iid", "planted", "ticks"):
            raise BasketMinerError(f"kind must be iid, planted or ticks, got {self.kind!r}")

    @property
    def exclude_boundaries(self) -> bool:
        return self.boundary == "skip"


_INT_TUPLES = {"test", "delta", "null_t"}
_BOOLS = {"date_column"}


def _parse_value(name: str, raw, current):
    if isinstance(raw, (tuple, bool, int, float)):
        return raw
    raw = str(raw).strip()
    if name in _INT_TUPLES:
        return tuple(int(x) for x in raw.split(",") if x.strip())
    if name in _BOOLS:
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(current, int) and not isinstance(current, bool):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def load_config_file(path) -> dict[str, str]:
    """Parse a key=value config file; '#' starts a comment, blanks ignored."""
    out: dict[str, str] = {}
    for line in Path(path).read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise BasketMinerError(f"bad config line (expected key=value): {line!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def resolve_config(file_values: dict | None, flag_values: dict) -> RunConfig:
    defaults = RunConfig()
    known = {f.name for f in fields(RunConfig)}
    merged: dict = {}
    for source in (file_values or {}), flag_values:
        for key, value in source.items():
            if value is None:
                continue
            if key not in known:
                raise BasketMinerError(f"unknown config key {key!r}")
            merged[key] = _parse_value(key, value, getattr(defaults, key))
    return RunConfig(**merged)


def _config_text(cfg: RunConfig) -> str:
    lines = []
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        value = getattr(cfg, f.name)
        if isinstance(value, tuple):
            value = ",".join(str(v) for v in value)
        elif isinstance(value, bool):
            value = "true" if value else "false"
        lines.append(f"{f.name}={value}")
    return "\n".join(lines) + "\n"


def write_resolved_config(cfg: RunConfig, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    write_text_lf(outdir / "config_resolved.cfg", _config_text(cfg))


def _n_threads() -> int:
    raw = os.environ.get("BASKET_MINER_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fmt(x) -> str:
    return repr(float(x))


# ---------------------------------------------------------------------------
# data ingestion
# ---------------------------------------------------------------------------


def _tick_files(cfg: RunConfig) -> list[Path]:
    if not cfg.data:
        raise BasketMinerError("tick input requires data=... (file, comma list, or directory)")
    paths: list[Path] = []
    for chunk in cfg.data.split(","):
        p = Path(chunk.strip())
        if p.is_dir():
            paths.extend(sorted(p.glob("*.csv")))
        elif p.exists():
            paths.append(p)
        else:
            raise BasketMinerError(f"tick file not found: {p}")
    if not paths:
        raise BasketMinerError(f"no tick files under {cfg.data!r}")
    return paths


def _ingest_ticks(cfg: RunConfig):
    """Parse every tick file; without a date column the file stem is the day label."""
    records = []
    rejects: dict[str, int] = {}
    for path in _tick_files(cfg):
        default_date = None if cfg.date_column else path.stem
        parsed = parse_ticks(path, default_date=default_date)
        records.extend(parsed.records)
        for reason, count in parsed.rejects_by_reason.items():
            rejects[reason] = rejects.get(reason, 0) + count
    return records, rejects


def _synth_base_panel(cfg: RunConfig):
    spec = SynthSpec(
        n_stocks=cfg.stocks,
        n_days=cfg.synth_days,
        bars_per_day=cfg.bars,
        step_seconds=cfg.base_step,
        seed=cfg.seed,
        kind="iid" if cfg.kind == "iid" else "planted",
        phi=cfg.phi if cfg.kind == "planted" else 0.0,
        loading_range=(cfg.beta_low, cfg.beta_high),
        noise_scale=cfg.noise,
    )
    if cfg.kind == "planted":
        market = planted_market(spec)
        return market.panel, market
    return synth_iid(spec), None


def build_panels(cfg: RunConfig) -> dict[int, IncrementPanel]:
    """One increment panel per requested time scale (plus the Hurst scale)."""
    deltas = sorted(set(cfg.delta) | {cfg.hurst_delta})
    if cfg.kind == "ticks":
        records, _ = _ingest_ticks(cfg)
        panels: dict[int, IncrementPanel] = {}
        symbols = sorted({t.symbol_id for t in records})
        for delta in deltas:
            panel = sample_bars(records, SessionSpec(step_seconds=delta), symbols)
            panels[delta] = increments(panel)
        day_sets = {p.days for p in panels.values()}
        if len(day_sets) != 1:
            raise BasketMinerError("tick sampling produced inconsistent day sets across time scales")
        return panels
    base, _ = _synth_base_panel(cfg)
    return {delta: coarsen(base, delta) for delta in deltas}


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_synth(cfg: RunConfig) -> int:
    if cfg.kind == "ticks":
        raise BasketMinerError("synth needs kind=iid or kind=planted")
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    panel, market = _synth_base_panel(cfg)
    for i in range(panel.values.shape[0]):
        lines = [_fmt(x) for x in panel.values[i]]
        write_text_lf(outdir / f"stock_{i:03d}.csv", "\n".join(lines) + "\n")
    manifest = {
        "kind": cfg.kind,
        "n_stocks": cfg.stocks,
        "n_days": cfg.synth_days,
        "bars_per_day": cfg.bars,
        "step_seconds": cfg.base_step,
        "seed": cfg.seed,
    }
    write_text_lf(outdir / "manifest.json", json.dumps(manifest, sort_keys=True) + "\n")
    if market is not None:
        lines = [_fmt(x) for x in market.direction]
        write_text_lf(outdir / "true_weights.csv", "\n".join(lines) + "\n")
    write_resolved_config(cfg, outdir)
    return 0


def cmd_sample(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    records, rejects = _ingest_ticks(cfg)
    symbols = sorted({t.symbol_id for t in records})
    for delta in sorted(set(cfg.delta)):
        session = SessionSpec(step_seconds=delta)
        panel = sample_bars(records, session, symbols)
        inc = increments(panel)
        sym_cols = ",".join(f"s{s}" for s in panel.symbols)

        lines = [f"day,second,{sym_cols}"]
        grid = session.grid_times()
        for d, day in enumerate(panel.days):
            for m in range(panel.midprices.shape[1]):
                row = ",".join(_fmt(panel.midprices[si, m, d]) for si in range(len(symbols)))
                lines.append(f"{day},{int(grid[m])},{row}")
        write_text_lf(outdir / f"bars_d{delta}.csv", "\n".join(lines) + "\n")

        lines = [f"day,index,{sym_cols}"]
        lengths = inc.day_lengths()
        for d, day in enumerate(inc.days):
            lo = int(inc.day_boundaries[d])
            for t in range(int(lengths[d])):
                row = ",".join(_fmt(inc.values[si, lo + t]) for si in range(len(symbols)))
                lines.append(f"{day},{t},{row}")
        write_text_lf(outdir / f"increments_d{delta}.csv", "\n".join(lines) + "\n")

        if panel.dropped_days:
            lines = ["day,reason"]
            for day, reason in panel.dropped_days:
                lines.append(f"{day},{reason.replace(',', ';')}")
            write_text_lf(outdir / f"dropped_days_d{delta}.csv", "\n".join(lines) + "\n")

    lines = ["reason,count"]
    for reason in sorted(rejects):
        lines.append(f"{reason},{rejects[reason]}")
    lines.append(f"total,{sum(rejects.values())}")
    write_text_lf(outdir / "rejects.csv", "\n".join(lines) + "\n")
    write_resolved_config(cfg, outdir)
    return 0


def cmd_mine(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    panels = build_panels(cfg)
    run = run_rolling(
        panels,
        d_days=cfg.days,
        s_list=cfg.test,
        delta_list=sorted(set(cfg.delta)),
        lag=cfg.lag,
        hurst_delta=cfg.hurst_delta,
        exclude_boundaries=cfg.exclude_boundaries,
        n_threads=_n_threads(),
    )
    write_results_jsonl(run, outdir / "results.jsonl")
    report = aggregate(run, bin_corr=cfg.bin_corr, bin_weights=cfg.bin_weights, bin_hurst=cfg.bin_hurst)
    write_report(report, outdir)
    write_resolved_config(cfg, outdir)
    return 0


def cmd_null(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    values = null_min_autocorr(
        t_list=cfg.null_t,
        runs=cfg.runs,
        n_stocks=cfg.stocks,
        seed=cfg.seed,
        n_threads=_n_threads(),
    )
    summary = ["t,runs,median_abs_rho,frac_abs_above_0.12"]
    for t_len in cfg.null_t:
        vals = values[t_len]
        write_histogram_csv(build_histogram(vals, cfg.bin_corr), outdir / f"null_hist_T{t_len}.csv")
        med = float(np.median(np.abs(vals)))
        frac = float(np.mean(np.abs(vals) > 0.12))
        summary.append(f"{t_len},{len(vals)},{_fmt(med)},{_fmt(frac)}")
    write_text_lf(outdir / "null_summary.csv", "\n".join(summary) + "\n")
    write_resolved_config(cfg, outdir)
    return 0


def cmd_hurst(cfg: RunConfig) -> int:
    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    source_days = max(cfg.synth_days, cfg.hurst_days)
    spec = SynthSpec(
        n_stocks=cfg.stocks,
        n_days=source_days,
        bars_per_day=cfg.bars,
        step_seconds=cfg.base_step,
        seed=cfg.seed,
    )
    hs = hurst_null(runs=cfg.runs, d_days=cfg.hurst_days, source=synth_iid(spec), seed=cfg.seed)
    write_histogram_csv(build_histogram(hs, cfg.bin_hurst), outdir / "hurst_hist.csv")
    write_text_lf(outdir / "hurst_summary.csv", f"runs,mean_h\n{len(hs)},{_fmt(np.mean(hs))}\n")
    write_resolved_config(cfg, outdir)
    return 0


def cmd_report(cfg: RunConfig) -> int:
    results = cfg.results or str(Path(cfg.out) / "results.jsonl")
    if not Path(results).exists():
        raise BasketMinerError(f"results file not found: {results}")
    run = read_results_jsonl(results)
    report = aggregate(run, bin_corr=cfg.bin_corr, bin_weights=cfg.bin_weights, bin_hurst=cfg.bin_hurst)
    write_report(report, Path(cfg.out))
    write_resolved_config(cfg, Path(cfg.out))
    return 0


_COMMANDS = {
    "synth": cmd_synth,
    "sample": cmd_sample,
    "mine": cmd_mine,
    "null": cmd_null,
    "hurst": cmd_hurst,
    "report": cmd_report,
}


def _add_common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="key=value config file")
    p.add_argument("--seed", type=int, help="root seed (all randomness derives from it)")
    p.add_argument("--delta", help="comma list of time scales in seconds, e.g. 5,10,15")
    p.add_argument("--days", type=int, help="minimization period D in days")
    p.add_argument("--test", help="comma list of test-period lengths S, e.g. 1,5")
    p.add_argument("--out", help="output directory")
    p.add_argument("--boundary", choices=("skip", "concat"), help="overnight index-pair handling")
    p.add_argument("--runs", type=int, help="Monte Carlo run count")
    p.add_argument("--kind", choices=("iid", "planted", "ticks"), help="data source kind")
    p.add_argument("--data", help="tick CSV file(s) or directory (kind=ticks)")
    p.add_argument("--date-column", dest="date_column", action="store_const", const=True,
                   help="tick files carry a date column (one file, many days)")
    p.add_argument("--stocks", type=int, help="number of stocks (synthetic)")
    p.add_argument("--synth-days", dest="synth_days", type=int, help="synthetic days")
    p.add_argument("--bars", type=int, help="synthetic bars per day at the base step")
    p.add_argument("--phi", type=float, help="planted AR(1) coefficient")
    p.add_argument("--noise", type=float, help="planted idiosyncratic noise scale")
    p.add_argument("--null-t", dest="null_t", help="comma list of T values for the null experiment")
    p.add_argument("--results", help="results.jsonl path (report command)")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="basket-miner",
        description="Search for baskets with statistically significant negative lag-1 autocorrelation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        _add_common_flags(sub.add_parser(name))
    args = vars(parser.parse_args(argv))
    command = args.pop("command")
    config_path = args.pop("config", None)
    try:
        file_values = load_config_file(config_path) if config_path else None
        cfg = resolve_config(file_values, args)
        return _COMMANDS[command](cfg)
    except InsufficientDataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BasketMinerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
