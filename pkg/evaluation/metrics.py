"""
Forecast accuracy measures: prediction-interval coverage, RMSE/MAD, simple
moving averages and the importance-sampling diagnostics of a run.

Arrays of observations, forecasts and variances are T x m (days by series)
unless noted otherwise.
"""
# Standard library
import math
from dataclasses import dataclass

# Third-party
import numpy as np
import pandas as pd
from scipy import stats

# First-party/Local
from dlm.exceptions import AlignmentError, DomainError
from evaluation import ROUNDED_Z


@dataclass(frozen=True)
class IntervalSpec:
    level: float
    z: float

    def __post_init__(self):
        if not 0.0 < self.level < 1.0:
            raise DomainError(f"level must lie in (0, 1), got {self.level}")
        if not self.z > 0:
            raise DomainError(f"z must be positive, got {self.z}")

    @property
    def label(self):
        return f"{self.level * 100:g}"


def z_for_level(level, full_precision=False):
    """
    The rounded table value for the standard levels, the exact normal
    quantile otherwise or when `full_precision` is set.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    if not full_precision:
        for known, z in ROUNDED_Z.items():
            if math.isclose(level, known, abs_tol=1e-9):
                return z
    return float(stats.norm.ppf((1.0 + level) / 2.0))


def interval_specs(levels, z_values=(), full_precision=False):
    if z_values:
        if len(z_values) != len(levels):
            raise AlignmentError(
                f"{len(z_values)} z-values for {len(levels)} levels"
            )
        return [IntervalSpec(lv, z) for lv, z in zip(levels, z_values)]
    return [
        IntervalSpec(level, z_for_level(level, full_precision))
        for level in levels
    ]


def prediction_interval(y_hat, variance, K, z):
    """
    y_hat -/+ z sqrt(variance) sqrt(1 + 1/K); the last factor accounts for
    estimating y_hat from K Monte Carlo draws.
    """
    variance = np.asarray(variance, dtype=float)
    if np.any(~(variance > 0)):
        raise DomainError("forecast variance must be positive")
    if K < 1:
        raise DomainError(f"K must be positive, got {K}")
    half_width = z * np.sqrt(variance) * math.sqrt(1.0 + 1.0 / K)
    lo, hi = y_hat - half_width, y_hat + half_width
    if np.ndim(lo) == 0:
        return float(lo), float(hi)
    return lo, hi


def _aligned(*arrays):
    arrays = [np.asarray(a, dtype=float) for a in arrays]
    if arrays[0].ndim == 1:
        arrays = [a.reshape(-1, 1) if a.ndim == 1 else a for a in arrays]
    shape = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != shape:
            raise AlignmentError(f"shapes {shape} and {a.shape} differ")
    return arrays


@dataclass
class CoverageTable:
    """
    Empirical coverage percentages: per_series is m x L, aggregate (the
    unweighted mean over series) has length L.
    """

    specs: list
    tickers: tuple
    per_series: np.ndarray
    aggregate: np.ndarray

    def to_frame(self):
        rows = []
        for j, spec in enumerate(self.specs):
            for i, ticker in enumerate(self.tickers):
                rows.append(
                    (spec.label, spec.z, ticker, self.per_series[i, j])
                )
            rows.append((spec.label, spec.z, "aggregate", self.aggregate[j]))
        return pd.DataFrame(
            rows, columns=["level", "z", "ticker", "coverage"]
        )


def coverage(observations, forecasts, variances, K, specs, tickers=None):
    y, f, v = _aligned(observations, forecasts, variances)
    if y.shape[0] == 0:
        raise DomainError("no forecast days to score")
    per_series = np.empty((y.shape[1], len(specs)))
    for j, spec in enumerate(specs):
        lo, hi = prediction_interval(f, v, K, spec.z)
        inside = (lo <= y) & (y <= hi)
        per_series[:, j] = 100.0 * inside.mean(axis=0)
    if tickers is None:
        tickers = tuple(str(i) for i in range(y.shape[1]))
    return CoverageTable(
        specs=list(specs),
        tickers=tuple(tickers),
        per_series=per_series,
        aggregate=per_series.mean(axis=0),
    )


def rmse_mad(observations, forecasts):
    y, f = _aligned(observations, forecasts)
    if y.size == 0:
        raise DomainError("rmse and mad of no errors")
    errors = (y - f).ravel()
    return (
        float(np.sqrt(np.mean(errors**2))),
        float(np.mean(np.abs(errors))),
    )


def sma(series, window):
    """Unweighted moving mean; the result is window - 1 shorter."""
    x = np.asarray(series, dtype=float)
    if window < 1 or window > x.shape[0]:
        raise DomainError(
            f"window {window} does not fit a series of {x.shape[0]}"
        )
    return np.lib.stride_tricks.sliding_window_view(x, window, axis=0).mean(
        axis=-1
    )


def trend_table(dates, tickers, observed, forecast, window):
    """
    Moving averages of observed values and forecasts, dated at the last day
    of each window, in long form.
    """
    y, f = _aligned(observed, forecast)
    observed_sma = sma(y, window)
    forecast_sma = sma(f, window)
    trend_dates = list(dates)[window - 1 :]
    frames = [
        pd.DataFrame(
            {
                "date": [str(d) for d in trend_dates],
                "ticker": ticker,
                "observed_sma": observed_sma[:, i],
                "forecast_sma": forecast_sma[:, i],
            }
        )
        for i, ticker in enumerate(tickers)
    ]
    return pd.concat(frames, ignore_index=True)


def diagnostics_series(diagnostics, dates=None, flag_fraction=0.66):
    """
    One row per day: ess, kl, kl_bound and whether ess fell below
    flag_fraction * N.
    """
    if not diagnostics:
        raise DomainError("no diagnostics to tabulate")
    if dates is None:
        dates = range(len(diagnostics))
    dates = list(dates)
    if len(dates) != len(diagnostics):
        raise AlignmentError(
            f"{len(dates)} dates for {len(diagnostics)} days of diagnostics"
        )
    return pd.DataFrame(
        {
            "date": [str(d) for d in dates],
            "ess": [d.ess for d in diagnostics],
            "kl": [d.kl for d in diagnostics],
            "kl_bound": [d.kl_bound for d in diagnostics],
            "flagged": [
                bool(d.ess < flag_fraction * d.sample_size)
                for d in diagnostics
            ],
        }
    )


def errors_table(tickers, observed, forecast, baseline=None):
    """
    Per-series RMSE and MAD of the SGDLM forecasts and, when given, of the
    baseline DLM, with a pooled "aggregate" row.
    """
    y, f = _aligned(observed, forecast)
    columns = {"sgdlm": f}
    if baseline is not None:
        columns["dlm"] = _aligned(observed, baseline)[1]
    rows = []
    for i, ticker in enumerate(list(tickers) + ["aggregate"]):
        row = {"ticker": ticker}
        for name, values in columns.items():
            if ticker == "aggregate":
                rmse, mad = rmse_mad(y, values)
            else:
                rmse, mad = rmse_mad(y[:, i], values[:, i])
            row[f"{name}_rmse"] = rmse
            row[f"{name}_mad"] = mad
        rows.append(row)
    return pd.DataFrame(rows)


def compare_parent_counts(runs):
    """
    Side by side results of runs that differ in the number of parents.
    `runs` maps k to the (coverage, errors) frames of that run; one row per
    (k, ticker) with a coverage column per level and the SGDLM RMSE/MAD.
    """
    frames = []
    for k in sorted(runs):
        coverage_frame, errors_frame = runs[k]
        wide = coverage_frame.pivot(
            index="ticker", columns="level", values="coverage"
        )
        wide.columns = [f"coverage_{level}" for level in wide.columns]
        merged = wide.join(
            errors_frame.set_index("ticker")[["sgdlm_rmse", "sgdlm_mad"]]
        ).reset_index()
        merged.insert(0, "k", k)
        frames.append(merged)
    if not frames:
        raise DomainError("no runs to compare")
    return pd.concat(frames, ignore_index=True)
