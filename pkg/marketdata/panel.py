"""
Daily log-return panels.

Prices come in as CSV with a header row `date,TICKER1,TICKER2,...` and one
ISO-8601 dated row per trading day. A row with any missing price is dropped
(keeping every ticker on the same calendar) unless forward-filling is asked
for. Returns are natural-log ratios of consecutive kept rows, dated at the
later row.
"""
# Standard library
import datetime
import logging
from dataclasses import dataclass, field
from typing import Optional

# Third-party
import iso8601
import numpy as np
import pandas as pd

# First-party/Local
from dlm.exceptions import AlignmentError, DataError, RangeError

logger = logging.getLogger(__name__)

# repr precision: 17 significant digits round-trip every double
FLOAT_FORMAT = "%.17g"


@dataclass(frozen=True, eq=False)
class ReturnsPanel:
    dates: tuple
    tickers: tuple
    values: np.ndarray = field(repr=False)
    price_rows: Optional[int] = None

    def __post_init__(self):
        dates = tuple(self.dates)
        tickers = tuple(str(t) for t in self.tickers)
        values = np.array(self.values, dtype=float)
        values.flags.writeable = False
        object.__setattr__(self, "dates", dates)
        object.__setattr__(self, "tickers", tickers)
        object.__setattr__(self, "values", values)
        if values.shape != (len(dates), len(tickers)):
            raise AlignmentError(
                f"values have shape {values.shape} for {len(dates)} dates "
                f"and {len(tickers)} tickers"
            )
        if not dates:
            raise RangeError("a panel needs at least one row")
        if len(set(tickers)) != len(tickers):
            raise DataError("tickers repeat")
        for t in range(1, len(dates)):
            if not dates[t] > dates[t - 1]:
                raise DataError(
                    f"dates not strictly increasing at {dates[t]}",
                    row=dates[t],
                )
        if not np.all(np.isfinite(values)):
            raise DataError("panel has missing or non-finite returns")

    def __eq__(self, other):
        if not isinstance(other, ReturnsPanel):
            return NotImplemented
        return (
            self.dates == other.dates
            and self.tickers == other.tickers
            and np.array_equal(self.values, other.values)
        )

    @property
    def m(self):
        return len(self.tickers)

    def __len__(self):
        return len(self.dates)

    def rows_between(self, start, end):
        """
        Inclusive (first, last) row indices of the dates in [start, end].
        """
        inside = [i for i, d in enumerate(self.dates) if start <= d <= end]
        if not inside:
            raise RangeError(f"no returns between {start} and {end}")
        return inside[0], inside[-1]

    def to_frame(self):
        frame = pd.DataFrame(
            self.values, columns=list(self.tickers), index=list(self.dates)
        )
        frame.index.name = "date"
        return frame


def _parse_date(value, row):
    try:
        return iso8601.parse_date(str(value).strip()).date()
    except iso8601.ParseError as error:
        raise DataError(f"not an ISO-8601 date: {value!r}", row=row) from error


def _read_dated_csv(path):
    frame = pd.read_csv(
        path, dtype={"date": str}, float_precision="round_trip"
    )
    if frame.columns.empty or frame.columns[0] != "date":
        raise DataError(f"{path}: the first column must be 'date'")
    if frame.shape[1] < 2:
        raise DataError(f"{path}: no ticker columns")
    frame.index = [
        _parse_date(value, row=i + 2) for i, value in enumerate(frame["date"])
    ]
    return frame.drop(columns="date")


def ingest_prices(path, date_range=None, forward_fill=False):
    """
    Read closing prices from `path` and return the panel of log-returns.
    `date_range` (start, end) restricts the price rows used.
    """
    prices = _read_dated_csv(path)
    if date_range is not None:
        start, end = date_range
        prices = prices[[start <= d <= end for d in prices.index]].copy()

    for ticker in prices.columns:
        column = pd.to_numeric(prices[ticker], errors="coerce")
        bad = prices[ticker].notna() & column.isna()
        if bad.any():
            row = prices.index[bad.to_numpy()][0]
            raise DataError(
                f"price is not a number: {prices.at[row, ticker]!r}",
                row=row,
                ticker=ticker,
            )
        nonpositive = column <= 0
        if nonpositive.any():
            row = prices.index[nonpositive.to_numpy()][0]
            raise DataError(
                f"price must be positive, got {column[row]}",
                row=row,
                ticker=ticker,
            )
        prices[ticker] = column

    if forward_fill:
        prices = prices.ffill()
    missing = prices.isna().any(axis=1)
    for row in prices.index[missing.to_numpy()]:
        gaps = [t for t in prices.columns if pd.isna(prices.at[row, t])]
        logger.warning("dropping %s: no price for %s", row, ", ".join(gaps))
    prices = prices[~missing.to_numpy()]

    if prices.shape[0] < 2:
        raise RangeError(
            f"{prices.shape[0]} usable price rows, at least 2 are needed"
        )
    log_prices = np.log(prices.to_numpy(dtype=float))
    panel = ReturnsPanel(
        dates=tuple(prices.index[1:]),
        tickers=tuple(prices.columns),
        values=np.diff(log_prices, axis=0),
        price_rows=prices.shape[0],
    )
    logger.info(
        "%d price rows -> %d log-returns for %d tickers",
        panel.price_rows,
        len(panel),
        panel.m,
    )
    return panel


def export_returns(panel, path):
    panel.to_frame().to_csv(
        path, float_format=FLOAT_FORMAT, lineterminator="\n"
    )


def load_returns(path):
    frame = _read_dated_csv(path)
    return ReturnsPanel(
        dates=tuple(frame.index),
        tickers=tuple(frame.columns),
        values=frame.to_numpy(dtype=float),
    )


def prices_from_returns(panel, start_price=100.0, start_date=None):
    """
    Price paths with P_0 = start_price and P_t = P_{t-1} exp(r_t). P_0 is
    dated `start_date`, by default the business day before the first
    return.
    """
    if start_date is None:
        start_date = (
            pd.Timestamp(panel.dates[0]) - pd.offsets.BDay(1)
        ).date()
    if not start_date < panel.dates[0]:
        raise AlignmentError(
            f"start date {start_date} is not before {panel.dates[0]}"
        )
    log_paths = np.vstack(
        [np.zeros(panel.m), np.cumsum(panel.values, axis=0)]
    )
    frame = pd.DataFrame(
        start_price * np.exp(log_paths),
        columns=list(panel.tickers),
        index=[start_date] + list(panel.dates),
    )
    frame.index.name = "date"
    return frame


def write_prices(frame, path):
    frame.to_csv(path, float_format=FLOAT_FORMAT, lineterminator="\n")


def business_dates(count, start=datetime.date(2000, 1, 3)):
    return tuple(d.date() for d in pd.bdate_range(start=start, periods=count))
