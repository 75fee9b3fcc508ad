"""Loading, calendar alignment, cleaning and log-returns for closing-price panels.

Panels are pandas DataFrames indexed by trading date (oldest first) with one
column per company ticker. A cleaned panel has no missing entries and strictly
positive prices; the log-return matrix derived from it has exactly one row
less.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import (
    DataError,
    EmptyPanelError,
    InsufficientDataError,
    UnfillableDateError,
)

#: Initial-window lengths (calendar months) used throughout the analysis.
DEFAULT_WINDOWS = (3, 6, 9, 12, 15, 18)

#: Tokens treated as a missing closing price in input CSVs.
NA_TOKENS = ("", "NA")

#: Calendar-day slack allowed between a window's nominal end and the last
#: trading day on record (weekends and exchange holidays).
_WINDOW_END_SLACK_DAYS = 7

FILL_DATE_MEAN = "date_mean"
FILL_COMPANY_MEAN = "company_mean"


@dataclass(frozen=True)
class RawSeries:
    """One company's closing prices; NaN marks a missing observation."""

    ticker: str
    close: pd.Series

    def missing_fraction(self) -> float:
        if len(self.close) == 0:
            return 1.0
        return float(self.close.isna().sum()) / len(self.close)


def _check_raw(series: RawSeries) -> None:
    idx = series.close.index
    if not idx.is_monotonic_increasing or idx.has_duplicates:
        raise DataError(f"{series.ticker}: dates must be strictly increasing")
    present = series.close.dropna()
    if (present <= 0).any():
        bad = present[present <= 0].index[0].date()
        raise DataError(f"{series.ticker}: non-positive price on {bad}")


def read_company_csv(path: str | Path, ticker: str | None = None) -> RawSeries:
    """Read a per-company CSV with columns ``date,close``."""
    path = Path(path)
    df = pd.read_csv(path, na_values=list(NA_TOKENS), keep_default_na=True)
    if not {"date", "close"}.issubset(df.columns):
        raise DataError(f"{path}: expected columns 'date,close'")
    close = pd.Series(
        _as_prices(df["close"], path),
        index=_as_dates(df["date"], path),
    )
    series = RawSeries(ticker or path.stem, close)
    _check_raw(series)
    return series


def _as_prices(column, path) -> np.ndarray:
    try:
        return column.to_numpy(dtype=float)
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: non-numeric price: {exc}") from None


def _as_dates(column, path) -> pd.DatetimeIndex:
    try:
        return pd.DatetimeIndex(pd.to_datetime(column), name="date")
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: unparseable date: {exc}") from None


def read_calendar_csv(path: str | Path) -> pd.DatetimeIndex:
    """Read the index trading calendar (single ``date`` column)."""
    df = pd.read_csv(path)
    if "date" not in df.columns:
        raise DataError(f"{path}: expected a 'date' column")
    idx = _as_dates(df["date"], path)
    if len(idx) == 0:
        raise DataError(f"{path}: empty calendar")
    if not idx.is_monotonic_increasing or idx.has_duplicates:
        raise DataError(f"{path}: calendar dates must be strictly increasing")
    return idx


def read_wide_csv(path: str | Path) -> tuple[list[RawSeries], pd.DatetimeIndex]:
    """Read a wide CSV ``date,ticker1,ticker2,...``.

    The file's own date column doubles as the index calendar.
    """
    df = pd.read_csv(path, na_values=list(NA_TOKENS), keep_default_na=True)
    if "date" not in df.columns or df.shape[1] < 2:
        raise DataError(f"{path}: expected 'date' plus at least one ticker column")
    idx = _as_dates(df["date"], path)
    if not idx.is_monotonic_increasing or idx.has_duplicates:
        raise DataError(f"{path}: dates must be strictly increasing")
    out = []
    for col in df.columns:
        if col == "date":
            continue
        series = RawSeries(str(col), pd.Series(_as_prices(df[col], path), index=idx))
        _check_raw(series)
        out.append(series)
    return out, idx


def read_company_dir(data_dir: str | Path, calendar: pd.DatetimeIndex) -> list[RawSeries]:
    """Read every ``*.csv`` in a directory of per-company files."""
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise DataError(f"not a directory: {data_dir}")
    paths = sorted(data_dir.glob("*.csv"))
    if not paths:
        raise DataError(f"no company CSVs found in {data_dir}")
    return [align_to_index_calendar(read_company_csv(p), calendar) for p in paths]


def align_to_index_calendar(series: RawSeries, index_dates: pd.DatetimeIndex) -> RawSeries:
    """Restrict a company's series to the index trading calendar.

    Observations on non-index dates are dropped; index dates the company
    never traded on become missing entries.
    """
    if len(index_dates) == 0:
        raise DataError("index calendar is empty")
    _check_raw(series)
    aligned = series.close.reindex(pd.DatetimeIndex(index_dates, name="date"))
    return RawSeries(series.ticker, aligned)


def clean_panel(
    aligned: list[RawSeries],
    missing_threshold: float = 0.20,
    fill_method: str = FILL_DATE_MEAN,
) -> tuple[pd.DataFrame, list[str]]:
    """Drop gap-ridden companies and impute the rest.

    Companies whose missing fraction exceeds ``missing_threshold`` are
    dropped (and returned second). Remaining gaps are filled with the
    cross-company mean closing price of that date, or with the company's own
    temporal mean when ``fill_method="company_mean"``. Dropped companies
    never contribute to fill means.
    """
    if not aligned:
        raise DataError("no input series")
    calendars = {tuple(s.close.index) for s in aligned}
    if len(calendars) != 1:
        raise DataError("all series must share the index calendar; align first")
    if fill_method not in (FILL_DATE_MEAN, FILL_COMPANY_MEAN):
        raise DataError(f"unknown fill_method {fill_method!r}")

    kept = [s for s in aligned if s.missing_fraction() <= missing_threshold]
    dropped = sorted(s.ticker for s in aligned if s.missing_fraction() > missing_threshold)
    if not kept:
        raise EmptyPanelError("every company exceeded the missing-value threshold")

    panel = pd.DataFrame({s.ticker: s.close for s in kept})
    panel.index.name = "date"
    values = panel.to_numpy(dtype=float)
    mask = np.isnan(values)
    if mask.any():
        if fill_method == FILL_DATE_MEAN:
            unfillable = mask.all(axis=1)
            if unfillable.any():
                day = panel.index[int(np.argmax(unfillable))].date()
                raise UnfillableDateError(f"no surviving company has a price on {day}")
            fill = np.nanmean(values, axis=1)
            rows, cols = np.where(mask)
            values[rows, cols] = fill[rows]
        else:
            unfillable = mask.all(axis=0)
            if unfillable.any():
                ticker = panel.columns[int(np.argmax(unfillable))]
                raise UnfillableDateError(f"{ticker}: no prices at all, cannot take company mean")
            fill = np.nanmean(values, axis=0)
            rows, cols = np.where(mask)
            values[rows, cols] = fill[cols]
        panel = pd.DataFrame(values, index=panel.index, columns=panel.columns)

    if (panel.to_numpy() <= 0).any():
        raise DataError("cleaned panel contains non-positive prices")
    return panel, dropped


def compute_log_returns(panel: pd.DataFrame) -> pd.DataFrame:
    """Daily log-returns ln(P_t / P_{t-1}); one row less than the panel."""
    if len(panel) < 2:
        raise InsufficientDataError("need at least two price rows for returns")
    if (panel.to_numpy() <= 0).any():
        raise DataError("prices must be strictly positive")
    returns = np.log(panel).diff().iloc[1:]
    return returns


def slice_initial_window(
    data: pd.DataFrame,
    months: int,
    anchor: pd.Timestamp | str | None = None,
) -> pd.DataFrame:
    """Keep the rows dated strictly before ``anchor + months`` calendar months.

    ``anchor`` defaults to the first row's date; pass the nominal period
    start explicitly when it precedes the first trading day. The window end
    may overhang the last trading day by up to a week (weekends, holidays);
    a larger overhang means the data cannot cover the window and raises.
    """
    if months < 1:
        raise DataError(f"window must be at least one month, got {months}")
    if len(data) == 0:
        raise InsufficientDataError("empty panel")
    start = pd.Timestamp(anchor) if anchor is not None else data.index[0]
    cutoff = start + pd.DateOffset(months=months)
    if cutoff > data.index[-1] + pd.Timedelta(days=_WINDOW_END_SLACK_DAYS):
        raise InsufficientDataError(
            f"{months}-month window from {start.date()} extends past the data "
            f"(last row {data.index[-1].date()})"
        )
    return data.loc[data.index < cutoff]


def write_panel_csv(panel: pd.DataFrame, path: str | Path) -> None:
    """Write a panel or return matrix as a wide CSV with ISO dates first."""
    out = panel.copy()
    out.index = out.index.strftime("%Y-%m-%d")
    out.index.name = "date"
    out.to_csv(path)
