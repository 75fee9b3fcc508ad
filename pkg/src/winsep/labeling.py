"""Winner/loser labeling by the ratio of average prices between two frames.

Each company is scored by growth = mean price over the final frame divided by
mean price over the beginning frame. Sorted by descending growth, the top
third are winners and the bottom third losers; the remainder stay unlabeled.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd

from .errors import DataError

WINNER = "winner"
LOSER = "loser"
MIDDLE = "middle"


@dataclass(frozen=True)
class CompanyScore:
    ticker: str
    avp_begin: float
    avp_end: float

    @property
    def growth(self) -> float:
        return self.avp_end / self.avp_begin


@dataclass(frozen=True)
class LabelSet:
    """Disjoint winner/loser/middle partition of the company universe."""

    winners: tuple[str, ...]
    losers: tuple[str, ...]
    middle: tuple[str, ...] = ()

    @property
    def labeled(self) -> tuple[str, ...]:
        return self.winners + self.losers

    def label_of(self, ticker: str) -> str:
        if ticker in self.winners:
            return WINNER
        if ticker in self.losers:
            return LOSER
        if ticker in self.middle:
            return MIDDLE
        raise DataError(f"unknown ticker {ticker!r}")


def average_price(prices) -> float:
    """Arithmetic mean of a non-empty price sequence."""
    values = list(prices)
    if not values:
        raise DataError("cannot average an empty price list")
    return float(sum(values)) / len(values)


def score_companies(
    panel: pd.DataFrame,
    begin_window: tuple,
    end_window: tuple,
) -> list[CompanyScore]:
    """Score every company by its end-frame/begin-frame average-price ratio.

    Windows are inclusive ``(start, end)`` date pairs and must select at
    least one panel row each.
    """
    frames = []
    for name, (start, end) in (("begin", begin_window), ("end", end_window)):
        start, end = pd.Timestamp(start), pd.Timestamp(end)
        if start < panel.index[0] or end > panel.index[-1]:
            raise DataError(f"{name} window [{start.date()}, {end.date()}] outside panel range")
        frame = panel.loc[(panel.index >= start) & (panel.index <= end)]
        if frame.empty:
            raise DataError(f"{name} window contains no trading days")
        frames.append(frame)
    begin_means = frames[0].mean(axis=0)
    end_means = frames[1].mean(axis=0)
    return [
        CompanyScore(ticker, float(begin_means[ticker]), float(end_means[ticker]))
        for ticker in panel.columns
    ]


def label_thirds(scores: list[CompanyScore]) -> LabelSet:
    """Top third of the descending growth order wins, bottom third loses.

    Third size is floor(N/3). Ties in growth break by ticker so the result
    is deterministic.
    """
    if len(scores) < 3:
        raise DataError(f"need at least 3 companies to label thirds, got {len(scores)}")
    ordered = sorted(scores, key=lambda s: (-s.growth, s.ticker))
    third = len(ordered) // 3
    winners = tuple(s.ticker for s in ordered[:third])
    losers = tuple(s.ticker for s in ordered[-third:])
    middle = tuple(s.ticker for s in ordered[third : len(ordered) - third])
    return LabelSet(winners, losers, middle)


def write_labels_csv(labels: LabelSet, scores: list[CompanyScore], path: str | Path) -> None:
    by_ticker = {s.ticker: s for s in scores}
    rows = []
    for group, name in ((labels.winners, WINNER), (labels.losers, LOSER), (labels.middle, MIDDLE)):
        for ticker in group:
            rows.append({"ticker": ticker, "label": name, "growth": by_ticker[ticker].growth})
    pd.DataFrame(rows, columns=["ticker", "label", "growth"]).to_csv(path, index=False)
