"""k-NN classification under leave-one-out cross-validation.

Each labeled company is held out once and classified by majority vote among
its k nearest labeled neighbours in the precomputed dissimilarity matrix.
Middle-third companies take no part, as training or test points. Errors are
tallied separately by true class and summarized with sampling-proportion
statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import pandas as pd

from .errors import ConfigError, DataError
from .ingest import compute_log_returns, slice_initial_window
from .labeling import LOSER, WINNER, LabelSet
from .metrics import DistanceMatrix, Measure, distance_matrix


@dataclass(frozen=True)
class KnnConfig:
    k: int = 1

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be positive, got {self.k}")


@dataclass(frozen=True)
class LoocvReport:
    window_months: int
    measure: Measure
    total_errors: int
    winner_errors: int
    loser_errors: int
    n_winners: int
    n_losers: int

    @property
    def n_labeled(self) -> int:
        return self.n_winners + self.n_losers

    @property
    def total_rate(self) -> float:
        return self.total_errors / self.n_labeled

    @property
    def winner_rate(self) -> float:
        return self.winner_errors / self.n_winners

    @property
    def loser_rate(self) -> float:
        return self.loser_errors / self.n_losers


@dataclass(frozen=True)
class ProportionEstimate:
    """Sampling distribution of an observed error proportion."""

    p: float
    n: int
    mu: float = field(init=False)
    sigma: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "mu", self.p)
        object.__setattr__(self, "sigma", math.sqrt(self.p * (1.0 - self.p) / self.n))


def proportion_estimate(errors: int, n: int) -> ProportionEstimate:
    """mu = p and sigma = sqrt(p * (1 - p) / n) for p = errors / n."""
    if n < 1:
        raise DataError(f"sample size must be at least 1, got {n}")
    if not 0 <= errors <= n:
        raise DataError(f"error count {errors} outside [0, {n}]")
    return ProportionEstimate(p=errors / n, n=n)


def _ranked_training(dm: DistanceMatrix, labels: LabelSet, test_index: int) -> list[int]:
    """Labeled training indices ordered by (distance to test, ticker)."""
    train = [
        dm.index_of(t)
        for t in sorted(labels.labeled)
        if dm.index_of(t) != test_index
    ]
    row = dm.values[test_index]
    # ticker order is already lexicographic, so a stable sort on distance
    # alone realises the (distance, ticker) tie-break
    return sorted(train, key=lambda j: row[j])


def knn_vote(
    test_index: int,
    dm: DistanceMatrix,
    labels: LabelSet,
    cfg: KnnConfig = KnnConfig(),
) -> str:
    """Majority label among the k nearest labeled neighbours.

    Distance ties at the k-boundary prefer the lexicographically earlier
    ticker; a tied vote falls back to the single nearest neighbour's label.
    """
    test_ticker = dm.tickers[test_index]
    if labels.label_of(test_ticker) not in (WINNER, LOSER):
        raise DataError(f"{test_ticker}: test company must be labeled winner or loser")
    ranked = _ranked_training(dm, labels, test_index)
    if len(ranked) < cfg.k:
        raise ConfigError(f"k={cfg.k} exceeds the {len(ranked)} available training points")
    votes = [labels.label_of(dm.tickers[j]) for j in ranked[: cfg.k]]
    wins = votes.count(WINNER)
    loses = votes.count(LOSER)
    if wins == loses:
        return votes[0]
    return WINNER if wins > loses else LOSER


def loocv(
    dm: DistanceMatrix,
    labels: LabelSet,
    cfg: KnnConfig = KnnConfig(),
    window_months: int = 0,
) -> LoocvReport:
    """Hold out each labeled company once; tally misclassifications by class."""
    if len(labels.winners) < 2 or len(labels.losers) < 2:
        raise DataError("need at least two winners and two losers for LOOCV")
    winner_errors = 0
    loser_errors = 0
    for ticker in labels.labeled:
        truth = labels.label_of(ticker)
        predicted = knn_vote(dm.index_of(ticker), dm, labels, cfg)
        if predicted != truth:
            if truth == WINNER:
                winner_errors += 1
            else:
                loser_errors += 1
    return LoocvReport(
        window_months=window_months,
        measure=dm.measure,
        total_errors=winner_errors + loser_errors,
        winner_errors=winner_errors,
        loser_errors=loser_errors,
        n_winners=len(labels.winners),
        n_losers=len(labels.losers),
    )


def loocv_sweep(
    panel: pd.DataFrame,
    labels: LabelSet,
    windows,
    measures=(Measure.DISTANCE, Measure.PROXIMITY),
    cfg: KnnConfig = KnnConfig(),
    anchor=None,
) -> list[LoocvReport]:
    """One LOOCV report per (initial window, measure) pair.

    Only the winner and loser columns enter the experiment matrix; returns
    are recomputed on each window slice independently.
    """
    joined = panel[list(labels.labeled)]
    reports = []
    for months in windows:
        window_prices = slice_initial_window(joined, months, anchor=anchor)
        returns = compute_log_returns(window_prices)
        for measure in measures:
            dm = distance_matrix(returns, measure)
            reports.append(loocv(dm, labels, cfg, window_months=months))
    return reports
