"""Pearson correlation and the two correlation-based dissimilarities.

Two measures are supported on company return series:

* ``distance``  d = sqrt(2 * (1 - c)),  ranging over [0, 2]
* ``proximity`` d = sqrt(1 - c**2),     ranging over [0, 1]

where c is the Pearson coefficient. Writing c = cos(2a) for a half-angle
a in [0, pi/2], distance equals 2*sin(a) and proximity equals sin(2a); the
two agree for small a. Proximity is not a metric: it vanishes for perfectly
anticorrelated pairs as well.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError, DegenerateSeriesError
from .labeling import LabelSet


class Measure(enum.Enum):
    DISTANCE = "distance"
    PROXIMITY = "proximity"

    @classmethod
    def parse(cls, name: str) -> "Measure":
        try:
            return cls(name.lower())
        except ValueError:
            raise DataError(f"unknown measure {name!r}; use 'distance' or 'proximity'") from None


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise company dissimilarities under one measure."""

    tickers: tuple[str, ...]
    measure: Measure
    values: np.ndarray

    def index_of(self, ticker: str) -> int:
        try:
            return self.tickers.index(ticker)
        except ValueError:
            raise DataError(f"ticker {ticker!r} not in distance matrix") from None


@dataclass(frozen=True)
class PairPartition:
    """Pair distances split by label class: within winners, within losers, across."""

    ww: np.ndarray
    ll: np.ndarray
    wl: np.ndarray


def _validate_corr(c: float) -> float:
    if math.isnan(c) or abs(c) > 1 + 1e-9:
        raise DataError(f"correlation {c} outside [-1, 1]")
    return min(1.0, max(-1.0, c))


def pearson(x, y) -> float:
    """Product-moment correlation of two equal-length series.

    Clamped to [-1, 1] so floating-point overshoot never produces a NaN
    under the square roots downstream.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise DataError(f"series shapes differ: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise DataError("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sx = np.dot(dx, dx)
    sy = np.dot(dy, dy)
    if sx == 0.0 or sy == 0.0:
        raise DegenerateSeriesError("zero-variance series has no correlation")
    c = float(np.dot(dx, dy) / math.sqrt(sx * sy))
    return min(1.0, max(-1.0, c))


def distance(c: float) -> float:
    """sqrt(2 * (1 - c)); 0 iff c = 1, 2 iff c = -1."""
    c = _validate_corr(c)
    return math.sqrt(max(0.0, 2.0 * (1.0 - c)))


def proximity(c: float) -> float:
    """sqrt(1 - c**2); 0 iff |c| = 1, 1 iff c = 0. Not a metric."""
    c = _validate_corr(c)
    return math.sqrt(max(0.0, 1.0 - c * c))


def verify_angle_identities(alpha_grid) -> float:
    """Largest deviation between the half-angle forms and the measures.

    For each angle a, compares 2*sin(a) against distance(cos 2a) and
    sin(2a) against proximity(cos 2a); returns the max absolute gap.
    """
    worst = 0.0
    for alpha in np.asarray(alpha_grid, dtype=float):
        c = math.cos(2.0 * alpha)
        worst = max(worst, abs(2.0 * math.sin(alpha) - distance(c)))
        worst = max(worst, abs(math.sin(2.0 * alpha) - proximity(c)))
    return worst


def correlation_matrix(returns) -> np.ndarray:
    """Pairwise Pearson coefficients between return columns, clamped."""
    values = np.asarray(returns, dtype=float)
    if values.ndim != 2 or values.shape[1] < 2:
        raise DataError("need a 2-D return matrix with at least two companies")
    if values.shape[0] < 2:
        raise DataError("need at least two return rows")
    stds = values.std(axis=0)
    if (stds == 0).any():
        bad = int(np.argmax(stds == 0))
        name = returns.columns[bad] if hasattr(returns, "columns") else str(bad)
        raise DegenerateSeriesError(f"{name}: constant return series")
    corr = np.corrcoef(values, rowvar=False)
    if np.isnan(corr).any():
        raise DegenerateSeriesError("correlation matrix contains NaN")
    np.clip(corr, -1.0, 1.0, out=corr)
    np.fill_diagonal(corr, 1.0)
    return corr


def distance_matrix(returns, measure: Measure) -> DistanceMatrix:
    """All pairwise dissimilarities between companies' return series."""
    corr = correlation_matrix(returns)
    if measure is Measure.DISTANCE:
        values = np.sqrt(np.maximum(0.0, 2.0 * (1.0 - corr)))
    else:
        values = np.sqrt(np.maximum(0.0, 1.0 - corr * corr))
    np.fill_diagonal(values, 0.0)
    values = (values + values.T) / 2.0
    if hasattr(returns, "columns"):
        tickers = tuple(str(t) for t in returns.columns)
    else:
        tickers = tuple(str(i) for i in range(values.shape[0]))
    return DistanceMatrix(tickers, measure, values)


def partition_pairs(dm: DistanceMatrix, labels: LabelSet) -> PairPartition:
    """Split unordered labeled pairs into winner/winner, loser/loser, cross."""
    w_idx = np.array([dm.index_of(t) for t in labels.winners], dtype=int)
    l_idx = np.array([dm.index_of(t) for t in labels.losers], dtype=int)

    def upper(idx: np.ndarray) -> np.ndarray:
        if len(idx) < 2:
            return np.empty(0)
        sub = dm.values[np.ix_(idx, idx)]
        iu = np.triu_indices(len(idx), k=1)
        return sub[iu]

    if len(w_idx) and len(l_idx):
        wl = dm.values[np.ix_(w_idx, l_idx)].ravel()
    else:
        wl = np.empty(0)
    return PairPartition(ww=upper(w_idx), ll=upper(l_idx), wl=wl)
