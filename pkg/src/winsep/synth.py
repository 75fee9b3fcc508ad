"""Synthetic market panels with known correlation structure.

Two generators back every statistical acceptance test: an i.i.d. null panel
(no cross-company correlation at all) and a planted two-class panel whose
within-class and cross-class return correlations are set exactly by a
two-factor block model. Prices are exponentiated cumulative log-returns, so
synthetic panels flow through the same pipeline as real data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import ConfigError
from .labeling import LabelSet

_BASE_PRICE = 100.0
_CALENDAR_START = "2020-01-01"


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a planted winner/loser panel.

    ``intra_rho`` is the within-class return correlation and ``cross_rho``
    the across-class one; losers may be given a looser class via
    ``intra_rho_loser``. Class drifts separate the growth distributions so
    thirds labeling recovers the planted classes.
    """

    n_winners: int = 16
    n_losers: int = 16
    n_days: int = 63
    intra_rho: float = 0.8
    cross_rho: float = 0.0
    intra_rho_loser: float | None = None
    drift_winner: float = 0.004
    drift_loser: float = -0.004
    volatility: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if self.n_winners < 2 or self.n_losers < 2:
            raise ConfigError("need at least two companies per class")
        if self.n_days < 2:
            raise ConfigError("need at least two trading days")
        if self.volatility <= 0:
            raise ConfigError("volatility must be positive")
        rho_l = self.intra_rho if self.intra_rho_loser is None else self.intra_rho_loser
        for name, rho in (("intra_rho", self.intra_rho), ("intra_rho_loser", rho_l)):
            if not 0.0 <= rho < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1), got {rho}")
        bound = np.sqrt(self.intra_rho * rho_l)
        if not 0.0 <= self.cross_rho <= bound + 1e-12:
            raise ConfigError(
                f"cross_rho={self.cross_rho} infeasible; needs 0 <= cross_rho <= "
                f"sqrt(intra_rho * intra_rho_loser) = {bound:.4f}"
            )


def _calendar(n_days: int) -> pd.DatetimeIndex:
    return pd.bdate_range(_CALENDAR_START, periods=n_days, name="date")


def _prices_from_returns(returns: np.ndarray, tickers: list[str], n_days: int) -> pd.DataFrame:
    log_prices = np.vstack([np.zeros(returns.shape[1]), np.cumsum(returns, axis=0)])
    prices = _BASE_PRICE * np.exp(log_prices)
    return pd.DataFrame(prices, index=_calendar(n_days), columns=tickers)


def gen_null_panel(
    n_companies: int,
    n_days: int,
    volatility: float = 0.02,
    seed: int = 0,
) -> pd.DataFrame:
    """Panel of i.i.d. Gaussian random walks; all population correlations 0."""
    if n_companies < 3:
        raise ConfigError("need at least three companies")
    if n_days < 2:
        raise ConfigError("need at least two trading days")
    rng = np.random.default_rng(seed)
    returns = rng.normal(0.0, volatility, size=(n_days - 1, n_companies))
    tickers = [f"N{i:03d}" for i in range(n_companies)]
    return _prices_from_returns(returns, tickers, n_days)


def gen_planted_panel(spec: SynthSpec) -> tuple[pd.DataFrame, LabelSet]:
    """Two-class block-correlated panel plus its ground-truth labels.

    Each company's return is sqrt(rho) times its class factor plus
    sqrt(1 - rho) idiosyncratic noise; the two class factors are correlated
    so that the cross-class return correlation equals ``cross_rho`` exactly.
    """
    rho_w = spec.intra_rho
    rho_l = spec.intra_rho if spec.intra_rho_loser is None else spec.intra_rho_loser
    denom = np.sqrt(rho_w * rho_l)
    factor_corr = spec.cross_rho / denom if denom > 0 else 0.0

    rng = np.random.default_rng(spec.seed)
    steps = spec.n_days - 1
    z = rng.standard_normal((steps, 2))
    f_w = z[:, 0]
    f_l = factor_corr * z[:, 0] + np.sqrt(max(0.0, 1.0 - factor_corr**2)) * z[:, 1]

    def block(n, rho, factor, drift):
        eps = rng.standard_normal((steps, n))
        common = np.sqrt(rho) * factor[:, None]
        return drift + spec.volatility * (common + np.sqrt(1.0 - rho) * eps)

    winners_block = block(spec.n_winners, rho_w, f_w, spec.drift_winner)
    losers_block = block(spec.n_losers, rho_l, f_l, spec.drift_loser)
    returns = np.hstack([winners_block, losers_block])

    w_tickers = [f"W{i:03d}" for i in range(spec.n_winners)]
    l_tickers = [f"L{i:03d}" for i in range(spec.n_losers)]
    panel = _prices_from_returns(returns, w_tickers + l_tickers, spec.n_days)
    return panel, LabelSet(winners=tuple(w_tickers), losers=tuple(l_tickers))
