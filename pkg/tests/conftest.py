import numpy as np
import pandas as pd
import pytest

from winsep.ingest import compute_log_returns
from winsep.synth import SynthSpec, gen_planted_panel


@pytest.fixture(scope="session")
def planted():
    """Well-separated two-class panel: 16+16 companies, one quarter of days."""
    spec = SynthSpec(
        n_winners=16, n_losers=16, n_days=63,
        intra_rho=0.8, cross_rho=0.0,
        drift_winner=0.004, drift_loser=-0.004, seed=0,
    )
    return gen_planted_panel(spec)


@pytest.fixture(scope="session")
def planted_points(planted):
    """Planted companies as rows of their log-return vectors."""
    panel, labels = planted
    returns = compute_log_returns(panel[list(labels.labeled)])
    return returns.to_numpy().T, labels


def business_panel(values, start="2021-01-04", tickers=None):
    """Small panel on a business-day calendar from a plain array."""
    values = np.asarray(values, dtype=float)
    idx = pd.bdate_range(start, periods=len(values), name="date")
    if tickers is None:
        tickers = [f"T{i}" for i in range(values.shape[1])]
    return pd.DataFrame(values, index=idx, columns=tickers)
