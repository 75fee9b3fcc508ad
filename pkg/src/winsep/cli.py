"""Command-line interface.

Subcommands mirror the pipeline stages: ``ingest``, ``label``, ``analyze``,
``hist``, ``embed``, ``synth`` and ``run`` (everything end to end). Exit
codes: 0 success, 2 invalid configuration, 3 data error, 4 numerical error.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click
import pandas as pd

from . import ingest as ingest_mod
from . import report as report_mod
from .classify import KnnConfig, loocv_sweep
from .embed import ElasticNetParams, fit_elastic_map, internal_coordinates, pca
from .errors import DataError, WinsepError
from .labeling import label_thirds, score_companies, write_labels_csv
from .metrics import distance_matrix, partition_pairs
from .synth import SynthSpec, gen_planted_panel


def _raising_module(exc: BaseException) -> str:
    """Innermost package module on the traceback, for qualified messages."""
    module = "winsep"
    tb = exc.__traceback__
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("winsep."):
            module = name.split(".", 1)[1]
        tb = tb.tb_next
    return module


def _handle_errors(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except WinsepError as exc:
            click.echo(f"{_raising_module(exc)}: {type(exc).__name__}: {exc}", err=True)
            sys.exit(exc.exit_code)
        except OSError as exc:
            click.echo(f"{_raising_module(exc)}: I/O error: {exc}", err=True)
            sys.exit(DataError.exit_code)

    return wrapper


def _load_cleaned_panel(panel_path: str) -> pd.DataFrame:
    series, calendar = ingest_mod.read_wide_csv(panel_path)
    gappy = sorted(s.ticker for s in series if s.close.isna().any())
    if gappy:
        raise DataError(
            f"{panel_path} still has missing values ({', '.join(gappy[:5])}...); "
            "run 'winsep ingest' first"
        )
    panel, _ = ingest_mod.clean_panel(series, missing_threshold=0.0)
    return panel


def _load_labels(labels_path: str):
    df = pd.read_csv(labels_path)
    grouped = {name: tuple(sub["ticker"]) for name, sub in df.groupby("label")}
    from .labeling import LabelSet

    return LabelSet(
        winners=grouped.get("winner", ()),
        losers=grouped.get("loser", ()),
        middle=grouped.get("middle", ()),
    )


def _labels_for(panel: pd.DataFrame, months: int):
    begin, end = report_mod.default_label_windows(panel, months)
    scores = score_companies(panel, begin, end)
    return label_thirds(scores), scores


@click.group()
def main():
    """Winner/loser separability analysis of index components."""


@main.command("ingest")
@click.option("--data", "data_dir", type=click.Path(), help="directory of per-company CSVs")
@click.option("--wide", "wide_csv", type=click.Path(), help="single wide CSV date,t1,t2,...")
@click.option("--calendar", type=click.Path(), help="index calendar CSV (date column)")
@click.option("--threshold", default=0.20, show_default=True, help="missing-value drop threshold")
@click.option("--fill", default=ingest_mod.FILL_DATE_MEAN, show_default=True,
              type=click.Choice([ingest_mod.FILL_DATE_MEAN, ingest_mod.FILL_COMPANY_MEAN]))
@click.option("--out", default="out", show_default=True, type=click.Path())
@_handle_errors
def ingest_cmd(data_dir, wide_csv, calendar, threshold, fill, out):
    """Load, align and clean closing prices; write panel and returns CSVs."""
    values = {"out_dir": out, "missing_threshold": str(threshold), "fill_method": fill}
    if data_dir:
        values["data_dir"] = data_dir
    if wide_csv:
        values["wide_csv"] = wide_csv
    if calendar:
        values["calendar"] = calendar
    cfg = report_mod.build_run_config(values)
    panel, dropped = report_mod.load_panel(cfg)
    returns = ingest_mod.compute_log_returns(panel)
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    ingest_mod.write_panel_csv(panel, out_path / "panel.csv")
    ingest_mod.write_panel_csv(returns, out_path / "returns.csv")
    pd.DataFrame({"ticker": dropped}).to_csv(out_path / "dropped.csv", index=False)
    click.echo(f"kept {panel.shape[1]} companies, dropped {len(dropped)}")


@main.command("label")
@click.option("--panel", "panel_path", required=True, type=click.Path())
@click.option("--months", default=3, show_default=True, help="length of each label frame")
@click.option("--out", default="out", show_default=True, type=click.Path())
@_handle_errors
def label_cmd(panel_path, months, out):
    """Label companies winner/loser by the thirds rule; write labels.csv."""
    panel = _load_cleaned_panel(panel_path)
    labels, scores = _labels_for(panel, months)
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    write_labels_csv(labels, scores, out_path / "labels.csv")
    click.echo(f"winners {len(labels.winners)}, losers {len(labels.losers)}, "
               f"middle {len(labels.middle)}")


@main.command("analyze")
@click.option("--panel", "panel_path", required=True, type=click.Path())
@click.option("--labels", "labels_path", type=click.Path(), help="labels.csv from 'label'")
@click.option("--windows", default="3,6,9,12,15,18", show_default=True)
@click.option("--measure", default="both", show_default=True)
@click.option("--k", default=1, show_default=True)
@click.option("--label-months", default=3, show_default=True)
@click.option("--anchor", default=None, help="nominal period start date (YYYY-MM-DD)")
@click.option("--out", default="out", show_default=True, type=click.Path())
@_handle_errors
def analyze_cmd(panel_path, labels_path, windows, measure, k, label_months, anchor, out):
    """LOOCV error sweep over initial windows; write reports and error curves."""
    panel = _load_cleaned_panel(panel_path)
    if labels_path:
        labels = _load_labels(labels_path)
    else:
        labels, _ = _labels_for(panel, label_months)
    reports = loocv_sweep(
        panel,
        labels,
        report_mod.parse_windows(windows),
        report_mod.parse_measures(measure),
        KnnConfig(k=k),
        anchor=anchor,
    )
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    report_mod.write_reports_csv(reports, out_path / "loocv_reports.csv")
    report_mod.write_reports_json(reports, out_path / "loocv_reports.json")
    report_mod.emit_plots(reports, {}, {}, out_path)
    click.echo(report_mod.summarize(reports, labels, []))


@main.command("hist")
@click.option("--panel", "panel_path", required=True, type=click.Path())
@click.option("--labels", "labels_path", type=click.Path())
@click.option("--window", default=3, show_default=True, help="initial window (months)")
@click.option("--measure", default="both", show_default=True)
@click.option("--bins", default=20, show_default=True)
@click.option("--label-months", default=3, show_default=True)
@click.option("--anchor", default=None)
@click.option("--out", default="out", show_default=True, type=click.Path())
@_handle_errors
def hist_cmd(panel_path, labels_path, window, measure, bins, label_months, anchor, out):
    """Pair-distance histograms for one initial window."""
    panel = _load_cleaned_panel(panel_path)
    if labels_path:
        labels = _load_labels(labels_path)
    else:
        labels, _ = _labels_for(panel, label_months)
    window_prices = ingest_mod.slice_initial_window(
        panel[list(labels.labeled)], window, anchor=anchor
    )
    returns = ingest_mod.compute_log_returns(window_prices)
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    histograms = {}
    for m in report_mod.parse_measures(measure):
        dm = distance_matrix(returns, m)
        partition = partition_pairs(dm, labels)
        histograms[m] = report_mod.partition_histogram(partition, bins)
        report_mod.write_partition_csv(partition, out_path / f"pairs_{m.value}.csv")
        report_mod.write_histogram_csv(histograms[m], out_path / f"hist_{m.value}.csv")
    report_mod.emit_plots([], histograms, {}, out_path)
    click.echo(f"wrote histograms for {len(histograms)} measure(s)")


@main.command("embed")
@click.option("--panel", "panel_path", required=True, type=click.Path())
@click.option("--labels", "labels_path", type=click.Path())
@click.option("--window", default=3, show_default=True)
@click.option("--grid-rows", default=10, show_default=True)
@click.option("--grid-cols", default=10, show_default=True)
@click.option("--stretch", "lambda_", default=0.0, show_default=True,
              help="stretching elasticity coefficient")
@click.option("--bend", "mu", default=8.1, show_default=True,
              help="bending elasticity coefficient")
@click.option("--label-months", default=3, show_default=True)
@click.option("--anchor", default=None)
@click.option("--out", default="out", show_default=True, type=click.Path())
@_handle_errors
def embed_cmd(panel_path, labels_path, window, grid_rows, grid_cols, lambda_, mu,
              label_months, anchor, out):
    """Elastic-map and principal-component embeddings of labeled companies."""
    panel = _load_cleaned_panel(panel_path)
    if labels_path:
        labels = _load_labels(labels_path)
    else:
        labels, _ = _labels_for(panel, label_months)
    window_prices = ingest_mod.slice_initial_window(
        panel[list(labels.labeled)], window, anchor=anchor
    )
    returns = ingest_mod.compute_log_returns(window_prices)
    points = returns.to_numpy().T
    params = ElasticNetParams(grid_rows=grid_rows, grid_cols=grid_cols, lambda_=lambda_, mu=mu)
    emap = fit_elastic_map(points, params)
    coords = internal_coordinates(emap, points)
    scores = pca(points, n_components=3)
    names = tuple(labels.label_of(t) for t in labels.labeled)
    map_2d = report_mod.Embedding(labels.labeled, names, coords)
    pca_3d = report_mod.Embedding(labels.labeled, names, scores.scores)
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    report_mod.write_embedding_csv(map_2d, out_path / "embedding_2d.csv")
    report_mod.write_embedding_csv(pca_3d, out_path / "embedding_3d.csv")
    report_mod.write_energy_trace_csv(emap.energy_trace, out_path / "energy_trace.csv")
    report_mod.emit_plots([], {}, {"map_2d": map_2d, "pca_3d": pca_3d}, out_path)
    click.echo(f"elastic map converged in {len(emap.energy_trace) - 1} iterations")


@main.command("synth")
@click.option("--n-winners", default=16, show_default=True)
@click.option("--n-losers", default=16, show_default=True)
@click.option("--days", default=63, show_default=True)
@click.option("--intra-rho", default=0.8, show_default=True)
@click.option("--cross-rho", default=0.0, show_default=True)
@click.option("--drift-winner", default=0.004, show_default=True)
@click.option("--drift-loser", default=-0.004, show_default=True)
@click.option("--volatility", default=0.02, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", default="out", show_default=True, type=click.Path())
@_handle_errors
def synth_cmd(n_winners, n_losers, days, intra_rho, cross_rho, drift_winner,
              drift_loser, volatility, seed, out):
    """Generate a planted synthetic panel plus its ground-truth labels."""
    spec = SynthSpec(
        n_winners=n_winners, n_losers=n_losers, n_days=days,
        intra_rho=intra_rho, cross_rho=cross_rho,
        drift_winner=drift_winner, drift_loser=drift_loser,
        volatility=volatility, seed=seed,
    )
    panel, truth = gen_planted_panel(spec)
    out_path = Path(out)
    out_path.mkdir(parents=True, exist_ok=True)
    ingest_mod.write_panel_csv(panel, out_path / "panel.csv")
    rows = [{"ticker": t, "label": "winner"} for t in truth.winners]
    rows += [{"ticker": t, "label": "loser"} for t in truth.losers]
    pd.DataFrame(rows).to_csv(out_path / "true_labels.csv", index=False)
    click.echo(f"wrote {panel.shape[1]} companies x {panel.shape[0]} days")


@main.command("run")
@click.option("--config", "config_path", type=click.Path(), help="flat key=value config file")
@click.option("--data", "data_dir", type=click.Path())
@click.option("--wide", "wide_csv", type=click.Path())
@click.option("--calendar", type=click.Path())
@click.option("--synth", "synth_flag", is_flag=True, default=None,
              help="run on a planted synthetic panel")
@click.option("--windows", default=None, help="comma-separated months, e.g. 3,6,9,12,15,18")
@click.option("--measure", default=None, help="distance|proximity|both")
@click.option("--k", default=None, type=int)
@click.option("--bins", default=None, type=int)
@click.option("--begin-window", default=None, help="labeling begin frame, START:END dates")
@click.option("--end-window", default=None, help="labeling final frame, START:END dates")
@click.option("--anchor", default=None)
@click.option("--seed", default=None, type=int)
@click.option("--out", "out_dir", default=None, type=click.Path())
@_handle_errors
def run_cmd(config_path, data_dir, wide_csv, calendar, synth_flag, windows, measure,
            k, bins, begin_window, end_window, anchor, seed, out_dir):
    """Run the full pipeline and write every artifact."""
    values = report_mod.parse_config_file(config_path) if config_path else {}
    overrides = {
        "data_dir": data_dir,
        "wide_csv": wide_csv,
        "calendar": calendar,
        "synth": "true" if synth_flag else None,
        "windows": windows,
        "measure": measure,
        "k": None if k is None else str(k),
        "bins": None if bins is None else str(bins),
        "begin_window": begin_window,
        "end_window": end_window,
        "anchor": anchor,
        "seed": None if seed is None else str(seed),
        "out_dir": out_dir,
    }
    values.update({key: val for key, val in overrides.items() if val is not None})
    cfg = report_mod.build_run_config(values)
    result = report_mod.run_pipeline(cfg)
    click.echo(result.summary)
    click.echo(f"wrote {len(result.artifacts)} artifacts to {cfg.out_dir}")


if __name__ == "__main__":
    main()
