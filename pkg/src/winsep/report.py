"""Pipeline orchestration and tabular/graphical artifact emission.

``run_pipeline`` drives the whole experiment: ingest (or synthesize) a
closing-price panel, label winners and losers by the thirds rule, run the
LOOCV sweep over initial windows and both dissimilarity measures, build the
pair-distance histograms, fit the elastic map and principal components, and
write every artifact (CSV, JSON, SVG) into one output directory. For a fixed
config and seed the artifact set is byte-identical across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import pandas as pd

from . import ingest, plots
from .classify import KnnConfig, LoocvReport, loocv_sweep, proportion_estimate
from .embed import ElasticMap, ElasticNetParams, fit_elastic_map, internal_coordinates, pca
from .errors import ConfigError, DataError
from .labeling import LabelSet, label_thirds, score_companies, write_labels_csv
from .metrics import DistanceMatrix, Measure, PairPartition, distance_matrix, partition_pairs
from .synth import SynthSpec, gen_planted_panel


@dataclass(frozen=True)
class Histogram:
    """Equal-width bin edges with one count row per named series."""

    bin_edges: np.ndarray
    counts: dict[str, np.ndarray]

    def total(self, series: str) -> int:
        return int(self.counts[series].sum())


def build_histogram(values, bins: int, label: str = "values") -> Histogram:
    """Equal-width histogram over [min, max]; the final bin is right-inclusive."""
    values = np.asarray(list(values), dtype=float)
    if len(values) == 0:
        raise DataError("cannot histogram an empty value list")
    if bins < 1:
        raise DataError(f"need at least one bin, got {bins}")
    counts, edges = np.histogram(values, bins=bins)
    return Histogram(bin_edges=edges, counts={label: counts})


def partition_histogram(partition: PairPartition, bins: int) -> Histogram:
    """Histogram the three pair classes on shared edges spanning all pairs."""
    pools = {"ww": partition.ww, "ll": partition.ll, "wl": partition.wl}
    combined = np.concatenate([v for v in pools.values() if len(v)])
    if len(combined) == 0:
        raise DataError("partition holds no pairs to histogram")
    if bins < 1:
        raise DataError(f"need at least one bin, got {bins}")
    _, edges = np.histogram(combined, bins=bins)
    counts = {
        name: (np.histogram(vals, bins=edges)[0] if len(vals) else np.zeros(bins, dtype=int))
        for name, vals in pools.items()
    }
    return Histogram(bin_edges=edges, counts=counts)


@dataclass(frozen=True)
class Embedding:
    """Per-company coordinates on a fitted view, tagged with labels."""

    tickers: tuple[str, ...]
    labels: tuple[str, ...]
    coords: np.ndarray


@dataclass(frozen=True)
class RunConfig:
    data_dir: str | None = None
    wide_csv: str | None = None
    calendar: str | None = None
    synth: bool = False
    synth_spec: SynthSpec = SynthSpec(n_days=189)
    out_dir: str = "out"
    windows: tuple[int, ...] = (3,)
    measures: tuple[Measure, ...] = (Measure.DISTANCE, Measure.PROXIMITY)
    k: int = 1
    bins: int = 20
    label_months: int = 3
    begin_window: str | None = None
    end_window: str | None = None
    missing_threshold: float = 0.20
    fill_method: str = ingest.FILL_DATE_MEAN
    elastic: ElasticNetParams = ElasticNetParams()
    embed_scope: str = "labeled"
    anchor: str | None = None
    seed: int = 0

    def label_windows(self) -> tuple[tuple, tuple] | None:
        """Explicit labeling frames, or None to derive them from the panel."""
        if self.begin_window is None and self.end_window is None:
            return None
        if self.begin_window is None or self.end_window is None:
            raise ConfigError("begin_window and end_window must be given together")
        begin = parse_date_window(self.begin_window)
        end = parse_date_window(self.end_window)
        if not begin[0] <= begin[1] < end[0] <= end[1]:
            raise ConfigError(
                f"label windows must be well-ordered, got {self.begin_window} "
                f"and {self.end_window}"
            )
        return begin, end

    def validate(self) -> None:
        self.label_windows()
        if not self.synth and self.data_dir is None and self.wide_csv is None:
            raise ConfigError("no input: give a data directory, a wide CSV, or synth=true")
        if self.data_dir is not None and self.calendar is None:
            raise ConfigError("per-company data directory requires an index calendar")
        if not self.windows or any(m < 1 for m in self.windows):
            raise ConfigError(f"window list must be positive months, got {self.windows}")
        if not self.measures:
            raise ConfigError("at least one measure required")
        if self.k < 1:
            raise ConfigError(f"k must be positive, got {self.k}")
        if self.bins < 1:
            raise ConfigError(f"bins must be positive, got {self.bins}")
        if self.label_months < 1:
            raise ConfigError(f"label_months must be positive, got {self.label_months}")
        if not 0.0 <= self.missing_threshold < 1.0:
            raise ConfigError("missing_threshold must lie in [0, 1)")
        if self.embed_scope not in ("labeled", "all"):
            raise ConfigError(f"embed_scope must be 'labeled' or 'all', got {self.embed_scope!r}")


_SYNTH_KEYS = {
    "n_winners": int,
    "n_losers": int,
    "synth_days": int,
    "intra_rho": float,
    "cross_rho": float,
    "intra_rho_loser": float,
    "drift_winner": float,
    "drift_loser": float,
    "volatility": float,
}
_ELASTIC_KEYS = {
    "grid_rows": int,
    "grid_cols": int,
    "lambda": float,
    "mu": float,
    "max_iterations": int,
    "tolerance": float,
}
_PLAIN_KEYS = {
    "data_dir": str,
    "wide_csv": str,
    "calendar": str,
    "synth": None,
    "out_dir": str,
    "windows": None,
    "measure": None,
    "k": int,
    "bins": int,
    "label_months": int,
    "begin_window": str,
    "end_window": str,
    "missing_threshold": float,
    "fill_method": str,
    "embed_scope": str,
    "anchor": str,
    "seed": int,
}


def parse_config_file(path: str | Path) -> dict[str, str]:
    """Read a flat ``key = value`` config file; ``#`` starts a comment."""
    values: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def parse_windows(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise ConfigError(f"bad window list {text!r}") from None


def parse_date_window(text: str) -> tuple[pd.Timestamp, pd.Timestamp]:
    """Parse an inclusive date range written as START:END."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"expected START:END dates, got {text!r}")
    try:
        return pd.Timestamp(parts[0].strip()), pd.Timestamp(parts[1].strip())
    except ValueError:
        raise ConfigError(f"unparseable dates in {text!r}") from None


def parse_measures(text: str) -> tuple[Measure, ...]:
    if text.lower() == "both":
        return (Measure.DISTANCE, Measure.PROXIMITY)
    return (Measure.parse(text),)


def _parse_bool(text: str) -> bool:
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


def build_run_config(values: dict[str, str]) -> RunConfig:
    """Turn flat string key/values into a validated RunConfig."""
    cfg = RunConfig()
    synth_kwargs: dict = {}
    elastic_kwargs: dict = {}
    plain_kwargs: dict = {}
    for key, text in values.items():
        if key in _SYNTH_KEYS:
            target = "n_days" if key == "synth_days" else key
            synth_kwargs[target] = _SYNTH_KEYS[key](text)
        elif key in _ELASTIC_KEYS:
            target = "lambda_" if key == "lambda" else key
            elastic_kwargs[target] = _ELASTIC_KEYS[key](text)
        elif key == "windows":
            plain_kwargs["windows"] = parse_windows(text)
        elif key == "measure":
            plain_kwargs["measures"] = parse_measures(text)
        elif key == "synth":
            plain_kwargs["synth"] = _parse_bool(text)
        elif key in _PLAIN_KEYS:
            plain_kwargs[key] = _PLAIN_KEYS[key](text)
        else:
            raise ConfigError(f"unknown config key {key!r}")
    if "seed" in plain_kwargs:
        synth_kwargs.setdefault("seed", plain_kwargs["seed"])
    if synth_kwargs:
        cfg = replace(cfg, synth_spec=replace(cfg.synth_spec, **synth_kwargs))
    if elastic_kwargs:
        cfg = replace(cfg, elastic=replace(cfg.elastic, **elastic_kwargs))
    if plain_kwargs:
        cfg = replace(cfg, **plain_kwargs)
    cfg.validate()
    return cfg


@dataclass
class PipelineResult:
    panel: pd.DataFrame
    dropped: list[str]
    labels: LabelSet
    reports: list[LoocvReport]
    histograms: dict[Measure, Histogram]
    map_2d: Embedding
    pca_3d: Embedding
    elastic_map: ElasticMap
    artifacts: list[Path] = field(default_factory=list)
    summary: str = ""


def default_label_windows(panel: pd.DataFrame, months: int) -> tuple[tuple, tuple]:
    """Beginning and final frames of ``months`` calendar months each."""
    first, last = panel.index[0], panel.index[-1]
    begin_cut = first + pd.DateOffset(months=months)
    end_anchor = last - pd.DateOffset(months=months)
    begin = (first, begin_cut - pd.Timedelta(days=1))
    end = (end_anchor + pd.Timedelta(days=1), last)
    if begin[1] >= end[0]:
        raise ConfigError(
            f"panel spans less than {2 * months} months; beginning and final "
            "label frames would overlap"
        )
    return begin, end


def load_panel(cfg: RunConfig) -> tuple[pd.DataFrame, list[str]]:
    """Acquire the cleaned price panel named by the config."""
    if cfg.synth:
        panel, _ = gen_planted_panel(cfg.synth_spec)
        return panel, []
    if cfg.wide_csv is not None:
        series, calendar = ingest.read_wide_csv(cfg.wide_csv)
        series = [ingest.align_to_index_calendar(s, calendar) for s in series]
    else:
        calendar = ingest.read_calendar_csv(cfg.calendar)
        series = ingest.read_company_dir(cfg.data_dir, calendar)
    return ingest.clean_panel(series, cfg.missing_threshold, cfg.fill_method)


def summarize(reports: list[LoocvReport], labels: LabelSet, dropped: list[str]) -> str:
    lines = [
        f"companies: {len(labels.winners) + len(labels.losers) + len(labels.middle)} kept, "
        f"{len(dropped)} dropped; winners {len(labels.winners)}, losers {len(labels.losers)}",
        f"{'window':>8} {'measure':>10} {'total':>8} {'winner':>8} {'loser':>8} "
        f"{'w_sigma':>8} {'l_sigma':>8}",
    ]
    for r in reports:
        w_est = proportion_estimate(r.winner_errors, r.n_winners)
        l_est = proportion_estimate(r.loser_errors, r.n_losers)
        lines.append(
            f"{r.window_months:>7}m {r.measure.value:>10} {r.total_rate:>8.4f} "
            f"{r.winner_rate:>8.4f} {r.loser_rate:>8.4f} {w_est.sigma:>8.4f} {l_est.sigma:>8.4f}"
        )
    return "\n".join(lines)


def write_reports_csv(reports: list[LoocvReport], path: Path) -> None:
    rows = []
    for r in reports:
        rows.append(
            {
                "window_months": r.window_months,
                "measure": r.measure.value,
                "total_rate": r.total_rate,
                "winner_rate": r.winner_rate,
                "loser_rate": r.loser_rate,
                "winner_sigma": proportion_estimate(r.winner_errors, r.n_winners).sigma,
                "loser_sigma": proportion_estimate(r.loser_errors, r.n_losers).sigma,
            }
        )
    pd.DataFrame(rows).to_csv(path, index=False)


def write_reports_json(reports: list[LoocvReport], path: Path) -> None:
    doc = []
    for r in reports:
        doc.append(
            {
                "window_months": r.window_months,
                "measure": r.measure.value,
                "total_errors": r.total_errors,
                "winner_errors": r.winner_errors,
                "loser_errors": r.loser_errors,
                "n_winners": r.n_winners,
                "n_losers": r.n_losers,
                "total_rate": r.total_rate,
                "winner_rate": r.winner_rate,
                "loser_rate": r.loser_rate,
            }
        )
    path.write_text(json.dumps({"reports": doc}, indent=2) + "\n")


def write_distance_matrix_csv(dm: DistanceMatrix, path: Path) -> None:
    frame = pd.DataFrame(dm.values, index=list(dm.tickers), columns=list(dm.tickers))
    frame.to_csv(path)


def write_partition_csv(partition: PairPartition, path: Path) -> None:
    longest = max(len(partition.ww), len(partition.ll), len(partition.wl), 0)
    columns = {}
    for name, vals in (("ww", partition.ww), ("ll", partition.ll), ("wl", partition.wl)):
        padded = [repr(float(v)) for v in vals] + [""] * (longest - len(vals))
        columns[name] = padded
    pd.DataFrame(columns).to_csv(path, index=False)


def write_histogram_csv(hist: Histogram, path: Path) -> None:
    data = {"bin_left": hist.bin_edges[:-1], "bin_right": hist.bin_edges[1:]}
    data.update(hist.counts)
    pd.DataFrame(data).to_csv(path, index=False)


def write_embedding_csv(embedding: Embedding, path: Path) -> None:
    columns = [f"coord{i + 1}" for i in range(embedding.coords.shape[1])]
    frame = pd.DataFrame(embedding.coords, columns=columns)
    frame.insert(0, "label", embedding.labels)
    frame.insert(0, "ticker", embedding.tickers)
    frame.to_csv(path, index=False)


def write_energy_trace_csv(trace: list[float], path: Path) -> None:
    frame = pd.DataFrame({"iteration": range(len(trace)), "energy": trace})
    frame.to_csv(path, index=False)


def emit_plots(
    reports: list[LoocvReport],
    histograms: dict[Measure, Histogram],
    embeddings: dict[str, Embedding],
    out_dir: str | Path,
) -> list[Path]:
    """Render the error-curve, histogram and embedding figures as SVG files."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if reports:
        written.append(plots.error_curves(reports, out_dir / "error_total.svg", kind="total"))
        written.append(
            plots.error_curves(reports, out_dir / "error_separate.svg", kind="separate")
        )
    if histograms:
        written.append(plots.pair_histograms(histograms, out_dir / "histograms.svg"))
    if "map_2d" in embeddings:
        written.append(plots.scatter_2d(embeddings["map_2d"], out_dir / "elastic_map_2d.svg"))
    if "pca_3d" in embeddings:
        written.append(plots.scatter_3d(embeddings["pca_3d"], out_dir / "pca_3d.svg"))
    return written


def _label_names(labels: LabelSet, tickers) -> tuple[str, ...]:
    return tuple(labels.label_of(t) for t in tickers)


def run_pipeline(cfg: RunConfig) -> PipelineResult:
    """Execute the full experiment and write all artifacts.

    On failure every artifact written so far is removed, so an output
    directory never holds a partial result set.
    """
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    def track(path: Path) -> Path:
        written.append(path)
        return path

    try:
        panel, dropped = load_panel(cfg)
        returns = ingest.compute_log_returns(panel)
        explicit = cfg.label_windows()
        begin, end = explicit or default_label_windows(panel, cfg.label_months)
        scores = score_companies(panel, begin, end)
        labels = label_thirds(scores)

        knn = KnnConfig(k=cfg.k)
        reports = loocv_sweep(
            panel, labels, cfg.windows, cfg.measures, knn, anchor=cfg.anchor
        )

        smallest = min(cfg.windows)
        window_prices = ingest.slice_initial_window(
            panel[list(labels.labeled)], smallest, anchor=cfg.anchor
        )
        window_returns = ingest.compute_log_returns(window_prices)

        histograms: dict[Measure, Histogram] = {}
        for measure in cfg.measures:
            dm = distance_matrix(window_returns, measure)
            partition = partition_pairs(dm, labels)
            histograms[measure] = partition_histogram(partition, cfg.bins)
            write_distance_matrix_csv(
                dm, track(out_dir / f"distance_matrix_{measure.value}.csv")
            )
            write_partition_csv(partition, track(out_dir / f"pairs_{measure.value}.csv"))
            write_histogram_csv(
                histograms[measure], track(out_dir / f"hist_{measure.value}.csv")
            )

        if cfg.embed_scope == "all":
            embed_tickers = tuple(panel.columns)
            embed_returns = ingest.compute_log_returns(
                ingest.slice_initial_window(panel, smallest, anchor=cfg.anchor)
            )
        else:
            embed_tickers = labels.labeled
            embed_returns = window_returns
        points = embed_returns[list(embed_tickers)].to_numpy().T
        emap = fit_elastic_map(points, cfg.elastic)
        coords_2d = internal_coordinates(emap, points)
        pca_res = pca(points, n_components=3)
        label_names = _label_names(labels, embed_tickers)
        map_2d = Embedding(embed_tickers, label_names, coords_2d)
        pca_3d = Embedding(embed_tickers, label_names, pca_res.scores)

        ingest.write_panel_csv(panel, track(out_dir / "panel.csv"))
        ingest.write_panel_csv(returns, track(out_dir / "returns.csv"))
        pd.DataFrame({"ticker": dropped}).to_csv(track(out_dir / "dropped.csv"), index=False)
        write_labels_csv(labels, scores, track(out_dir / "labels.csv"))
        write_reports_csv(reports, track(out_dir / "loocv_reports.csv"))
        write_reports_json(reports, track(out_dir / "loocv_reports.json"))
        write_embedding_csv(map_2d, track(out_dir / "embedding_2d.csv"))
        write_embedding_csv(pca_3d, track(out_dir / "embedding_3d.csv"))
        write_energy_trace_csv(emap.energy_trace, track(out_dir / "energy_trace.csv"))

        figures = emit_plots(
            reports, histograms, {"map_2d": map_2d, "pca_3d": pca_3d}, out_dir
        )
        written.extend(figures)

        summary = summarize(reports, labels, dropped)
        track(out_dir / "summary.txt").write_text(summary + "\n")

        return PipelineResult(
            panel=panel,
            dropped=dropped,
            labels=labels,
            reports=reports,
            histograms=histograms,
            map_2d=map_2d,
            pca_3d=pca_3d,
            elastic_map=emap,
            artifacts=written,
            summary=summary,
        )
    except Exception:
        for path in written:
            path.unlink(missing_ok=True)
        raise
