"""Winner/loser separability analysis for stock-index components.

Tests whether long-term winners and losers of an index are separable from
an initial fragment of their daily log-return history, using
correlation-distance k-NN under leave-one-out cross-validation, proportion
estimates, pair-distance histograms and elastic-map embeddings. A
synthetic-market generator provides the oracle when real data is absent.
"""

from .classify import KnnConfig, LoocvReport, ProportionEstimate, knn_vote, loocv, loocv_sweep, proportion_estimate
from .embed import ElasticMap, ElasticNetParams, PcaResult, fit_elastic_map, internal_coordinates, pca, project_internal
from .errors import ConfigError, DataError, NumericalError, WinsepError
from .ingest import (
    DEFAULT_WINDOWS,
    RawSeries,
    align_to_index_calendar,
    clean_panel,
    compute_log_returns,
    slice_initial_window,
)
from .labeling import CompanyScore, LabelSet, average_price, label_thirds, score_companies
from .metrics import (
    DistanceMatrix,
    Measure,
    PairPartition,
    distance,
    distance_matrix,
    partition_pairs,
    pearson,
    proximity,
    verify_angle_identities,
)
from .report import Histogram, RunConfig, build_histogram, partition_histogram, run_pipeline
from .synth import SynthSpec, gen_null_panel, gen_planted_panel

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "CompanyScore",
    "DataError",
    "DEFAULT_WINDOWS",
    "DistanceMatrix",
    "ElasticMap",
    "ElasticNetParams",
    "Histogram",
    "KnnConfig",
    "LabelSet",
    "LoocvReport",
    "Measure",
    "NumericalError",
    "PairPartition",
    "PcaResult",
    "ProportionEstimate",
    "RawSeries",
    "RunConfig",
    "SynthSpec",
    "WinsepError",
    "align_to_index_calendar",
    "average_price",
    "build_histogram",
    "clean_panel",
    "compute_log_returns",
    "distance",
    "distance_matrix",
    "fit_elastic_map",
    "gen_null_panel",
    "gen_planted_panel",
    "internal_coordinates",
    "knn_vote",
    "label_thirds",
    "loocv",
    "loocv_sweep",
    "partition_histogram",
    "partition_pairs",
    "pca",
    "pearson",
    "project_internal",
    "proportion_estimate",
    "proximity",
    "run_pipeline",
    "score_companies",
    "slice_initial_window",
    "verify_angle_identities",
]
