"""Elastic-map fitting and principal components for low-dimensional views.

An elastic map is a regular grid of nodes pulled toward the data while
stretching (edge length, coefficient lambda) and bending (second difference
along grid lines, coefficient mu) penalties keep it smooth. Fitting
alternates nearest-node assignment with an exact quadratic solve for node
positions, so the total energy never increases.

The energy is

    U = U_approx + lambda * U_stretch + mu * U_bend

with U_approx the mean squared point-to-node distance, U_stretch the mean
squared edge vector and U_bend the mean squared rib (second-difference)
vector. Normalizing each term by its count keeps the coefficients
comparable across grid and dataset sizes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, RankDeficiencyError

_RIDGE = 1e-9


@dataclass(frozen=True)
class ElasticNetParams:
    grid_rows: int = 10
    grid_cols: int = 10
    lambda_: float = 0.0
    mu: float = 8.1
    max_iterations: int = 200
    tolerance: float = 1e-6

    def __post_init__(self):
        if self.grid_rows < 2 or self.grid_cols < 2:
            raise ConfigError("grid must be at least 2x2")
        if self.lambda_ < 0 or self.mu < 0:
            raise ConfigError("elasticity coefficients must be non-negative")
        if self.tolerance <= 0:
            raise ConfigError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be positive")


@dataclass(frozen=True)
class ElasticMap:
    """A fitted map: node positions in data space plus their lattice layout."""

    node_positions: np.ndarray
    node_grid_coords: np.ndarray
    assignment: np.ndarray
    energy_trace: list[float]
    params: ElasticNetParams


@dataclass(frozen=True)
class PcaResult:
    scores: np.ndarray
    variances: np.ndarray = field(repr=False)


def pca(data, n_components: int = 3) -> PcaResult:
    """Scores on the top variance directions, ordered by explained variance.

    Data is mean-centered internally. ``variances`` carries the full
    spectrum (normalized by n - 1) so the total-variance identity can be
    checked. Components beyond the numerical rank come back as zero scores;
    only data that structurally cannot host ``n_components`` directions is
    rejected.
    """
    X = np.asarray(data, dtype=float)
    if X.ndim != 2:
        raise DataError("expected a 2-D data matrix")
    n, d = X.shape
    if n < n_components + 1:
        raise DataError(f"need at least {n_components + 1} rows, got {n}")
    if min(n - 1, d) < n_components:
        raise RankDeficiencyError(
            f"{n} points in {d} dimensions cannot host {n_components} components"
        )
    centered = X - X.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    # fix each component's sign by its largest-magnitude loading
    flip = np.sign(vt[np.arange(len(s)), np.argmax(np.abs(vt), axis=1)])
    flip[flip == 0] = 1.0
    scores = (u * s) * flip
    return PcaResult(scores=scores[:, :n_components], variances=s**2 / (n - 1))


def _grid_edges(rows: int, cols: int) -> np.ndarray:
    node = lambda i, j: i * cols + j
    edges = []
    for i in range(rows):
        for j in range(cols - 1):
            edges.append((node(i, j), node(i, j + 1)))
    for i in range(rows - 1):
        for j in range(cols):
            edges.append((node(i, j), node(i + 1, j)))
    return np.array(edges, dtype=int)


def _grid_ribs(rows: int, cols: int) -> np.ndarray:
    node = lambda i, j: i * cols + j
    ribs = []
    for i in range(rows):
        for j in range(1, cols - 1):
            ribs.append((node(i, j - 1), node(i, j), node(i, j + 1)))
    for j in range(cols):
        for i in range(1, rows - 1):
            ribs.append((node(i - 1, j), node(i, j), node(i + 1, j)))
    return np.array(ribs, dtype=int).reshape(-1, 3)


def _init_nodes(X: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Regular grid spanning the first two principal axes at +/- 2 sigma."""
    mean = X.mean(axis=0)
    centered = X - mean
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    sigma = s / np.sqrt(max(len(X) - 1, 1))
    floor = max(sigma[0], 1.0) * 1e-8
    axis_v = vt[0] * max(sigma[0], floor)
    if len(s) > 1:
        axis_u = vt[1] * max(sigma[1], floor)
    else:
        # 1-D ambient data: fabricate any second direction of negligible extent
        axis_u = np.zeros_like(axis_v)
        axis_u[np.argmin(np.abs(vt[0]))] = floor
    ticks_v = np.linspace(-2.0, 2.0, rows)
    ticks_u = np.linspace(-2.0, 2.0, cols)
    nodes = (
        mean[None, None, :]
        + ticks_v[:, None, None] * axis_v[None, None, :]
        + ticks_u[None, :, None] * axis_u[None, None, :]
    )
    return nodes.reshape(rows * cols, -1)


def _assign(X: np.ndarray, nodes: np.ndarray) -> np.ndarray:
    d2 = ((X[:, None, :] - nodes[None, :, :]) ** 2).sum(axis=2)
    return np.argmin(d2, axis=1)


def _energy(
    X: np.ndarray,
    nodes: np.ndarray,
    assignment: np.ndarray,
    edges: np.ndarray,
    ribs: np.ndarray,
    params: ElasticNetParams,
) -> float:
    approx = ((X - nodes[assignment]) ** 2).sum() / len(X)
    stretch = 0.0
    if params.lambda_ > 0 and len(edges):
        diffs = nodes[edges[:, 0]] - nodes[edges[:, 1]]
        stretch = (diffs**2).sum() / len(edges)
    bend = 0.0
    if params.mu > 0 and len(ribs):
        second = nodes[ribs[:, 0]] - 2.0 * nodes[ribs[:, 1]] + nodes[ribs[:, 2]]
        bend = (second**2).sum() / len(ribs)
    return float(approx + params.lambda_ * stretch + params.mu * bend)


def _system_matrix(
    counts: np.ndarray,
    n_points: int,
    edges: np.ndarray,
    ribs: np.ndarray,
    params: ElasticNetParams,
) -> np.ndarray:
    A = np.diag(counts / n_points)
    if params.lambda_ > 0 and len(edges):
        w = params.lambda_ / len(edges)
        for a, b in edges:
            A[a, a] += w
            A[b, b] += w
            A[a, b] -= w
            A[b, a] -= w
    if params.mu > 0 and len(ribs):
        w = params.mu / len(ribs)
        coeff = np.array([1.0, -2.0, 1.0])
        for p, q, r in ribs:
            idx = (p, q, r)
            for a, ca in zip(idx, coeff):
                for b, cb in zip(idx, coeff):
                    A[a, b] += w * ca * cb
    return A


def _solve_nodes(A: np.ndarray, B: np.ndarray, ridge: bool) -> np.ndarray:
    """Minimize the node-position quadratic.

    The system is PSD and consistent, so when the fast direct solve goes bad
    (exactly or nearly singular) the minimum-norm least-squares solution is
    still an exact minimizer and keeps the energy non-increasing.
    """
    if ridge:
        return np.linalg.solve(A + _RIDGE * np.eye(len(A)), B)
    try:
        nodes = np.linalg.solve(A, B)
    except np.linalg.LinAlgError:
        nodes = None
    if nodes is not None and np.isfinite(nodes).all():
        scale = np.abs(B).max() + 1e-30
        if np.abs(A @ nodes - B).max() <= 1e-8 * scale:
            return nodes
    return np.linalg.lstsq(A, B, rcond=None)[0]


def fit_elastic_map(data, params: ElasticNetParams = ElasticNetParams()) -> ElasticMap:
    """Fit the grid to the data by alternating assignment and a linear solve."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or len(X) < 4:
        raise DataError("need a 2-D matrix with at least four data points")
    if not np.isfinite(X).all():
        raise DataError("data contains non-finite entries")

    rows, cols = params.grid_rows, params.grid_cols
    edges = _grid_edges(rows, cols)
    ribs = _grid_ribs(rows, cols)
    no_elastic = params.lambda_ == 0.0 and (params.mu == 0.0 or len(ribs) == 0)
    if no_elastic:
        warnings.warn(
            "no elastic terms active; adding a tiny ridge to keep empty nodes solvable",
            stacklevel=2,
        )

    nodes = _init_nodes(X, rows, cols)
    grid_coords = np.array(
        [(j, i) for i in range(rows) for j in range(cols)], dtype=float
    )

    assignment = _assign(X, nodes)
    trace = [_energy(X, nodes, assignment, edges, ribs, params)]
    for _ in range(params.max_iterations):
        counts = np.bincount(assignment, minlength=rows * cols).astype(float)
        A = _system_matrix(counts, len(X), edges, ribs, params)
        B = np.zeros_like(nodes)
        np.add.at(B, assignment, X / len(X))
        nodes = _solve_nodes(A, B, ridge=no_elastic)
        assignment = _assign(X, nodes)
        trace.append(_energy(X, nodes, assignment, edges, ribs, params))
        prev, curr = trace[-2], trace[-1]
        if abs(prev - curr) <= params.tolerance * max(abs(prev), 1e-30):
            break
    return ElasticMap(
        node_positions=nodes,
        node_grid_coords=grid_coords,
        assignment=assignment,
        energy_trace=trace,
        params=params,
    )


def _axis_offset(point, nodes, rows, cols, i, j, axis) -> float:
    """Signed lattice offset from node (i, j) along one grid axis."""
    node = lambda a, b: a * cols + b
    y0 = nodes[node(i, j)]
    best = 0.0
    if axis == 0:  # along columns, u direction
        forward = node(i, j + 1) if j + 1 < cols else None
        backward = node(i, j - 1) if j - 1 >= 0 else None
    else:  # along rows, v direction
        forward = node(i + 1, j) if i + 1 < rows else None
        backward = node(i - 1, j) if i - 1 >= 0 else None
    for neighbour, sign in ((forward, 1.0), (backward, -1.0)):
        if neighbour is None:
            continue
        direction = nodes[neighbour] - y0
        norm2 = float(direction @ direction)
        if norm2 == 0.0:
            continue
        t = float((point - y0) @ direction) / norm2
        if t > 0:
            candidate = sign * min(t, 1.0)
            if abs(candidate) > abs(best):
                best = candidate
    return best


def project_internal(emap: ElasticMap, point) -> np.ndarray:
    """2-D internal coordinates of a point on the fitted map.

    The nearest node's lattice coordinates, refined by piecewise-linear
    interpolation toward its grid neighbours.
    """
    point = np.asarray(point, dtype=float)
    rows = int(emap.node_grid_coords[:, 1].max()) + 1
    cols = int(emap.node_grid_coords[:, 0].max()) + 1
    m = int(np.argmin(((emap.node_positions - point) ** 2).sum(axis=1)))
    i, j = divmod(m, cols)
    du = _axis_offset(point, emap.node_positions, rows, cols, i, j, axis=0)
    dv = _axis_offset(point, emap.node_positions, rows, cols, i, j, axis=1)
    return np.array([j + du, i + dv])


def internal_coordinates(emap: ElasticMap, data) -> np.ndarray:
    """Internal coordinates for every row of a data matrix."""
    X = np.asarray(data, dtype=float)
    return np.vstack([project_internal(emap, x) for x in X])
