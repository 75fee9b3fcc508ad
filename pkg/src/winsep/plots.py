"""Matplotlib rendering of the report figures.

All figures are saved as SVG with a fixed hash salt and no date metadata,
so identical inputs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

_RC = {
    "svg.hashsalt": "winsep",
    "figure.figsize": (8.0, 5.0),
    "axes.grid": True,
    "grid.alpha": 0.3,
}

WINNER_COLOR = "red"
LOSER_COLOR = "green"
_MEASURE_STYLE = {"distance": ("tab:blue", "o"), "proximity": ("tab:orange", "s")}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def error_curves(reports, path: Path, kind: str = "total") -> Path:
    """Misclassification rate against initial-window length.

    ``kind="total"`` plots the overall rate per measure; ``"separate"``
    plots winner and loser rates in one panel per measure.
    """
    measures = sorted({r.measure.value for r in reports})
    with plt.rc_context(_RC):
        if kind == "total":
            fig, ax = plt.subplots()
            for name in measures:
                pts = sorted(
                    (r.window_months, r.total_rate) for r in reports if r.measure.value == name
                )
                color, marker = _MEASURE_STYLE[name]
                ax.plot(*zip(*pts), color=color, marker=marker, label=name)
            ax.axhline(0.5, color="gray", linestyle="--", linewidth=1)
            ax.set_xlabel("initial window (months)")
            ax.set_ylabel("total error rate")
            ax.set_title("LOOCV total error")
            ax.legend()
        else:
            fig, axes = plt.subplots(1, len(measures), figsize=(8.0 * len(measures) / 2, 4.0))
            axes = [axes] if len(measures) == 1 else list(axes)
            for ax, name in zip(axes, measures):
                for rate_name, color in (("winner_rate", WINNER_COLOR), ("loser_rate", LOSER_COLOR)):
                    pts = sorted(
                        (r.window_months, getattr(r, rate_name))
                        for r in reports
                        if r.measure.value == name
                    )
                    ax.plot(*zip(*pts), color=color, marker="o", label=rate_name.split("_")[0])
                ax.axhline(0.5, color="gray", linestyle="--", linewidth=1)
                ax.set_xlabel("initial window (months)")
                ax.set_ylabel("error rate")
                ax.set_title(name)
                ax.legend()
            fig.suptitle("LOOCV separate error")
            fig.tight_layout()
        return _save(fig, path)


def pair_histograms(histograms, path: Path) -> Path:
    """In-class and cross-class pair-distance histograms, one row per measure."""
    measures = sorted(histograms, key=lambda m: m.value)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(
            len(measures), 2, figsize=(10.0, 4.0 * len(measures)), squeeze=False
        )
        for row, measure in zip(axes, measures):
            hist = histograms[measure]
            centers = (hist.bin_edges[:-1] + hist.bin_edges[1:]) / 2.0
            width = (hist.bin_edges[1] - hist.bin_edges[0]) * 0.4
            in_ax, cross_ax = row
            in_ax.bar(
                centers - width / 2, hist.counts["ww"], width=width,
                color=WINNER_COLOR, alpha=0.7, label="winner/winner",
            )
            in_ax.bar(
                centers + width / 2, hist.counts["ll"], width=width,
                color=LOSER_COLOR, alpha=0.7, label="loser/loser",
            )
            in_ax.set_title(f"{measure.value}: in-class pairs")
            in_ax.set_xlabel(measure.value)
            in_ax.set_ylabel("pairs")
            in_ax.legend()
            cross_ax.bar(
                centers, hist.counts["wl"], width=width * 2,
                color="tab:purple", alpha=0.7, label="winner/loser",
            )
            cross_ax.set_title(f"{measure.value}: cross-class pairs")
            cross_ax.set_xlabel(measure.value)
            cross_ax.set_ylabel("pairs")
            cross_ax.legend()
        fig.tight_layout()
        return _save(fig, path)


def _split_by_label(embedding):
    groups = {}
    for idx, label in enumerate(embedding.labels):
        groups.setdefault(label, []).append(idx)
    return groups


def scatter_2d(embedding, path: Path) -> Path:
    """Companies on the elastic map's internal coordinates."""
    colors = {"winner": WINNER_COLOR, "loser": LOSER_COLOR, "middle": "gray"}
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.0, 6.0))
        for label, idx in sorted(_split_by_label(embedding).items()):
            ax.scatter(
                embedding.coords[idx, 0], embedding.coords[idx, 1],
                c=colors.get(label, "black"), label=label, s=40, edgecolors="black",
                linewidths=0.5,
            )
        ax.set_xlabel("internal u")
        ax.set_ylabel("internal v")
        ax.set_title("elastic map, internal coordinates")
        ax.legend()
        return _save(fig, path)


def scatter_3d(embedding, path: Path) -> Path:
    """Companies in the first three principal-component coordinates."""
    colors = {"winner": WINNER_COLOR, "loser": LOSER_COLOR, "middle": "gray"}
    with plt.rc_context(_RC):
        fig = plt.figure(figsize=(7.0, 6.0))
        ax = fig.add_subplot(projection="3d")
        for label, idx in sorted(_split_by_label(embedding).items()):
            ax.scatter(
                embedding.coords[idx, 0], embedding.coords[idx, 1], embedding.coords[idx, 2],
                c=colors.get(label, "black"), label=label, s=40,
            )
        ax.set_xlabel("PC1")
        ax.set_ylabel("PC2")
        ax.set_zlabel("PC3")
        ax.set_title("principal components")
        ax.legend()
        return _save(fig, path)
