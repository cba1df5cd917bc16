"""Static figures for the report bundle.

Everything renders through the Agg backend to SVG. The hash salt and the
date metadata are pinned so reruns produce the same files.
"""
from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.collections import LineCollection, PolyCollection  # noqa: E402

from .analytics import SHORT  # noqa: E402

CLASS_COLOURS = {"Low": "#2e7d32", "Moderate": "#f9a825", "High": "#c62828"}

RC = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.dpi": 100,
    "svg.hashsalt": "rseri",
    "svg.fonttype": "none",
}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg", bbox_inches="tight",
                metadata={"Date": None})
    plt.close(fig)
    return path


def risk_count_bar(counts, path: Path) -> Path:
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        ax.bar(range(len(counts)), counts, color="#455a64")
        for i, c in enumerate(counts):
            ax.text(i, c, str(c), ha="center", va="bottom", fontsize=8)
        ax.set_xticks(range(len(counts)))
        ax.set_xlabel("Concurrent risk factors")
        ax.set_ylabel("Charging stations")
        return _save(fig, path)


def correlation_heatmap(matrix, factors, path: Path) -> Path:
    labels = [SHORT.get(f, f) for f in factors]
    grid = [[math.nan if v is None else v for v in row] for row in matrix]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.6))
        im = ax.imshow(grid, cmap="coolwarm", vmin=-1, vmax=1)
        for i, row in enumerate(matrix):
            for j, v in enumerate(row):
                ax.text(j, i, "–" if v is None else f"{v:.2f}",
                        ha="center", va="center", fontsize=7)
        ax.set_xticks(range(len(labels)), labels, rotation=45, ha="right")
        ax.set_yticks(range(len(labels)), labels)
        fig.colorbar(im, ax=ax, label="Pearson r")
        return _save(fig, path)


def hexbin_map(cells, size: float, path: Path) -> Path:
    polys, values = [], []
    for c in cells:
        cx, cy = c["center"]
        polys.append([(cx + size * math.cos(math.radians(60 * i - 30)),
                       cy + size * math.sin(math.radians(60 * i - 30)))
                      for i in range(6)])
        values.append(c["mean_score"])
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 5))
        coll = PolyCollection(polys, array=values, cmap="YlOrRd",
                              edgecolors="white", linewidths=0.3)
        coll.set_clim(0, 1)
        ax.add_collection(coll)
        ax.autoscale_view()
        ax.set_aspect("equal")
        ax.set_xlabel("Easting (m)")
        ax.set_ylabel("Northing (m)")
        fig.colorbar(coll, ax=ax, label="Mean RSERI")
        return _save(fig, path)


def graph_classes(records, edges, path: Path) -> Path:
    pos = {r.id: (r.point.easting, r.point.northing) for r in records}
    segs = [(pos[s], pos[d]) for s, d, _ in edges if s in pos and d in pos]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 5))
        if segs:
            ax.add_collection(LineCollection(segs, colors="#90a4ae",
                                             linewidths=0.3, zorder=1))
        for cls, colour in CLASS_COLOURS.items():
            pts = [pos[r.id] for r in records if r.rseri_class == cls]
            if pts:
                ax.scatter([p[0] for p in pts], [p[1] for p in pts], s=6,
                           color=colour, label=cls, zorder=2)
        ax.set_aspect("equal")
        ax.legend(title="RSERI class", fontsize=7, frameon=False)
        ax.set_xlabel("Easting (m)")
        ax.set_ylabel("Northing (m)")
        return _save(fig, path)


def lad_top_bottom(lad: dict, path: Path, n: int = 5) -> Path:
    ranking = lad["ranking"]
    top = ranking[:n]
    bottom = [r for r in ranking[-n:] if r not in top]
    rows = top + bottom
    counts = [r["station_count"] for r in rows]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 0.35 * len(rows) + 1))
        cmap = plt.get_cmap("viridis")
        hi = max(counts) if counts else 1
        bars = ax.barh(range(len(rows)), [r["mean_rseri"] for r in rows],
                       color=[cmap(c / hi) for c in counts])
        ax.set_yticks(range(len(rows)), [r["lad_name"] for r in rows])
        ax.invert_yaxis()
        ax.set_xlim(0, 1)
        ax.set_xlabel("Mean RSERI")
        for b, c in zip(bars, counts):
            ax.text(b.get_width() + 0.01, b.get_y() + b.get_height() / 2,
                    f"n={c}", va="center", fontsize=7)
        return _save(fig, path)


def histogram_kde(hist: dict, kde: dict, class_edges, path: Path) -> Path:
    edges, counts = hist["edges"], hist["counts"]
    n = sum(counts)
    width = edges[1] - edges[0]
    bands = [0.0, class_edges[0], class_edges[1], 1.0]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        for (lo, hi), colour in zip(zip(bands[:-1], bands[1:]),
                                    CLASS_COLOURS.values()):
            ax.axvspan(lo, hi, color=colour, alpha=0.08, lw=0)
        # density scale so the KDE overlays directly
        ax.bar(edges[:-1], [c / (n * width) if n else 0 for c in counts],
               width=width, align="edge", color="#607d8b", alpha=0.8,
               edgecolor="white", linewidth=0.4)
        if kde["x"]:
            ax.plot(kde["x"], kde["y"], color="#bf360c", lw=1.2, label="KDE")
            ax.legend(frameon=False, fontsize=7)
        ax.set_xlim(0, 1)
        ax.set_xlabel("RSERI")
        ax.set_ylabel("Density")
        return _save(fig, path)


def render_all(doc: dict, records, edges, out_dir: Path) -> list:
    out_dir = Path(out_dir)
    made = [
        risk_count_bar(doc["risk_count_distribution"],
                       out_dir / "risk_count_distribution.svg"),
        correlation_heatmap(doc["correlation_matrix"], doc["factors"],
                            out_dir / "correlation_matrix.svg"),
        hexbin_map(doc["hexbin"]["cells"], doc["hexbin"]["cell_size_m"],
                   out_dir / "hexbin_rseri.svg"),
        graph_classes(records, edges, out_dir / "graph_classes.svg"),
        histogram_kde(doc["histogram"], doc["kde"], doc["class_edges"],
                      out_dir / "score_histogram_kde.svg"),
    ]
    if doc.get("lad"):
        made.append(lad_top_bottom(doc["lad"], out_dir / "lad_top_bottom.svg"))
    return made
