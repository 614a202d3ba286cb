"""Self-contained SVG rendering with reproducible output."""
from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

SQRT_PI = np.sqrt(np.pi)
PAULI_COLORS = ("#f2f2f2", "#d95f02", "#7570b3", "#1b9e77")


def _svg(fig) -> str:
    buf = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": "gkp-logical", "svg.fonttype": "path"}):
        fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
    return buf.getvalue()


def decoder_map_svg(table, size_px: int = 512) -> str:
    """Heatmap of a decoder table with the SB bin edges drawn as dashed lines."""
    dpi = 100
    fig, ax = plt.subplots(figsize=(size_px / dpi, size_px / dpi), dpi=dpi)
    half = (table.radius_cells + 0.5) * SQRT_PI / np.sqrt(2)
    ax.imshow(table.entries.T, origin="lower", extent=(-half, half, -half, half),
              cmap=ListedColormap(PAULI_COLORS), vmin=-0.5, vmax=3.5, interpolation="nearest")
    edges = (np.arange(-table.radius_cells, table.radius_cells) + 0.5) * SQRT_PI / np.sqrt(2)
    for e in edges:
        ax.axvline(e, color="k", lw=0.6, ls="--")
        ax.axhline(e, color="k", lw=0.6, ls="--")
    ax.set_xlim(-half, half)
    ax.set_ylim(-half, half)
    ax.set_xlabel("mu_q")
    ax.set_ylabel("mu_p")
    ax.set_title(f"decoder map ({table.provenance})")
    handles = [plt.Rectangle((0, 0), 1, 1, color=c) for c in PAULI_COLORS]
    ax.legend(handles, ["I", "X", "Y", "Z"], loc="upper right", fontsize=7)
    return _svg(fig)


def heatmap_svg(q, p, values, title: str = "", marks=None) -> str:
    """Diverging heatmap of a real raster; marks is an optional list of (q, p) crosses."""
    fig, ax = plt.subplots(figsize=(5.5, 5))
    v = np.asarray(values)
    lim = float(np.abs(v).max()) or 1.0
    im = ax.imshow(v.T, origin="lower", extent=(q[0], q[-1], p[0], p[-1]),
                   cmap="RdBu_r", vmin=-lim, vmax=lim, aspect="auto")
    fig.colorbar(im, ax=ax)
    for mq, mp in marks or ():
        ax.plot([mq], [mp], marker="x", color="w", ms=8, mew=2)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    ax.set_title(title)
    return _svg(fig)


def line_chart_svg(series: dict, xlabel: str, ylabel: str, title: str = "",
                   logy: bool = False, fits: dict | None = None) -> str:
    """Line chart; series maps a label to (x, y). fits adds dashed overlay curves."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label in sorted(series):
        x, y = series[label]
        ax.plot(x, y, marker="o", ms=3, label=label)
    for label in sorted(fits or {}):
        x, y = fits[label]
        ax.plot(x, y, ls="--", lw=1, label=f"{label} fit")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _svg(fig)
