"""Static SVG line charts and heatmaps with reproducible bytes."""

from __future__ import annotations

import io

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

__all__ = ["line_chart_svg", "heatmap_svg"]

# fixed salt and no timestamp so that identical inputs give identical files
_RC = {"svg.hashsalt": "r2spill", "svg.fonttype": "path", "font.size": 8}


def _render(fig) -> str:
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None, "Creator": "r2spill"})
    plt.close(fig)
    return buf.getvalue()


def line_chart_svg(dates, series: dict, title: str = "", ylabel: str = "") -> str:
    """One line per entry of ``series`` (name -> values aligned with ``dates``)."""
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(8, 3.5))
        x = np.asarray(dates, dtype="datetime64[D]")
        for name, values in series.items():
            ax.plot(x, np.asarray(values, dtype=float), lw=0.9, label=str(name))
        ax.axhline(0.0, color="0.6", lw=0.5)
        ax.set_title(title)
        ax.set_ylabel(ylabel)
        if len(series) > 1:
            ax.legend(ncol=min(len(series), 5), fontsize=6, frameon=False)
        fig.autofmt_xdate()
        fig.tight_layout()
        return _render(fig)


def heatmap_svg(matrix, labels, mask=None, title: str = "", fmt: str = "{:.2f}",
                cmap: str = "RdBu_r", symmetric: bool = True) -> str:
    """Annotated heatmap; cells where ``mask`` is true are crossed out."""
    M = np.asarray(matrix, dtype=float)
    K = M.shape[0]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(0.6 * K + 2, 0.6 * K + 1.5))
        if symmetric:
            lim = float(np.nanmax(np.abs(M))) or 1.0
            im = ax.imshow(M, cmap=cmap, vmin=-lim, vmax=lim)
        else:
            im = ax.imshow(M, cmap=cmap)
        ax.set_xticks(range(K), labels, rotation=90)
        ax.set_yticks(range(K), labels)
        for i in range(K):
            for j in range(K):
                ax.text(j, i, fmt.format(M[i, j]), ha="center", va="center", fontsize=6)
                if mask is not None and mask[i, j]:
                    ax.plot([j - 0.4, j + 0.4], [i - 0.4, i + 0.4], color="k", lw=0.6)
                    ax.plot([j - 0.4, j + 0.4], [i + 0.4, i - 0.4], color="k", lw=0.6)
        fig.colorbar(im, ax=ax, shrink=0.8)
        ax.set_title(title)
        fig.tight_layout()
        return _render(fig)
