"""Figure output for the report path.

Plots are a convenience companion to the CSV artifacts: every experiment
drops one or two PNGs next to its tables.  The CSVs remain the contract;
nothing reads these files back.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = ["save_lines", "save_heatmap"]


def save_lines(dest, series, xlabel="", ylabel="", title="", logx=False,
               logy=False, markers=False):
    """Render line series to a PNG file.

    Args:
        dest: output file path.
        series: iterable of ``(label, x, y)`` triples; ``label=None``
            suppresses the legend entry.
        logx, logy: use logarithmic axes.
        markers: draw point markers (useful for ladder plots).
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=110)
    any_label = False
    for label, x, y in series:
        style = "o-" if markers else "-"
        ax.plot(np.asarray(x, float), np.asarray(y, float), style,
                lw=1.3, ms=3.5, label=label)
        any_label = any_label or label is not None
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if any_label:
        ax.legend(fontsize=8, frameon=False)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(Path(dest))
    plt.close(fig)
    return str(dest)


def save_heatmap(dest, x, y, Z, xlabel="", ylabel="", title="", clabel=""):
    """Render a pcolormesh of Z (len(x) by len(y)) to a PNG file."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2), dpi=110)
    mesh = ax.pcolormesh(np.asarray(x, float), np.asarray(y, float),
                         np.asarray(Z, float).T, shading="auto")
    fig.colorbar(mesh, ax=ax, label=clabel)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(Path(dest))
    plt.close(fig)
    return str(dest)
