"""Minimal SVG figures for sweep results and feature matrices.

Figures are written with a fixed hash salt and no date metadata, so the same
data always produces the same file.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

matplotlib.rcParams["svg.hashsalt"] = "stochsense"
matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, path: Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def line_chart(path, series: dict[str, tuple[Sequence[float], Sequence[float]]], xlabel: str, ylabel: str,
               title: str = "", logx: bool = False, logy: bool = False, hline: float | None = None) -> Path:
    """One line per entry of ``series`` mapping label -> (x, y)."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in series.items():
        ax.plot(np.asarray(x, dtype=float), np.asarray(y, dtype=float), marker="o", ms=3, label=label)
    if hline is not None:
        ax.axhline(hline, color="grey", lw=0.8, ls="--")
    if logx:
        ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if series:
        ax.legend(fontsize=8)
    fig.tight_layout()
    return _save(fig, path)


def heatmap(path, matrix: np.ndarray, title: str = "", labels: Sequence[str] | None = None) -> Path:
    """Magnitude heat map of a complex matrix."""
    mag = np.abs(np.asarray(matrix))
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(mag, cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=ax, label="|F|")
    if labels is not None and len(labels) <= 16:
        ticks = np.arange(len(labels))
        ax.set_xticks(ticks, labels, rotation=90, fontsize=7)
        ax.set_yticks(ticks, labels, fontsize=7)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    return _save(fig, path)
