"""Static SVG renderings.  matplotlib is imported on first use only."""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _save(fig, path) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", suffix=".svg")
    os.close(fd)
    try:
        fig.savefig(tmp, format="svg", metadata={"Date": None})
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.remove(tmp)


def line_plot(path, x, ys: dict[str, np.ndarray], xlabel: str, ylabel: str,
              hlines=(), marks=()) -> None:
    """One or more curves against a shared x; optional horizontal levels and marked x positions."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for label, y in ys.items():
        ax.plot(x, y, label=label, lw=1.2)
    for h in hlines:
        ax.axhline(h, color="grey", lw=0.8, ls="--")
    for xm in marks:
        ax.axvline(xm, color="grey", lw=0.6, ls=":")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ys) > 1:
        ax.legend()
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)


def triangle_contour(path, tx, ty, h, maxima=None, levels: int = 30) -> None:
    """Filled contours of the elevation over the embedded simplex, maxima marked."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 5))
    cs = ax.tricontourf(tx, ty, h, levels=levels)
    fig.colorbar(cs, ax=ax, label="h")
    ax.plot([0, 1, 0.5, 0], [0, 0, np.sqrt(3) / 2, 0], color="black", lw=0.8)
    if maxima is not None and np.any(maxima):
        ax.plot(np.asarray(tx)[maxima], np.asarray(ty)[maxima], "r^", ms=6)
    for label, (px, py) in zip(("1", "2", "3"), ((0, 0), (1, 0), (0.5, np.sqrt(3) / 2))):
        ax.annotate(label, (px, py), textcoords="offset points", xytext=(0, 6), ha="center")
    ax.set_aspect("equal")
    ax.axis("off")
    fig.tight_layout()
    _save(fig, path)
    plt.close(fig)
