"""Figures written next to the CLI's JSON/CSV output (Agg backend, PNG files)."""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import to_rgb  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from .grid_core import GridSpec  # noqa: E402

__all__ = [
    "plot_rearrangement",
    "plot_labels",
    "plot_margins",
    "plot_defects",
    "plot_batches",
]

_COLORS = {0: "#d9d9d9", 1: "#d7301f", 2: "#2b8cbe"}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_rearrangement(values, h, path, title="decreasing rearrangement"):
    """Cell values in grid order against the step function ``h``."""
    fig, (a0, a1) = plt.subplots(1, 2, figsize=(9, 3.2))
    v = [float(x) for x in values]
    a0.bar(range(len(v)), v, width=1.0, color="#6baed6", edgecolor="k", linewidth=0.3)
    a0.set_xlabel("cell index")
    a0.set_title("f")
    xs = [float(b) for b in h.breaks]
    ys = [float(y) for y in h.values]
    a1.hlines(ys, xs[:-1], xs[1:], color="#08519c")
    a1.set_xlim(0, xs[-1])
    a1.set_xlabel("t")
    a1.set_title(title)
    return _save(fig, path)


def _box(ax, region, level):
    k = max(level, region.level)
    sc = 1 << (k - region.level)
    c = [x * sc for x in region.corner]
    s = [x * sc for x in region.sides]
    unit = 1 << (k - level)
    if len(c) == 1:
        ax.add_patch(Rectangle((c[0] / unit - 0.5, -0.5), s[0] / unit, 1, fill=False, lw=2, ec="k"))
    else:
        ax.add_patch(Rectangle((c[1] / unit - 0.5, c[0] / unit - 0.5), s[1] / unit, s[0] / unit, fill=False, lw=2, ec="k"))


def plot_labels(spec: GridSpec, labels, path, region=None, title=""):
    """``G``/``E+``/``E-`` labels of a 1- or 2-dimensional grid, with an optional region outline."""
    if spec.dim > 2:
        return None
    n = spec.side_cells
    rgb = np.array([to_rgb(_COLORS[x]) for x in labels])
    img = rgb.reshape(1, n, 3) if spec.dim == 1 else rgb.reshape(n, n, 3)
    fig, ax = plt.subplots(figsize=(max(4, n / 3), 1.6 if spec.dim == 1 else max(4, n / 3)))
    ax.imshow(img, interpolation="nearest", origin="lower")
    if region is not None:
        _box(ax, region, spec.level)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.set_title(title or "red E+, blue E-, grey G")
    return _save(fig, path)


def plot_margins(reports, path, title="tail bound margins"):
    """Exact left sides and bound curves against alpha, one panel per report."""
    reports = list(reports)
    fig, axes = plt.subplots(1, len(reports), figsize=(4.2 * len(reports), 3.2), squeeze=False)
    for ax, rep in zip(axes[0], reports):
        a = [float(r.alpha) for r in rep.rows]
        ax.step(a, [float(r.lhs) for r in rep.rows], where="post", label="measure")
        ax.plot(a, [r.rhs for r in rep.rows], "--", label="bound")
        ax.set_yscale("symlog", linthresh=1e-3)
        ax.set_xlabel("alpha")
        ax.set_title(rep.label)
        ax.legend(fontsize=8)
    fig.suptitle(title)
    return _save(fig, path)


def plot_defects(defects, path, cell=None, title="equality defect at minimal cubes"):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    vals = [float(x) for x in defects]
    if vals:
        ax.hist(vals, bins=min(20, max(1, len(set(vals)))), color="#74c476", edgecolor="k")
    if cell is not None:
        ax.axvline(float(cell), color="r", ls="--", label="one cell")
        ax.legend()
    ax.set_xlabel("|F+ - F-| on the cube")
    ax.set_ylabel("count")
    ax.set_title(title)
    return _save(fig, path)


def plot_batches(batches, path, key="best", title="best score per batch"):
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ys = [float(Fraction(b[key])) if b.get(key) is not None else np.nan for b in batches]
    ax.plot(range(len(ys)), ys, "o-", ms=3)
    ax.set_xlabel("batch")
    ax.set_ylabel(key)
    ax.set_title(title)
    return _save(fig, path)
