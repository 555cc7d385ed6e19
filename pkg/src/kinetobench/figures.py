"""Matplotlib rendering of atlases for the CLI report path.

PNG figures complement the deterministic CSV/JSON/SVG exports: same layers
(heatmap, iso-curves, boundary) drawn through matplotlib with a colorbar and
axis annotations for quick human inspection.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LinearSegmentedColormap

from kinetobench.atlas import Atlas

# matches the SVG heatmap convention: 0 -> red, 1 -> blue
_CMAP = LinearSegmentedColormap.from_list("invkappa", ["#ff0000", "#0000ff"])


def render_atlas_figure(atlas: Atlas, path: str | Path, dpi: int = 150) -> Path:
    grid = atlas.grid
    xmin, xmax, ymin, ymax = grid.domain
    fig, ax = plt.subplots(figsize=(7.0, 7.0 * (ymax - ymin) / (xmax - xmin) + 0.8))
    masked = np.ma.masked_where(~grid.mask.T, grid.values.T)
    im = ax.imshow(
        masked,
        origin="lower",
        extent=(xmin, xmax, ymin, ymax),
        cmap=_CMAP,
        vmin=0.0,
        vmax=1.0 if grid.field != "boundary_distance" else None,
        interpolation="nearest",
        aspect="equal",
    )
    for level in sorted(atlas.curves.polylines):
        for poly in atlas.curves.polylines[level]:
            ax.plot(poly[:, 0], poly[:, 1], color="black", linewidth=0.8)
    for poly in atlas.boundary:
        ax.plot(poly[:, 0], poly[:, 1], color="#333333", linewidth=1.6)
    fig.colorbar(im, ax=ax, label=grid.field)
    xlabel, ylabel = ("x", "y") if grid.space == "cartesian" else ("theta1 (rad)", "theta2 (rad)")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(f"{grid.field} mode {grid.mode} ({grid.space})")
    out = Path(path)
    fig.savefig(out, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return out
