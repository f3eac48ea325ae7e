"""Self-contained, byte-reproducible SVG figures.

Figures are rendered with the Agg backend, a fixed svg.hashsalt, and no
date metadata, so identical inputs produce identical files; text is
stored as glyph paths (no external fonts).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "eigenmarket"
matplotlib.rcParams["svg.fonttype"] = "path"

import matplotlib.pyplot as plt
import numpy as np

from .spectrum import MarchenkoPasturLaw, mp_density

_FIGSIZE = (6.4, 4.2)


def _save(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def _steps(bin_edges: np.ndarray, densities: np.ndarray):
    x = np.repeat(bin_edges, 2)[1:-1]
    y = np.repeat(densities, 2)
    return x, y


def coefficient_histogram(
    bin_edges, densities, path, title="Correlation coefficient distribution"
) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    widths = np.diff(bin_edges)
    ax.bar(bin_edges[:-1], densities, width=widths, align="edge",
           color="#4878a8", edgecolor="white", linewidth=0.3)
    ax.set_xlabel("coefficient")
    ax.set_ylabel("density")
    ax.set_title(title)
    return _save(fig, path)


def spectrum_overlay(
    eigenvalues, law: MarchenkoPasturLaw, bins: int, path
) -> Path:
    """Empirical eigenvalue histogram against the MP reference curve."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.hist(eigenvalues, bins=bins, density=True, color="#4878a8",
            edgecolor="white", linewidth=0.3, label="empirical")
    grid = np.linspace(law.lambda_min, law.lambda_max, 400)
    ax.plot(grid, mp_density(law, grid), "r-", linewidth=1.5, label="MP law")
    ax.axvline(law.lambda_min, color="gray", linestyle=":", linewidth=0.8)
    ax.axvline(law.lambda_max, color="gray", linestyle=":", linewidth=0.8)
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("density")
    ax.set_title(f"Eigenvalue spectrum vs MP law (Q = {law.q:.6g})")
    ax.legend()
    return _save(fig, path)


def ipr_plot(eigenvalues, ipr_values, mean_ipr: float, path) -> Path:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.loglog(eigenvalues, ipr_values, "o", markersize=4, color="#4878a8")
    ax.axhline(mean_ipr, color="r", linestyle="--", linewidth=1.0,
               label=f"mean IPR = {mean_ipr:.3g}")
    ax.set_xlabel("eigenvalue")
    ax.set_ylabel("inverse participation ratio")
    ax.set_title("IPR by eigenvalue")
    ax.legend()
    return _save(fig, path)


def linearity_scatter(g, mean_r, fit, path) -> Path:
    """Mean return vs eigenportfolio return with the OLS line (G on x)."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(g, mean_r, ".", markersize=2.5, color="#4878a8", alpha=0.6)
    grid = np.array([np.min(g), np.max(g)])
    ax.plot(grid, fit.slope * grid + fit.intercept, "r-", linewidth=1.2,
            label=f"R^2 = {fit.r_squared:.3f}")
    ax.set_xlabel(f"G{fit.rank}")
    ax.set_ylabel("mean return")
    ax.set_title(f"Mean return vs eigenportfolio {fit.rank}")
    ax.legend()
    return _save(fig, path)


def index_overlay(dates, index_values, avg_prices, path) -> Path:
    """Spectral price index against the cross-sectional average price."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(dates, index_values, "-", color="#b04030", linewidth=1.0,
            label="spectral index")
    ax.plot(dates, avg_prices, "-", color="#4878a8", linewidth=1.0,
            label="average price")
    ax.set_xlabel("date")
    ax.set_ylabel("level")
    ax.set_title("Spectral price index vs average price")
    ax.legend()
    fig.autofmt_xdate()
    return _save(fig, path)


def distribution_overlay(before, after, path) -> Path:
    """Coefficient distributions before/after market-mode removal."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for dist, color, label in (
        (before, "#4878a8", "original"),
        (after, "#b04030", "market mode removed"),
    ):
        x, y = _steps(dist.bin_edges, dist.densities)
        ax.plot(x, y, "-", color=color, linewidth=1.2, label=label)
    ax.set_xlabel("coefficient")
    ax.set_ylabel("density")
    ax.set_title("Coefficient distribution before/after market-mode removal")
    ax.legend()
    return _save(fig, path)


def component_bars(
    labels, components, path, rank: int, threshold: float | None = None
) -> Path:
    """Bar chart of one eigenvector's components by instrument label."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    positions = np.arange(len(components))
    ax.bar(positions, components, color="#4878a8")
    if threshold is not None:
        ax.axhline(threshold, color="r", linestyle=":", linewidth=0.9)
        ax.axhline(-threshold, color="r", linestyle=":", linewidth=0.9)
    ax.axhline(0.0, color="black", linewidth=0.6)
    step = max(1, len(components) // 20)
    ax.set_xticks(positions[::step])
    ax.set_xticklabels([str(x) for x in labels[::step]], fontsize=6)
    ax.set_xlabel("instrument label")
    ax.set_ylabel("component")
    ax.set_title(f"Eigenvector {rank} components")
    return _save(fig, path)
