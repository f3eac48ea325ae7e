"""Inverse participation ratios, eigenportfolios, and the spectral price index.

The inverse participation ratio of eigenvector u^k is sum_l (u_l^k)^4:
1/N for a uniform vector, 1 for a one-hot vector, so its reciprocal is
the effective number of contributing components.

An eigenportfolio projects the raw (not standardized) return rows onto
an eigenvector and divides by the component sum, so a uniform
eigenvector reproduces the equal-weight mean return.  The spectral
price index compounds the rank-1 eigenportfolio return from a base
price level.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import (
    DegeneratePortfolioError,
    PanelIntegrityError,
    ParameterError,
    UndefinedFitError,
)
from .returns import ReturnPanel
from .spectrum import SpectralDecomposition

# |sum of components| below this multiple of sqrt(N) makes the
# normalizer division ill-conditioned; near-balanced +/- eigenvectors
# (typical for the smallest eigenvalues) hit this case.
DEGENERATE_NORMALIZER_FACTOR = 1e-6


@dataclass(frozen=True, eq=False)
class IPRSeries:
    """I^k per eigenvector, aligned to eigenvalue rank, plus the mean <I>."""

    values: np.ndarray
    mean_ipr: float


@dataclass(frozen=True, eq=False)
class Eigenportfolio:
    """Return series of the portfolio weighted by one eigenvector."""

    rank: int
    weights: np.ndarray = field(repr=False)
    dates: tuple[date, ...]
    returns: np.ndarray = field(repr=False)
    normalizer: float


@dataclass(frozen=True)
class LinearityTest:
    """OLS fit of the mean return on an eigenportfolio return."""

    rank: int
    slope: float
    intercept: float
    r_squared: float


@dataclass(frozen=True, eq=False)
class IndexSeries:
    """Compounded index: value(t) = base * exp(sum of G through t).

    ``base`` is the index value at time zero (before the first return
    date); ``values`` covers the return dates.
    """

    dates: tuple[date, ...]
    values: np.ndarray = field(repr=False)
    base: float


def ipr(sd: SpectralDecomposition) -> IPRSeries:
    """Inverse participation ratio of every eigenvector."""
    values = (sd.vectors**4).sum(axis=0)
    return IPRSeries(values=values, mean_ipr=float(values.mean()))


def eigenportfolio(
    sd: SpectralDecomposition, rp: ReturnPanel, k: int
) -> Eigenportfolio:
    """Projection of the raw returns onto eigenvector k, over its component sum.

    Raises :class:`DegeneratePortfolioError` when |sum u_j| falls below
    1e-6 * sqrt(N): the normalized projection is undefined there.
    """
    if not 1 <= k <= sd.n:
        raise ParameterError(f"rank must be in 1..{sd.n}, got {k}")
    if sd.labels != rp.labels:
        raise PanelIntegrityError(
            "decomposition and return panel cover different instruments"
        )
    u = sd.vector(k)
    normalizer = float(u.sum())
    threshold = DEGENERATE_NORMALIZER_FACTOR * np.sqrt(sd.n)
    if abs(normalizer) < threshold:
        raise DegeneratePortfolioError(
            f"eigenportfolio {k} is degenerate: |component sum| = "
            f"{abs(normalizer):.3e} < {threshold:.3e}"
        )
    g = (u @ rp.returns) / normalizer
    return Eigenportfolio(
        rank=k, weights=u, dates=rp.dates, returns=g, normalizer=normalizer
    )


def linearity_test(ep: Eigenportfolio, rp: ReturnPanel) -> LinearityTest:
    """OLS of the cross-sectional mean return on G^k (G on the x-axis)."""
    x = ep.returns
    y = rp.mean_returns()
    if x.shape != y.shape:
        raise PanelIntegrityError(
            "eigenportfolio and return panel cover different date ranges"
        )
    if len(x) < 3:
        raise ParameterError(f"need at least 3 time points, got {len(x)}")
    xm, ym = x.mean(), y.mean()
    var_x = float(((x - xm) ** 2).mean())
    if var_x == 0.0:
        raise UndefinedFitError(
            f"eigenportfolio {ep.rank} return has zero variance; fit undefined"
        )
    slope = float(((x - xm) * (y - ym)).mean()) / var_x
    intercept = float(ym - slope * xm)
    ss_tot = float(((y - ym) ** 2).sum())
    ss_res = float(((y - slope * x - intercept) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return LinearityTest(
        rank=ep.rank,
        slope=slope,
        intercept=intercept,
        r_squared=float(min(max(r2, 0.0), 1.0)),
    )


def afpi(ep: Eigenportfolio, base_price: float) -> IndexSeries:
    """Compound the rank-1 eigenportfolio return from a base price level."""
    if base_price <= 0:
        raise ParameterError(f"base price must be positive, got {base_price}")
    values = base_price * np.exp(np.cumsum(ep.returns))
    return IndexSeries(dates=ep.dates, values=values, base=float(base_price))
