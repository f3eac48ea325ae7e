"""Log returns and per-instrument descriptive statistics.

Returns are daily log differences r_i(t) = ln P_i(t) - ln P_i(t-1).
Excluded dates are removed from the price panel before differencing, so
the first return after an excluded date spans the gap (the price ratio
across the removed day); the return series therefore still telescopes
to ln(P_last / P_first).

All moments use the population convention (divisor T), matching the
standardization that feeds the correlation matrix.  Kurtosis is raw
(Gaussian reference value 3), not excess.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date

import numpy as np

from .errors import DataDomainError, PanelIntegrityError, ParameterError
from .ingest import ExclusionCalendar, InstrumentMeta, PricePanel, apply_exclusions


@dataclass(frozen=True, eq=False)
class ReturnPanel:
    """N x T' matrix of log returns; dates are the later day of each pair."""

    instruments: tuple[InstrumentMeta, ...]
    dates: tuple[date, ...]
    returns: np.ndarray = field(repr=False)
    dt: int = 1

    def __post_init__(self):
        r = np.array(self.returns, dtype=float)
        if r.shape != (len(self.instruments), len(self.dates)):
            raise PanelIntegrityError(
                f"return matrix shape {r.shape} does not match "
                f"{len(self.instruments)} instruments x {len(self.dates)} dates"
            )
        if not np.isfinite(r).all():
            raise PanelIntegrityError("return matrix contains non-finite entries")
        r.flags.writeable = False
        object.__setattr__(self, "returns", r)

    @property
    def n(self) -> int:
        return len(self.instruments)

    @property
    def t(self) -> int:
        return len(self.dates)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(m.label for m in self.instruments)

    def mean_returns(self) -> np.ndarray:
        """Cross-sectional mean return <r>(t), one value per date."""
        return self.returns.mean(axis=0)


@dataclass(frozen=True, eq=False)
class DescriptiveStats:
    """Per-instrument summary statistics, aligned with ``instruments``.

    Rows with zero variance carry NaN skewness/kurtosis (undefined).
    """

    instruments: tuple[InstrumentMeta, ...]
    max: np.ndarray
    min: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    skewness: np.ndarray
    kurtosis: np.ndarray


def compute_returns(
    panel: PricePanel,
    cal: ExclusionCalendar | None = None,
    dt: int = 1,
) -> ReturnPanel:
    """Log returns of a filled panel, with excluded dates removed first.

    Only dt=1 is exercised against reference results; larger steps are
    accepted but diff across dt dates.
    """
    if dt < 1:
        raise ParameterError(f"dt must be >= 1, got {dt}")
    if panel.has_missing():
        raise PanelIntegrityError(
            "panel has unresolved missing cells; run align_and_fill first"
        )
    if cal is not None:
        panel = apply_exclusions(panel, cal)
    if panel.t <= dt:
        raise ParameterError(
            f"panel has {panel.t} dates after exclusions; need more than dt={dt}"
        )
    bad = np.argwhere(panel.prices <= 0)
    if bad.size:
        i, t = bad[0]
        raise DataDomainError(
            f"non-positive price {panel.prices[i, t]!r} for instrument "
            f"{panel.instruments[i].label} on {panel.dates[t]}"
        )
    logp = np.log(panel.prices)
    r = logp[:, dt:] - logp[:, :-dt]
    return ReturnPanel(panel.instruments, panel.dates[dt:], r, dt=dt)


def population_moments(x: np.ndarray) -> tuple[float, float, float, float]:
    """(mean, sd, skewness, raw kurtosis) with divisor-n central moments.

    Skewness and kurtosis are NaN for zero-variance input.
    """
    x = np.asarray(x, dtype=float)
    mu = float(x.mean())
    d = x - mu
    m2 = float((d**2).mean())
    if m2 == 0.0:
        return mu, 0.0, float("nan"), float("nan")
    m3 = float((d**3).mean())
    m4 = float((d**4).mean())
    return mu, float(np.sqrt(m2)), m3 / m2**1.5, m4 / m2**2


def descriptive_stats(rp: ReturnPanel) -> DescriptiveStats:
    """Max/Min/Mean/SD/Skewness/Kurtosis per instrument."""
    if rp.t < 4:
        raise ParameterError(
            f"need at least 4 observations per instrument, got {rp.t}"
        )
    n = rp.n
    mean = np.empty(n)
    sd = np.empty(n)
    skew = np.empty(n)
    kurt = np.empty(n)
    for i in range(n):
        mean[i], sd[i], skew[i], kurt[i] = population_moments(rp.returns[i])
    return DescriptiveStats(
        instruments=rp.instruments,
        max=rp.returns.max(axis=1),
        min=rp.returns.min(axis=1),
        mean=mean,
        sd=sd,
        skewness=skew,
        kurtosis=kurt,
    )
