"""Standardized returns, the correlation matrix, and its coefficient distribution."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataDomainError, PanelIntegrityError, ParameterError
from .ingest import InstrumentMeta
from .returns import ReturnPanel, population_moments


@dataclass(frozen=True, eq=False)
class StandardizedPanel:
    """Rows of g_i(t) = (r_i(t) - <r_i>) / sigma_i; each row has mean 0, variance 1."""

    instruments: tuple[InstrumentMeta, ...]
    g: np.ndarray = field(repr=False)

    def __post_init__(self):
        g = np.array(self.g, dtype=float)
        g.flags.writeable = False
        object.__setattr__(self, "g", g)

    @property
    def n(self) -> int:
        return len(self.instruments)

    @property
    def t(self) -> int:
        return self.g.shape[1]


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """Symmetric N x N Pearson matrix with an exact unit diagonal."""

    instruments: tuple[InstrumentMeta, ...]
    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        n = len(self.instruments)
        if c.shape != (n, n):
            raise PanelIntegrityError(
                f"correlation matrix shape {c.shape} does not match {n} instruments"
            )
        c.flags.writeable = False
        object.__setattr__(self, "c", c)

    @property
    def n(self) -> int:
        return len(self.instruments)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(m.label for m in self.instruments)

    def coefficient(self, label_a: int, label_b: int) -> float:
        """Entry lookup by instrument labels (no recomputation)."""
        labels = self.labels
        try:
            i, j = labels.index(label_a), labels.index(label_b)
        except ValueError as exc:
            raise PanelIntegrityError(
                f"label not in correlation matrix: {exc}"
            ) from None
        return float(self.c[i, j])

    def offdiagonal(self) -> np.ndarray:
        """Upper-triangle coefficients, each pair counted once."""
        iu = np.triu_indices(self.n, k=1)
        return self.c[iu]


@dataclass(frozen=True, eq=False)
class CoefficientDistribution:
    """Density histogram of the N(N-1)/2 off-diagonal coefficients."""

    bin_edges: np.ndarray
    densities: np.ndarray
    mean_c: float
    skewness_c: float
    kurtosis_c: float


def standardize(rp: ReturnPanel) -> StandardizedPanel:
    """Center and scale each return row to mean 0 and population variance 1."""
    mu = rp.returns.mean(axis=1, keepdims=True)
    centered = rp.returns - mu
    sigma = np.sqrt((centered**2).mean(axis=1, keepdims=True))
    zero = np.flatnonzero(sigma.ravel() == 0.0)
    if zero.size:
        label = rp.instruments[zero[0]].label
        raise DataDomainError(
            f"instrument {label} has zero return variance; "
            "a constant series cannot be standardized"
        )
    return StandardizedPanel(rp.instruments, centered / sigma)


def correlation_matrix(sp: StandardizedPanel) -> CorrelationMatrix:
    """C with c_ij = <g_i(t) g_j(t)>, symmetrized, diagonal forced to 1.

    Symmetrization by averaging and the forced diagonal are numerical
    hygiene for the spectral code, which assumes an exactly symmetric
    input.
    """
    c = sp.g @ sp.g.T / sp.t
    c = (c + c.T) / 2.0
    np.fill_diagonal(c, 1.0)
    return CorrelationMatrix(sp.instruments, c)


def coefficient_distribution(
    cm: CorrelationMatrix, bins: int = 50
) -> CoefficientDistribution:
    """Histogram of the off-diagonal coefficients over uniform bins on [-1, 1]."""
    if bins < 1:
        raise ParameterError(f"bins must be >= 1, got {bins}")
    if cm.n < 2:
        raise ParameterError("coefficient distribution needs at least 2 instruments")
    coeffs = cm.offdiagonal()
    densities, edges = np.histogram(coeffs, bins=bins, range=(-1.0, 1.0), density=True)
    mean_c, _, skew_c, kurt_c = population_moments(coeffs)
    return CoefficientDistribution(
        bin_edges=edges,
        densities=densities,
        mean_c=mean_c,
        skewness_c=skew_c,
        kurtosis_c=kurt_c,
    )
