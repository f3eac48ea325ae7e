"""Eigendecomposition of the correlation matrix and the Marchenko-Pastur reference.

The random-matrix null is the correlation matrix of N uncorrelated
series of length T.  For aspect ratio Q = T/N > 1 its eigenvalue
density is supported on

    lambda_minmax = 1 + 1/Q -+ 2*sqrt(1/Q)

with density f(x) = Q/(2 pi) * sqrt((lambda_max - x)(x - lambda_min)) / x
inside the support and 0 outside.  Empirical eigenvalues outside the
support carry non-random structure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corrcore import CorrelationMatrix
from .errors import NumericalError, ParameterError
from .ingest import InstrumentMeta


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in descending order with sign-normalized orthonormal eigenvectors.

    ``vectors[:, k]`` is the eigenvector of ``eigenvalues[k]``; ranks are
    1-based everywhere in the public API (rank 1 = largest eigenvalue).
    Each eigenvector is flipped so its component sum is >= 0; sums that
    vanish at machine precision count as ties, resolved by making the
    largest-magnitude component positive.
    """

    instruments: tuple[InstrumentMeta, ...]
    eigenvalues: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)

    def __post_init__(self):
        w = np.array(self.eigenvalues, dtype=float)
        v = np.array(self.vectors, dtype=float)
        w.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "vectors", v)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(m.label for m in self.instruments)

    def vector(self, rank: int) -> np.ndarray:
        """Eigenvector of the rank-th largest eigenvalue (rank is 1-based)."""
        if not 1 <= rank <= self.n:
            raise ParameterError(f"rank must be in 1..{self.n}, got {rank}")
        return self.vectors[:, rank - 1]


@dataclass(frozen=True)
class MarchenkoPasturLaw:
    """Support bounds of the random-matrix eigenvalue density for aspect ratio Q."""

    q: float
    lambda_min: float
    lambda_max: float


@dataclass(frozen=True)
class DeviationReport:
    """Partition of eigenvalue ranks against the MP support (strict inequalities)."""

    below: tuple[int, ...]
    bulk: tuple[int, ...]
    above: tuple[int, ...]

    @property
    def n_below(self) -> int:
        return len(self.below)

    @property
    def n_bulk(self) -> int:
        return len(self.bulk)

    @property
    def n_above(self) -> int:
        return len(self.above)


@dataclass(frozen=True, eq=False)
class Histogram:
    """Density histogram: ``densities[i]`` covers ``bin_edges[i]..bin_edges[i+1]``."""

    bin_edges: np.ndarray
    densities: np.ndarray


def sign_tie_epsilon(n: int) -> float:
    """Component sums smaller than this count as zero (ties) when sign-normalizing."""
    return n * 4e-15


def _normalize_signs(v: np.ndarray) -> np.ndarray:
    tie = sign_tie_epsilon(v.shape[0])
    for k in range(v.shape[1]):
        s = float(v[:, k].sum())
        if s < -tie:
            v[:, k] = -v[:, k]
        elif abs(s) <= tie:
            lead = np.argmax(np.abs(v[:, k]))
            if v[lead, k] < 0.0:
                v[:, k] = -v[:, k]
    return v


def decompose(cm: CorrelationMatrix) -> SpectralDecomposition:
    """Full symmetric eigendecomposition C = U diag(lambda) U^T.

    Deterministic for identical input; eigenvalues come out descending.
    """
    try:
        w, v = np.linalg.eigh(cm.c)
    except np.linalg.LinAlgError as exc:
        asym = float(np.abs(cm.c - cm.c.T).max())
        diag_err = float(np.abs(np.diag(cm.c) - 1.0).max())
        raise NumericalError(
            f"eigensolver failed: {exc} "
            f"(max asymmetry {asym:.3e}, max diagonal deviation {diag_err:.3e})"
        ) from exc
    order = np.argsort(w)[::-1]
    w = w[order]
    v = _normalize_signs(v[:, order].copy())
    return SpectralDecomposition(cm.instruments, w, v)


def mp_law(n: int, t: int) -> MarchenkoPasturLaw:
    """Support bounds for n series of length t; requires Q = t/n > 1."""
    if n < 1:
        raise ParameterError(f"need at least 1 instrument, got {n}")
    if t <= n:
        raise ParameterError(
            f"series length t={t} must exceed instrument count n={n} (Q > 1)"
        )
    q = t / n
    root = np.sqrt(1.0 / q)
    return MarchenkoPasturLaw(
        q=q,
        lambda_min=1.0 + 1.0 / q - 2.0 * root,
        lambda_max=1.0 + 1.0 / q + 2.0 * root,
    )


def mp_density(law: MarchenkoPasturLaw, lam) -> float | np.ndarray:
    """Reference density at ``lam``; zero outside the support.

    Accepts scalars or arrays.
    """
    x = np.asarray(lam, dtype=float)
    inside = (x > law.lambda_min) & (x < law.lambda_max) & (x != 0.0)
    out = np.zeros_like(x)
    xi = x[inside]
    out[inside] = (
        law.q
        / (2.0 * np.pi)
        * np.sqrt((law.lambda_max - xi) * (xi - law.lambda_min))
        / xi
    )
    return float(out) if np.isscalar(lam) or out.ndim == 0 else out


def empirical_density(sd: SpectralDecomposition, bins: int) -> Histogram:
    """Normalized eigenvalue histogram (integrates to 1)."""
    if bins < 1:
        raise ParameterError(f"bins must be >= 1, got {bins}")
    densities, edges = np.histogram(sd.eigenvalues, bins=bins, density=True)
    return Histogram(bin_edges=edges, densities=densities)


def classify_deviations(
    sd: SpectralDecomposition, law: MarchenkoPasturLaw
) -> DeviationReport:
    """Partition ranks into below/bulk/above the MP support.

    Eigenvalues exactly at a bound count as bulk (strict inequalities).
    """
    below, bulk, above = [], [], []
    for rank, lam in enumerate(sd.eigenvalues, start=1):
        if lam < law.lambda_min:
            below.append(rank)
        elif lam > law.lambda_max:
            above.append(rank)
        else:
            bulk.append(rank)
    return DeviationReport(tuple(below), tuple(bulk), tuple(above))
