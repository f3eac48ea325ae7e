"""Market-mode removal and the structure of the residual spectrum.

Each instrument's return row is regressed on a common market factor
(the rank-1 eigenportfolio return):

    r_i(t) = alpha_i + beta_i * M(t) + eps_i(t)

The residuals are standardized and correlated again; the residual
spectrum's large deviating eigenvectors concentrate on instrument
groups (sectors), and its smallest eigenvectors pick out the most
correlated instrument pairs as opposite-sign component pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corrcore import CorrelationMatrix, correlation_matrix, standardize
from .errors import DataDomainError, PanelIntegrityError, ParameterError
from .ingest import InstrumentMeta
from .returns import ReturnPanel
from .spectrum import SpectralDecomposition, decompose, mp_law

# residual variance at or below this fraction of the return variance
# counts as a perfect fit (the row is excluded from the residual matrix)
PERFECT_FIT_VARIANCE_RATIO = 1e-18


@dataclass(frozen=True, eq=False)
class MarketModeRemoval:
    """Per-instrument regression results and the residual correlation spectrum.

    ``residual_panel`` keeps all N rows; instruments whose fit is
    (numerically) perfect are listed in ``excluded`` and left out of
    ``residual_corr`` / ``residual_spectrum``.
    """

    market_factor: np.ndarray = field(repr=False)
    alphas: np.ndarray
    betas: np.ndarray
    residual_panel: ReturnPanel
    residual_corr: CorrelationMatrix
    residual_spectrum: SpectralDecomposition
    excluded: tuple[InstrumentMeta, ...]


@dataclass(frozen=True)
class Participant:
    """One significant eigenvector component."""

    label: int
    component: float

    @property
    def sign(self) -> str:
        return "+" if self.component >= 0 else "-"


@dataclass(frozen=True)
class AnnotatedParticipant:
    """Participant enriched with instrument metadata."""

    label: int
    component: float
    name: str
    exchange: str
    country: str
    commodity: str

    @property
    def sign(self) -> str:
        return "+" if self.component >= 0 else "-"


@dataclass(frozen=True)
class SectorEntry:
    """Significant participants of one residual eigenvector."""

    rank: int
    eigenvalue: float
    participants: tuple[AnnotatedParticipant, ...]
    positive_labels: tuple[int, ...]
    negative_labels: tuple[int, ...]
    exchange_groups: dict[str, tuple[int, ...]]
    commodity_groups: dict[str, tuple[int, ...]]


@dataclass(frozen=True)
class SectorReport:
    threshold_factor: float
    entries: tuple[SectorEntry, ...]
    warnings: tuple[str, ...]


@dataclass(frozen=True)
class PairEntry:
    """Top-2 components of one small residual eigenvector.

    ``coefficient`` is the entry of the ORIGINAL (pre-removal)
    correlation matrix for the two labels.  ``dominant`` is False when
    the top-2 squared-component share is below 0.5, i.e. no pair stands
    out of the vector.
    """

    rank: int
    eigenvalue: float
    label_a: int
    label_b: int
    component_a: float
    component_b: float
    coefficient: float
    top2_share: float
    dominant: bool

    @property
    def sign_a(self) -> str:
        return "+" if self.component_a >= 0 else "-"

    @property
    def sign_b(self) -> str:
        return "+" if self.component_b >= 0 else "-"


@dataclass(frozen=True)
class PairReport:
    entries: tuple[PairEntry, ...]


def remove_market_mode(rp: ReturnPanel, market: np.ndarray) -> MarketModeRemoval:
    """Regress every return row on the market factor and respectrum the residuals.

    OLS guarantees <eps_i> = 0 and <M eps_i> = 0 per instrument.
    """
    m = np.asarray(market, dtype=float).ravel()
    if m.shape[0] != rp.t:
        raise ParameterError(
            f"market factor length {m.shape[0]} does not match {rp.t} return dates"
        )
    m_mean = m.mean()
    dm = m - m_mean
    denom = float((dm**2).sum())
    if denom == 0.0:
        raise ParameterError("market factor has zero variance")

    r = rp.returns
    r_means = r.mean(axis=1)
    betas = (r - r_means[:, None]) @ dm / denom
    alphas = r_means - betas * m_mean
    eps = r - alphas[:, None] - betas[:, None] * m

    var_r = r.var(axis=1)
    var_e = eps.var(axis=1)
    perfect = (var_r == 0.0) | (var_e <= PERFECT_FIT_VARIANCE_RATIO * var_r)
    included = np.flatnonzero(~perfect)
    excluded = tuple(rp.instruments[i] for i in np.flatnonzero(perfect))
    if included.size == 0:
        raise DataDomainError(
            "every instrument fits the market factor perfectly; "
            "no residual correlation matrix exists"
        )

    residual_panel = ReturnPanel(rp.instruments, rp.dates, eps)
    kept = ReturnPanel(
        tuple(rp.instruments[i] for i in included), rp.dates, eps[included]
    )
    residual_corr = correlation_matrix(standardize(kept))
    return MarketModeRemoval(
        market_factor=m,
        alphas=alphas,
        betas=betas,
        residual_panel=residual_panel,
        residual_corr=residual_corr,
        residual_spectrum=decompose(residual_corr),
        excluded=excluded,
    )


def significant_participants(
    sd: SpectralDecomposition, k: int, threshold_factor: float = 1.5
) -> list[Participant]:
    """Components of eigenvector k with |u_l| >= threshold_factor / sqrt(N).

    Sorted by descending magnitude.  The threshold is a multiple of the
    uniform level 1/sqrt(N); the default 1.5 separates concentrated
    components from uniform-level ones.
    """
    if threshold_factor <= 0:
        raise ParameterError(
            f"threshold factor must be positive, got {threshold_factor}"
        )
    u = sd.vector(k)
    threshold = threshold_factor / np.sqrt(sd.n)
    idx = np.flatnonzero(np.abs(u) >= threshold)
    idx = idx[np.argsort(-np.abs(u[idx]), kind="stable")]
    return [
        Participant(label=sd.instruments[i].label, component=float(u[i])) for i in idx
    ]


def _group(participants, key) -> dict[str, tuple[int, ...]]:
    groups: dict[str, list[int]] = {}
    for p in participants:
        groups.setdefault(key(p), []).append(p.label)
    return {tag: tuple(labels) for tag, labels in sorted(groups.items())}


def sector_report(
    mr: MarketModeRemoval,
    meta: list[InstrumentMeta] | tuple[InstrumentMeta, ...],
    ranks: list[int] | tuple[int, ...],
    threshold_factor: float = 1.5,
) -> SectorReport:
    """Significant participants of the requested residual eigenvectors.

    Ranks whose eigenvalue is not above the MP upper bound are still
    processed but flagged in ``warnings`` (attention normally belongs to
    the deviating ones).
    """
    by_label = {m.label: m for m in meta}
    sd = mr.residual_spectrum
    law = mp_law(sd.n, mr.residual_panel.t)
    entries = []
    notes = []
    for k in ranks:
        lam = float(sd.eigenvalues[k - 1])
        if lam <= law.lambda_max:
            notes.append(
                f"rank {k} eigenvalue {lam:.6g} is not above the MP upper bound "
                f"{law.lambda_max:.6g}"
            )
        annotated = []
        for p in significant_participants(sd, k, threshold_factor):
            m = by_label.get(p.label)
            if m is None:
                raise PanelIntegrityError(f"no metadata for instrument {p.label}")
            annotated.append(
                AnnotatedParticipant(
                    label=p.label,
                    component=p.component,
                    name=m.name,
                    exchange=m.exchange,
                    country=m.country,
                    commodity=m.commodity_tag,
                )
            )
        entries.append(
            SectorEntry(
                rank=k,
                eigenvalue=lam,
                participants=tuple(annotated),
                positive_labels=tuple(p.label for p in annotated if p.component >= 0),
                negative_labels=tuple(p.label for p in annotated if p.component < 0),
                exchange_groups=_group(annotated, lambda p: p.exchange),
                commodity_groups=_group(annotated, lambda p: p.commodity),
            )
        )
    return SectorReport(
        threshold_factor=threshold_factor,
        entries=tuple(entries),
        warnings=tuple(notes),
    )


def pair_report(
    mr: MarketModeRemoval, original: CorrelationMatrix, count: int
) -> PairReport:
    """Top-2 components of the ``count`` smallest residual eigenvectors.

    Entries are ordered smallest eigenvalue first, so the first entry is
    the candidate for the most correlated pair of the original matrix.
    """
    sd = mr.residual_spectrum
    if not 1 <= count <= sd.n:
        raise ParameterError(f"count must be in 1..{sd.n}, got {count}")
    entries = []
    for j in range(count):
        rank = sd.n - j
        u = sd.vector(rank)
        order = np.argsort(-np.abs(u), kind="stable")
        a, b = int(order[0]), int(order[1])
        label_a = sd.instruments[a].label
        label_b = sd.instruments[b].label
        share = float(u[a] ** 2 + u[b] ** 2)
        entries.append(
            PairEntry(
                rank=rank,
                eigenvalue=float(sd.eigenvalues[rank - 1]),
                label_a=label_a,
                label_b=label_b,
                component_a=float(u[a]),
                component_b=float(u[b]),
                coefficient=original.coefficient(label_a, label_b),
                top2_share=share,
                dominant=share >= 0.5,
            )
        )
    return PairReport(entries=tuple(entries))
