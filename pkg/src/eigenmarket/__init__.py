"""Random-matrix analysis of price-panel correlation structure.

Pipeline: price CSV -> aligned panel -> log returns -> correlation
matrix -> eigenvalue spectrum vs Marchenko-Pastur law -> inverse
participation ratios, eigenportfolios and a spectral price index ->
market-mode removal -> sector-like groups and highly correlated pairs.
A seeded synthetic generator with planted structure backs every claim
with an analytic oracle.
"""

import os as _os


def _cap_threads() -> None:
    # EIGENMARKET_THREADS caps BLAS/OpenMP parallelism; must run before
    # numpy is imported. 0 or unset leaves the libraries' defaults.
    raw = _os.environ.get("EIGENMARKET_THREADS", "").strip()
    try:
        cap = int(raw) if raw else 0
    except ValueError:
        return
    if cap > 0:
        for var in (
            "OMP_NUM_THREADS",
            "OPENBLAS_NUM_THREADS",
            "MKL_NUM_THREADS",
            "NUMEXPR_NUM_THREADS",
        ):
            _os.environ[var] = str(cap)


_cap_threads()

from .corrcore import (  # noqa: E402
    CoefficientDistribution,
    CorrelationMatrix,
    StandardizedPanel,
    coefficient_distribution,
    correlation_matrix,
    standardize,
)
from .eigenanalysis import (  # noqa: E402
    Eigenportfolio,
    IndexSeries,
    IPRSeries,
    LinearityTest,
    afpi,
    eigenportfolio,
    ipr,
    linearity_test,
)
from .errors import (  # noqa: E402
    DataDomainError,
    DegeneratePortfolioError,
    EigenmarketError,
    ExclusionWarning,
    NumericalError,
    PanelIntegrityError,
    PanelParseError,
    ParameterError,
    SyntheticSpecError,
    UndefinedFitError,
)
from .ingest import (  # noqa: E402
    ExclusionCalendar,
    FillFlag,
    InstrumentMeta,
    PricePanel,
    align_and_fill,
    apply_exclusions,
    load_exclusions,
    load_metadata,
    load_panel,
    write_panel_csv,
)
from .marketmode import (  # noqa: E402
    MarketModeRemoval,
    PairReport,
    Participant,
    SectorReport,
    pair_report,
    remove_market_mode,
    sector_report,
    significant_participants,
)
from .returns import (  # noqa: E402
    DescriptiveStats,
    ReturnPanel,
    compute_returns,
    descriptive_stats,
)
from .spectrum import (  # noqa: E402
    DeviationReport,
    MarchenkoPasturLaw,
    SpectralDecomposition,
    classify_deviations,
    decompose,
    empirical_density,
    mp_density,
    mp_law,
)
from .synth import (  # noqa: E402
    PairSpec,
    SectorSpec,
    SyntheticSpec,
    generate,
    implied_correlation,
    loading_for_correlation,
)

__version__ = "0.1.0"
