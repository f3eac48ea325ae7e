"""Seeded synthetic price panels with planted statistical structure.

The return model is a linear factor construction:

    r_i(t) = beta_market * F(t)
           + sum_s loading_s * sign_si * S_s(t) * 1[i in sector s]
           + gamma_p * sign_pi * P_p(t) * 1[i in pair p]
           + noise_i(t)

with all factors standard normal and independent, so the population
correlation matrix is available in closed form as an oracle
(:func:`implied_correlation`).  Prices compound the returns from a
common base level, and dates are consecutive calendar days, so the
emitted panel round-trips through the ingest CSV format.

``t`` is the number of RETURN observations; the generated price panel
has ``t + 1`` rows so that differencing reproduces exactly ``t``
returns (the aspect ratio Q = t/n is then exact).

Generation draws from numpy's PCG64 generator in a fixed order (market
factor, sector factors, pair factors, noise), so a seed pins the panel
bit for bit across platforms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from .corrcore import CorrelationMatrix
from .errors import SyntheticSpecError
from .ingest import FillFlag, InstrumentMeta, PricePanel

GENERATOR_NAME = "numpy-PCG64"
_START_DATE = date(2000, 1, 3)


@dataclass(frozen=True)
class SectorSpec:
    """A planted instrument group sharing one factor.

    ``loading`` applies to every member; ``signs`` optionally flips
    individual members (+1/-1, aligned with ``members``) to plant
    mixed-sign blocks.
    """

    members: tuple[int, ...]
    loading: float
    signs: tuple[int, ...] | None = None

    def member_signs(self) -> tuple[int, ...]:
        return self.signs if self.signs is not None else (1,) * len(self.members)


@dataclass(frozen=True)
class PairSpec:
    """A planted two-instrument coupling with a target total correlation."""

    label_a: int
    label_b: int
    correlation: float


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic panel.  ``t`` counts returns, not prices."""

    n: int
    t: int
    seed: int
    market_beta: float = 0.0
    sectors: tuple[SectorSpec, ...] = ()
    pairs: tuple[PairSpec, ...] = ()
    noise_sd: float = 0.01
    base_price: float = 100.0
    noise_df: int | None = None  # Student-t noise for robustness sweeps only


def loading_for_correlation(
    rho: float, market_beta: float = 0.0, noise_sd: float = 0.01
) -> float:
    """Group loading that yields intra-group correlation ``rho``.

    Members of a group with this loading (on top of the market factor
    and noise) correlate pairwise at exactly ``rho``:
    loading^2 = (rho * (beta^2 + sd^2) - beta^2) / (1 - rho).
    """
    if not 0.0 <= rho < 1.0:
        raise SyntheticSpecError(f"target correlation must be in [0, 1), got {rho}")
    v0 = market_beta**2 + noise_sd**2
    num = rho * v0 - market_beta**2
    if num < 0.0:
        floor = market_beta**2 / v0
        raise SyntheticSpecError(
            f"target correlation {rho} is below the market-induced floor {floor:.6g}"
        )
    return float(np.sqrt(num / (1.0 - rho)))


def _pair_coupling(spec: SyntheticSpec, pair: PairSpec) -> tuple[float, int]:
    """(loading, relative sign of member b) realizing the pair's correlation."""
    rho = pair.correlation
    v0 = spec.market_beta**2 + spec.noise_sd**2
    floor = spec.market_beta**2 / v0
    if rho >= floor:
        gamma_sq = (rho * v0 - spec.market_beta**2) / (1.0 - rho)
        sign = 1
    else:
        gamma_sq = (spec.market_beta**2 - rho * v0) / (1.0 + rho)
        sign = -1
    return float(np.sqrt(gamma_sq)), sign


def _validate(spec: SyntheticSpec) -> None:
    if spec.n < 2:
        raise SyntheticSpecError(f"need at least 2 instruments, got n={spec.n}")
    if spec.t <= spec.n:
        raise SyntheticSpecError(
            f"series length t={spec.t} must exceed n={spec.n} (Q > 1)"
        )
    if spec.noise_sd <= 0:
        raise SyntheticSpecError(f"noise_sd must be positive, got {spec.noise_sd}")
    if spec.base_price <= 0:
        raise SyntheticSpecError(f"base_price must be positive, got {spec.base_price}")
    if spec.noise_df is not None and spec.noise_df <= 2:
        raise SyntheticSpecError(
            f"Student-t noise needs df > 2 for finite variance, got {spec.noise_df}"
        )
    valid = range(1, spec.n + 1)
    taken: set[int] = set()
    for s, sector in enumerate(spec.sectors):
        if len(sector.members) < 2:
            raise SyntheticSpecError(f"sector {s} needs at least 2 members")
        if sector.signs is not None and len(sector.signs) != len(sector.members):
            raise SyntheticSpecError(
                f"sector {s}: signs length does not match members"
            )
        if sector.signs is not None and any(x not in (-1, 1) for x in sector.signs):
            raise SyntheticSpecError(f"sector {s}: signs must be +1 or -1")
        for label in sector.members:
            if label not in valid:
                raise SyntheticSpecError(
                    f"sector {s}: label {label} outside 1..{spec.n}"
                )
            if label in taken:
                raise SyntheticSpecError(
                    f"label {label} appears in more than one sector/pair"
                )
            taken.add(label)
    for p, pair in enumerate(spec.pairs):
        if not -1.0 < pair.correlation < 1.0:
            raise SyntheticSpecError(
                f"pair {p}: correlation must be in (-1, 1), got {pair.correlation}"
            )
        if pair.label_a == pair.label_b:
            raise SyntheticSpecError(f"pair {p}: labels must differ")
        for label in (pair.label_a, pair.label_b):
            if label not in valid:
                raise SyntheticSpecError(f"pair {p}: label {label} outside 1..{spec.n}")
            if label in taken:
                raise SyntheticSpecError(
                    f"label {label} appears in more than one sector/pair"
                )
            taken.add(label)


def _instruments(spec: SyntheticSpec) -> tuple[InstrumentMeta, ...]:
    return tuple(
        InstrumentMeta(
            label=i + 1,
            name=f"synthetic-{i + 1:02d}",
            exchange="SYN",
            country="XX",
            listing_date=_START_DATE,
        )
        for i in range(spec.n)
    )


def implied_correlation(spec: SyntheticSpec) -> CorrelationMatrix:
    """Exact population correlation matrix of the factor construction.

    Serves as the analytic oracle for sampling-error tests; the factor
    model guarantees positive semidefiniteness by construction.
    """
    _validate(spec)
    n = spec.n
    cov = np.full((n, n), spec.market_beta**2)
    cov[np.diag_indices(n)] += spec.noise_sd**2
    for sector in spec.sectors:
        idx = np.array([label - 1 for label in sector.members])
        signs = np.array(sector.member_signs(), dtype=float)
        cov[np.ix_(idx, idx)] += sector.loading**2 * np.outer(signs, signs)
    for pair in spec.pairs:
        gamma, sign = _pair_coupling(spec, pair)
        a, b = pair.label_a - 1, pair.label_b - 1
        cov[a, a] += gamma**2
        cov[b, b] += gamma**2
        cov[a, b] += sign * gamma**2
        cov[b, a] += sign * gamma**2
    sd = np.sqrt(np.diag(cov))
    corr = cov / np.outer(sd, sd)
    corr = (corr + corr.T) / 2.0
    np.fill_diagonal(corr, 1.0)
    return CorrelationMatrix(_instruments(spec), corr)


def generate(spec: SyntheticSpec) -> PricePanel:
    """Draw one panel: ``t`` factor-model returns compounded into ``t + 1`` prices."""
    _validate(spec)
    rng = np.random.default_rng(spec.seed)
    n, t = spec.n, spec.t

    r = np.zeros((n, t))
    market = rng.standard_normal(t)
    if spec.market_beta != 0.0:
        r += spec.market_beta * market
    for sector in spec.sectors:
        factor = rng.standard_normal(t)
        for label, sign in zip(sector.members, sector.member_signs()):
            r[label - 1] += sign * sector.loading * factor
    for pair in spec.pairs:
        factor = rng.standard_normal(t)
        gamma, sign = _pair_coupling(spec, pair)
        r[pair.label_a - 1] += gamma * factor
        r[pair.label_b - 1] += sign * gamma * factor
    if spec.noise_df is None:
        r += spec.noise_sd * rng.standard_normal((n, t))
    else:
        scale = np.sqrt((spec.noise_df - 2.0) / spec.noise_df)
        r += spec.noise_sd * scale * rng.standard_t(spec.noise_df, size=(n, t))

    prices = np.empty((n, t + 1))
    prices[:, 0] = spec.base_price
    prices[:, 1:] = spec.base_price * np.exp(np.cumsum(r, axis=1))
    dates = tuple(_START_DATE + timedelta(days=i) for i in range(t + 1))
    flags = np.full((n, t + 1), FillFlag.OBSERVED, dtype=np.uint8)
    return PricePanel(_instruments(spec), dates, prices, flags)


def generator_stamp(spec: SyntheticSpec) -> str:
    """Header comment identifying the generator, written into emitted CSVs."""
    return f"generator: {GENERATOR_NAME} seed={spec.seed} n={spec.n} t={spec.t}"


def spec_from_json(path: str | Path) -> SyntheticSpec:
    """Parse a JSON file whose keys mirror the SyntheticSpec field names."""
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(raw, dict):
        raise SyntheticSpecError(f"{path}: expected a JSON object")
    known = {
        "n",
        "t",
        "seed",
        "market_beta",
        "sectors",
        "pairs",
        "noise_sd",
        "base_price",
        "noise_df",
    }
    unknown = set(raw) - known
    if unknown:
        raise SyntheticSpecError(f"{path}: unknown spec fields {sorted(unknown)}")
    for key in ("n", "t", "seed"):
        if key not in raw:
            raise SyntheticSpecError(f"{path}: missing required field {key!r}")
    try:
        sectors = tuple(
            SectorSpec(
                members=tuple(int(x) for x in s["members"]),
                loading=float(s["loading"]),
                signs=tuple(int(x) for x in s["signs"]) if "signs" in s else None,
            )
            for s in raw.get("sectors", [])
        )
        pairs = tuple(
            PairSpec(
                label_a=int(p["label_a"]),
                label_b=int(p["label_b"]),
                correlation=float(p["correlation"]),
            )
            for p in raw.get("pairs", [])
        )
        spec = SyntheticSpec(
            n=int(raw["n"]),
            t=int(raw["t"]),
            seed=int(raw["seed"]),
            market_beta=float(raw.get("market_beta", 0.0)),
            sectors=sectors,
            pairs=pairs,
            noise_sd=float(raw.get("noise_sd", 0.01)),
            base_price=float(raw.get("base_price", 100.0)),
            noise_df=int(raw["noise_df"]) if raw.get("noise_df") is not None else None,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SyntheticSpecError(f"{path}: malformed spec: {exc}") from exc
    _validate(spec)
    return spec
