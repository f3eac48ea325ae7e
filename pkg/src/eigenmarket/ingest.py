"""Loading, aligning and filling panels of daily price series.

The input contract is a column-per-instrument CSV: header
``date,<label1>,<label2>,...`` with ISO-8601 dates in the first column,
one numeric column per instrument, and empty fields marking missing
observations.  Lines starting with ``#`` before the header are treated
as comments (synthetic panels carry a generator comment).

Missing cells are resolved by :func:`align_and_fill`: cells before an
instrument's first observation take the first observed price, later
gaps take the most recent prior price.  Every cell carries a provenance
flag so downstream reports can tell observed from filled data.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field
from datetime import date
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    ExclusionWarning,
    PanelIntegrityError,
    PanelParseError,
)


class FillFlag(IntEnum):
    """Provenance of one price cell."""

    MISSING = 0
    OBSERVED = 1
    BACKFILLED_FROM_LISTING = 2
    FORWARD_FILLED = 3


@dataclass(frozen=True)
class InstrumentMeta:
    """Identity of one instrument in a panel.

    ``commodity`` is an optional user-supplied grouping tag; when empty,
    grouping falls back to ``name``.
    """

    label: int
    name: str
    exchange: str
    country: str
    listing_date: date
    commodity: str = ""

    @property
    def commodity_tag(self) -> str:
        return self.commodity or self.name


@dataclass(frozen=True, eq=False)
class PricePanel:
    """Aligned N x T matrix of daily price levels with per-cell provenance.

    Immutable after construction; all operations return new panels.
    """

    instruments: tuple[InstrumentMeta, ...]
    dates: tuple[date, ...]
    prices: np.ndarray = field(repr=False)
    fill_flags: np.ndarray = field(repr=False)

    def __post_init__(self):
        prices = np.array(self.prices, dtype=float)
        flags = np.array(self.fill_flags, dtype=np.uint8)
        n, t = len(self.instruments), len(self.dates)
        if prices.shape != (n, t):
            raise PanelIntegrityError(
                f"price matrix shape {prices.shape} does not match "
                f"{n} instruments x {t} dates"
            )
        if flags.shape != (n, t):
            raise PanelIntegrityError(
                f"fill-flag matrix shape {flags.shape} does not match "
                f"{n} instruments x {t} dates"
            )
        labels = [m.label for m in self.instruments]
        if len(set(labels)) != len(labels):
            dupes = sorted({x for x in labels if labels.count(x) > 1})
            raise PanelIntegrityError(f"duplicate instrument labels: {dupes}")
        for a, b in zip(self.dates, self.dates[1:]):
            if a >= b:
                raise PanelIntegrityError(
                    f"dates not strictly increasing at {a} -> {b}"
                )
        prices.flags.writeable = False
        flags.flags.writeable = False
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "fill_flags", flags)

    @property
    def n(self) -> int:
        return len(self.instruments)

    @property
    def t(self) -> int:
        return len(self.dates)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(m.label for m in self.instruments)

    def has_missing(self) -> bool:
        return bool((self.fill_flags == FillFlag.MISSING).any())


@dataclass(frozen=True)
class ExclusionCalendar:
    """Dates on which returns are discarded panel-wide."""

    dates: frozenset[date]

    def __len__(self) -> int:
        return len(self.dates)

    @classmethod
    def empty(cls) -> "ExclusionCalendar":
        return cls(frozenset())


def load_metadata(path: str | Path) -> dict[int, InstrumentMeta]:
    """Read the instrument sidecar CSV.

    Expected columns: ``label,name,exchange,country,listing_date`` with
    an optional trailing ``commodity`` column.
    """
    path = Path(path)
    out: dict[int, InstrumentMeta] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise PanelParseError(f"{path}: empty metadata file")
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 5:
                raise PanelParseError(
                    f"{path}:{lineno}: expected at least 5 columns, got {len(row)}"
                )
            try:
                label = int(row[0])
            except ValueError:
                raise PanelParseError(
                    f"{path}:{lineno}: instrument label {row[0]!r} is not an integer"
                ) from None
            if label <= 0:
                raise PanelParseError(
                    f"{path}:{lineno}: instrument label must be positive, got {label}"
                )
            try:
                listed = date.fromisoformat(row[4].strip())
            except ValueError:
                raise PanelParseError(
                    f"{path}:{lineno}: bad listing date {row[4]!r}"
                ) from None
            commodity = row[5].strip() if len(row) > 5 else ""
            if label in out:
                raise PanelIntegrityError(
                    f"{path}:{lineno}: duplicate metadata for label {label}"
                )
            out[label] = InstrumentMeta(
                label=label,
                name=row[1].strip(),
                exchange=row[2].strip(),
                country=row[3].strip(),
                listing_date=listed,
                commodity=commodity,
            )
    return out


def load_exclusions(path: str | Path) -> ExclusionCalendar:
    """Read an exclusion calendar: one ISO date per line, ``#`` comments allowed."""
    path = Path(path)
    dates: set[date] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        try:
            dates.add(date.fromisoformat(text))
        except ValueError:
            raise PanelParseError(
                f"{path}:{lineno}: bad exclusion date {text!r}"
            ) from None
    return ExclusionCalendar(frozenset(dates))


def load_panel(
    path: str | Path,
    metadata: Mapping[int, InstrumentMeta] | None = None,
) -> PricePanel:
    """Load a raw price panel from a column-per-instrument CSV.

    Cells are left missing where the file has empty fields; resolve them
    with :func:`align_and_fill`.  When ``metadata`` is given, each column
    label must be present in it; otherwise placeholder metadata is
    synthesized (listing date = first observed date of the column).
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh)]

    # strip leading comment lines (e.g. the synth generator stamp)
    body = [r for r in rows if not (r and r[0].lstrip().startswith("#"))]
    if not body:
        raise PanelParseError(f"{path}: no header row found")
    header, data_rows = body[0], body[1:]
    if len(header) < 2 or header[0].strip().lower() != "date":
        raise PanelParseError(
            f"{path}: header must be 'date,<label>,...', got {header[:3]!r}"
        )

    labels: list[int] = []
    for col, token in enumerate(header[1:], start=2):
        try:
            label = int(token)
        except ValueError:
            raise PanelParseError(
                f"{path}: header column {col} is not an integer label: {token!r}"
            ) from None
        if label <= 0:
            raise PanelParseError(
                f"{path}: header column {col}: label must be positive, got {label}"
            )
        labels.append(label)
    if len(set(labels)) != len(labels):
        raise PanelIntegrityError(f"{path}: duplicate instrument labels in header")

    parsed: list[tuple[date, list[float]]] = []
    seen: dict[date, int] = {}
    for lineno, row in enumerate(data_rows, start=2):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if len(row) != len(header):
            raise PanelParseError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
            )
        try:
            day = date.fromisoformat(row[0].strip())
        except ValueError:
            raise PanelParseError(
                f"{path}:{lineno}: malformed date {row[0]!r}"
            ) from None
        if day in seen:
            raise PanelIntegrityError(
                f"{path}:{lineno}: duplicate date {day} (first seen at line {seen[day]})"
            )
        seen[day] = lineno
        values: list[float] = []
        for label, cell in zip(labels, row[1:]):
            cell = cell.strip()
            if not cell:
                values.append(np.nan)
                continue
            try:
                values.append(float(cell))
            except ValueError:
                raise PanelParseError(
                    f"{path}:{lineno}: non-numeric value {cell!r} "
                    f"in column for instrument {label}"
                ) from None
        parsed.append((day, values))

    if not parsed:
        raise PanelParseError(f"{path}: no data rows")
    parsed.sort(key=lambda item: item[0])
    dates = tuple(day for day, _ in parsed)
    prices = np.array([vals for _, vals in parsed], dtype=float).T
    flags = np.where(np.isnan(prices), FillFlag.MISSING, FillFlag.OBSERVED).astype(
        np.uint8
    )

    instruments = []
    for i, label in enumerate(labels):
        if metadata is not None:
            meta = metadata.get(label)
            if meta is None:
                raise PanelIntegrityError(
                    f"{path}: no metadata for instrument label {label}"
                )
            if meta.listing_date > dates[-1]:
                raise PanelIntegrityError(
                    f"instrument {label}: listing date {meta.listing_date} "
                    f"is after the panel's last date {dates[-1]}"
                )
        else:
            observed = np.flatnonzero(flags[i] == FillFlag.OBSERVED)
            listed = dates[observed[0]] if observed.size else dates[0]
            meta = InstrumentMeta(
                label=label,
                name=f"instrument-{label}",
                exchange="",
                country="",
                listing_date=listed,
            )
        instruments.append(meta)

    return PricePanel(tuple(instruments), dates, prices, flags)


def align_and_fill(raw: PricePanel) -> PricePanel:
    """Resolve every missing cell of a raw panel.

    Cells dated before an instrument's first observation take the first
    observed price (flag ``BACKFILLED_FROM_LISTING``); later gaps take
    the most recent prior price, falling back day by day through
    consecutive gaps (flag ``FORWARD_FILLED``).  Idempotent: a panel
    without missing cells is returned unchanged.
    """
    if not raw.has_missing():
        return raw
    prices = np.array(raw.prices)
    flags = np.array(raw.fill_flags)
    for i in range(raw.n):
        observed = np.flatnonzero(flags[i] != FillFlag.MISSING)
        if observed.size == 0:
            raise PanelIntegrityError(
                f"instrument {raw.instruments[i].label} has no observed prices"
            )
        first = observed[0]
        if first > 0:
            prices[i, :first] = prices[i, first]
            flags[i, :first] = FillFlag.BACKFILLED_FROM_LISTING
        for t in range(first + 1, raw.t):
            if flags[i, t] == FillFlag.MISSING:
                prices[i, t] = prices[i, t - 1]
                flags[i, t] = FillFlag.FORWARD_FILLED
    return PricePanel(raw.instruments, raw.dates, prices, flags)


def apply_exclusions(panel: PricePanel, cal: ExclusionCalendar) -> PricePanel:
    """Drop the excluded dates' columns for all instruments.

    Exclusion is panel-wide.  Calendar dates absent from the panel are
    ignored with an :class:`ExclusionWarning` so callers can record them.
    """
    if not cal.dates:
        return panel
    panel_dates = set(panel.dates)
    for day in sorted(cal.dates - panel_dates):
        warnings.warn(
            f"exclusion date {day.isoformat()} not present in panel; ignored",
            ExclusionWarning,
            stacklevel=2,
        )
    keep = [t for t, day in enumerate(panel.dates) if day not in cal.dates]
    if len(keep) == panel.t:
        return panel
    return PricePanel(
        panel.instruments,
        tuple(panel.dates[t] for t in keep),
        panel.prices[:, keep],
        panel.fill_flags[:, keep],
    )


def fill_counts(panel: PricePanel) -> dict[str, int]:
    """Panel-wide tally of fill flags, keyed by flag name."""
    return {
        flag.name.lower(): int((panel.fill_flags == flag).sum()) for flag in FillFlag
    }


def write_panel_csv(
    panel: PricePanel,
    path: str | Path,
    header_comment: str | None = None,
) -> None:
    """Write a panel in the exact CSV format :func:`load_panel` reads.

    Prices are written with full (round-trip) precision: panel CSVs are
    data interchange, not report tables.  Missing cells become empty
    fields.
    """
    path = Path(path)
    lines: list[str] = []
    if header_comment:
        lines.extend(f"# {ln}" for ln in header_comment.splitlines())
    lines.append("date," + ",".join(str(m.label) for m in panel.instruments))
    missing = panel.fill_flags == FillFlag.MISSING
    for t, day in enumerate(panel.dates):
        cells = [
            "" if missing[i, t] else repr(float(panel.prices[i, t]))
            for i in range(panel.n)
        ]
        lines.append(day.isoformat() + "," + ",".join(cells))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_metadata_csv(
    instruments: Sequence[InstrumentMeta] | Iterable[InstrumentMeta],
    path: str | Path,
) -> None:
    """Write an instrument sidecar CSV that :func:`load_metadata` reads back."""
    path = Path(path)
    lines = ["label,name,exchange,country,listing_date,commodity"]
    for m in instruments:
        lines.append(
            f"{m.label},{m.name},{m.exchange},{m.country},"
            f"{m.listing_date.isoformat()},{m.commodity}"
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
