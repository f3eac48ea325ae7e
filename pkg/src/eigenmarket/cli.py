"""Command-line front end: per-stage subcommands plus an end-to-end report.

Subcommands: ingest, stats, corr, spectrum, ipr, portfolios, index,
remove-market, sectors, pairs, synth, report.  All numeric artifacts
are written with 6 significant digits unless --full-precision is given;
re-running any command with identical inputs produces byte-identical
files.

Exit codes: 0 success, 2 input/parameter problems, 3 data/domain
problems, 1 unexpected failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import corrcore, eigenanalysis, ingest, marketmode, plots, returns, spectrum
from . import synth as synthmod
from .errors import (
    EigenmarketError,
    PanelParseError,
    ParameterError,
    SyntheticSpecError,
)
from .output import write_csv, write_json

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3

DEFAULT_PORTFOLIO_RANKS = (1, 2, 3, 4, 5)
DEFAULT_SECTOR_RANKS = (2, 3, 4, 5)


@dataclass(frozen=True)
class RunConfig:
    """Resolved inputs and knobs for one run."""

    input: Path | None
    meta: Path | None
    exclusions: Path | None
    out: Path
    bins: int = 50
    threshold: float = 1.5
    portfolio_ranks: tuple[int, ...] = DEFAULT_PORTFOLIO_RANKS
    sector_ranks: tuple[int, ...] = DEFAULT_SECTOR_RANKS
    pair_count: int = 6
    base: float | None = None  # None = auto (mean first-date price)
    seed: int | None = None
    full_precision: bool = False


def parse_ranks(text: str) -> tuple[int, ...]:
    """Parse '1,2,3' / '2-5' / mixes of both into a rank tuple."""
    out: list[int] = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            if "-" in token:
                lo, hi = token.split("-", 1)
                ranks = list(range(int(lo), int(hi) + 1))
                if not ranks:
                    raise ValueError("empty range")
            else:
                ranks = [int(token)]
        except ValueError:
            raise ParameterError(f"bad rank token {token!r} in --ranks") from None
        out.extend(ranks)
    deduped = tuple(dict.fromkeys(out))
    if not deduped or any(k < 1 for k in deduped):
        raise ParameterError(f"ranks must be positive integers, got {text!r}")
    return deduped


def _require_file(path: Path | None, what: str) -> Path:
    if path is None:
        raise ParameterError(f"--{what} is required for this command")
    if not path.is_file():
        raise FileNotFoundError(f"{what} file not found: {path}")
    return path


def _load_inputs(cfg: RunConfig):
    """Load, fill and (optionally) attach sidecar metadata and exclusions."""
    prices_path = _require_file(cfg.input, "input")
    metadata = None
    if cfg.meta is not None:
        meta_path = _require_file(cfg.meta, "meta")
        metadata = ingest.load_metadata(meta_path)
    cal = ingest.ExclusionCalendar.empty()
    if cfg.exclusions is not None:
        cal = ingest.load_exclusions(_require_file(cfg.exclusions, "exclusions"))
    panel = ingest.align_and_fill(ingest.load_panel(prices_path, metadata))
    return panel, cal


def _excluded_panel(panel, cal, notes: list[str]):
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        panel_ex = ingest.apply_exclusions(panel, cal)
    notes.extend(str(w.message) for w in caught)
    return panel_ex


# ---------------------------------------------------------------------------
# artifact emitters (shared between subcommands and the full report)
# ---------------------------------------------------------------------------


def _emit_ingest(panel, notes, outdir: Path, full: bool) -> list[Path]:
    panel_path = outdir / "panel_filled.csv"
    ingest.write_panel_csv(panel, panel_path)
    report = {
        "instruments": panel.n,
        "dates": panel.t,
        "fill_counts": ingest.fill_counts(panel),
        "warnings": list(notes),
    }
    return [panel_path, write_json(outdir / "fill_report.json", report, full)]


def _emit_stats(rp, outdir: Path, full: bool) -> list[Path]:
    stats = returns.descriptive_stats(rp)
    rows = []
    for i, m in enumerate(stats.instruments):
        rows.append(
            [
                m.label,
                m.name,
                m.exchange,
                m.country,
                m.listing_date.isoformat(),
                float(stats.max[i]),
                float(stats.min[i]),
                float(stats.mean[i] * 1e4),
                float(stats.sd[i]),
                float(stats.skewness[i]),
                float(stats.kurtosis[i]),
            ]
        )
    header = [
        "label", "name", "exchange", "country", "listing_date",
        "max", "min", "mean_e4", "sd", "skewness", "kurtosis",
    ]
    return [write_csv(outdir / "stats.csv", header, rows, full)]


def _emit_corr(cm, dist, outdir: Path, full: bool) -> list[Path]:
    labels = cm.labels
    matrix_rows = [
        [labels[i]] + [float(x) for x in cm.c[i]] for i in range(cm.n)
    ]
    paths = [
        write_csv(
            outdir / "correlation_matrix.csv",
            ["label"] + [str(x) for x in labels],
            matrix_rows,
            full,
        ),
        write_csv(
            outdir / "coefficient_distribution.csv",
            ["bin_left", "bin_right", "density"],
            [
                [float(dist.bin_edges[i]), float(dist.bin_edges[i + 1]), float(d)]
                for i, d in enumerate(dist.densities)
            ],
            full,
        ),
        write_json(
            outdir / "coefficient_summary.json",
            {
                "mean_c": dist.mean_c,
                "skewness_c": dist.skewness_c,
                "kurtosis_c": dist.kurtosis_c,
            },
            full,
        ),
        plots.coefficient_histogram(
            dist.bin_edges, dist.densities, outdir / "coefficient_distribution.svg"
        ),
    ]
    return paths


def _classes(sd, law) -> list[str]:
    report = spectrum.classify_deviations(sd, law)
    cls = {}
    for rank in report.below:
        cls[rank] = "below"
    for rank in report.bulk:
        cls[rank] = "bulk"
    for rank in report.above:
        cls[rank] = "above"
    return [cls[rank] for rank in range(1, sd.n + 1)]


def _emit_spectrum(sd, law, bins: int, outdir: Path, full: bool) -> list[Path]:
    classes = _classes(sd, law)
    rows = [
        [rank, float(sd.eigenvalues[rank - 1]), classes[rank - 1]]
        for rank in range(1, sd.n + 1)
    ]
    return [
        write_csv(outdir / "eigenvalues.csv", ["rank", "lambda", "class"], rows, full),
        write_json(
            outdir / "mp_law.json",
            {"Q": law.q, "lambda_min": law.lambda_min, "lambda_max": law.lambda_max},
            full,
        ),
        plots.spectrum_overlay(
            sd.eigenvalues, law, bins, outdir / "spectrum_overlay.svg"
        ),
    ]


def _emit_ipr(sd, outdir: Path, full: bool) -> list[Path]:
    series = eigenanalysis.ipr(sd)
    rows = [
        [rank, float(sd.eigenvalues[rank - 1]), float(series.values[rank - 1])]
        for rank in range(1, sd.n + 1)
    ]
    return [
        write_csv(outdir / "ipr.csv", ["rank", "lambda", "ipr"], rows, full),
        write_json(outdir / "ipr_summary.json", {"mean_ipr": series.mean_ipr}, full),
        plots.ipr_plot(
            sd.eigenvalues, series.values, series.mean_ipr, outdir / "ipr.svg"
        ),
    ]


def _emit_portfolios(sd, rp, ranks, outdir: Path, full: bool) -> list[Path]:
    paths = []
    fits = []
    mean_r = rp.mean_returns()
    for k in ranks:
        ep = eigenanalysis.eigenportfolio(sd, rp, k)
        fit = eigenanalysis.linearity_test(ep, rp)
        fits.append(
            {
                "rank": k,
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
            }
        )
        paths.append(
            write_csv(
                outdir / f"portfolio_G{k}.csv",
                ["date", f"G_{k}"],
                [
                    [d.isoformat(), float(g)]
                    for d, g in zip(ep.dates, ep.returns)
                ],
                full,
            )
        )
        paths.append(
            plots.linearity_scatter(
                ep.returns, mean_r, fit, outdir / f"portfolio_scatter_{k}.svg"
            )
        )
    paths.append(write_json(outdir / "linearity.json", fits, full))
    return paths


def _emit_index(sd, rp, panel_ex, base, outdir: Path, full: bool) -> list[Path]:
    ep1 = eigenanalysis.eigenportfolio(sd, rp, 1)
    if base is None:
        base = float(panel_ex.prices[:, 0].mean())
    series = eigenanalysis.afpi(ep1, base)
    rows = [[panel_ex.dates[0].isoformat(), float(series.base)]]
    rows += [
        [d.isoformat(), float(v)] for d, v in zip(series.dates, series.values)
    ]
    avg_prices = panel_ex.prices.mean(axis=0)
    index_values = np.concatenate([[series.base], series.values])
    return [
        write_csv(outdir / "index.csv", ["date", "afpi"], rows, full),
        plots.index_overlay(
            list(panel_ex.dates), index_values, avg_prices,
            outdir / "index_overlay.svg",
        ),
    ]


def _emit_removal(mr, dist_before, bins: int, outdir: Path, full: bool) -> list[Path]:
    sd = mr.residual_spectrum
    law = spectrum.mp_law(sd.n, mr.residual_panel.t)
    classes = _classes(sd, law)
    rows = [
        [rank, float(sd.eigenvalues[rank - 1]), classes[rank - 1]]
        for rank in range(1, sd.n + 1)
    ]
    dist_after = corrcore.coefficient_distribution(mr.residual_corr, bins)
    summary = {
        "excluded": [m.label for m in mr.excluded],
        "mean_offdiagonal_before": dist_before.mean_c,
        "mean_offdiagonal_after": dist_after.mean_c,
    }
    return [
        write_csv(
            outdir / "residual_eigenvalues.csv",
            ["rank", "lambda", "class"],
            rows,
            full,
        ),
        write_json(outdir / "removal_summary.json", summary, full),
        plots.distribution_overlay(
            dist_before, dist_after, outdir / "removal_overlay.svg"
        ),
    ]


def _emit_sectors(mr, meta, ranks, threshold, outdir: Path, full: bool) -> list[Path]:
    report = marketmode.sector_report(mr, meta, ranks, threshold)
    rows = []
    for entry in report.entries:
        ordered = [p for p in entry.participants if p.component >= 0] + [
            p for p in entry.participants if p.component < 0
        ]
        for p in ordered:
            rows.append(
                [
                    entry.rank, p.sign, p.label, p.name, p.exchange,
                    p.country, float(p.component),
                ]
            )
    header = ["eigenvector", "sign", "label", "name", "exchange", "country", "component"]
    return [
        write_csv(outdir / "sectors.csv", header, rows, full),
        write_json(outdir / "sector_warnings.json", list(report.warnings), full),
    ]


def _emit_pairs(mr, original, count, outdir: Path, full: bool) -> list[Path]:
    report = marketmode.pair_report(mr, original, count)
    rows = [
        [e.rank, e.label_a, e.label_b, e.sign_a, e.sign_b, float(e.coefficient)]
        for e in report.entries
    ]
    header = ["eigenvector_rank", "label_a", "label_b", "sign_a", "sign_b", "c_ij"]
    paths = [write_csv(outdir / "pairs.csv", header, rows, full)]
    summary = [
        {
            "eigenvector_rank": e.rank,
            "eigenvalue": e.eigenvalue,
            "label_a": e.label_a,
            "label_b": e.label_b,
            "coefficient": e.coefficient,
            "top2_share": e.top2_share,
            "dominant": e.dominant,
        }
        for e in report.entries
    ]
    paths.append(write_json(outdir / "pairs_summary.json", summary, full))
    sd = mr.residual_spectrum
    threshold = 1.0 / np.sqrt(sd.n)
    for j, entry in enumerate(report.entries, start=1):
        paths.append(
            plots.component_bars(
                list(sd.labels),
                sd.vector(entry.rank),
                outdir / f"pair_vector_smallest_{j}.svg",
                rank=entry.rank,
                threshold=threshold,
            )
        )
    return paths


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _prepare(cfg: RunConfig):
    """Shared pipeline prefix: filled panel, exclusions, returns."""
    notes: list[str] = []
    panel, cal = _load_inputs(cfg)
    panel_ex = _excluded_panel(panel, cal, notes)
    rp = returns.compute_returns(panel_ex)
    return panel_ex, rp, notes


def _outdir(cfg: RunConfig) -> Path:
    cfg.out.mkdir(parents=True, exist_ok=True)
    return cfg.out


def cmd_ingest(cfg: RunConfig) -> list[Path]:
    notes: list[str] = []
    panel, cal = _load_inputs(cfg)
    panel_ex = _excluded_panel(panel, cal, notes)
    return _emit_ingest(panel_ex, notes, _outdir(cfg), cfg.full_precision)


def cmd_stats(cfg: RunConfig) -> list[Path]:
    _, rp, _ = _prepare(cfg)
    return _emit_stats(rp, _outdir(cfg), cfg.full_precision)


def cmd_corr(cfg: RunConfig) -> list[Path]:
    _, rp, _ = _prepare(cfg)
    cm = corrcore.correlation_matrix(corrcore.standardize(rp))
    dist = corrcore.coefficient_distribution(cm, cfg.bins)
    return _emit_corr(cm, dist, _outdir(cfg), cfg.full_precision)


def cmd_spectrum(cfg: RunConfig) -> list[Path]:
    _, rp, _ = _prepare(cfg)
    cm = corrcore.correlation_matrix(corrcore.standardize(rp))
    sd = spectrum.decompose(cm)
    law = spectrum.mp_law(rp.n, rp.t)
    return _emit_spectrum(sd, law, cfg.bins, _outdir(cfg), cfg.full_precision)


def cmd_ipr(cfg: RunConfig) -> list[Path]:
    _, rp, _ = _prepare(cfg)
    sd = spectrum.decompose(corrcore.correlation_matrix(corrcore.standardize(rp)))
    return _emit_ipr(sd, _outdir(cfg), cfg.full_precision)


def cmd_portfolios(cfg: RunConfig) -> list[Path]:
    panel_ex, rp, _ = _prepare(cfg)
    sd = spectrum.decompose(corrcore.correlation_matrix(corrcore.standardize(rp)))
    outdir = _outdir(cfg)
    paths = _emit_portfolios(sd, rp, cfg.portfolio_ranks, outdir, cfg.full_precision)
    paths += _emit_index(sd, rp, panel_ex, cfg.base, outdir, cfg.full_precision)
    return paths


def cmd_index(cfg: RunConfig) -> list[Path]:
    panel_ex, rp, _ = _prepare(cfg)
    sd = spectrum.decompose(corrcore.correlation_matrix(corrcore.standardize(rp)))
    return _emit_index(
        sd, rp, panel_ex, cfg.base, _outdir(cfg), cfg.full_precision
    )


def _removal(rp):
    cm = corrcore.correlation_matrix(corrcore.standardize(rp))
    sd = spectrum.decompose(cm)
    market = eigenanalysis.eigenportfolio(sd, rp, 1).returns
    return cm, marketmode.remove_market_mode(rp, market)


def cmd_remove_market(cfg: RunConfig) -> list[Path]:
    _, rp, _ = _prepare(cfg)
    cm, mr = _removal(rp)
    dist_before = corrcore.coefficient_distribution(cm, cfg.bins)
    return _emit_removal(mr, dist_before, cfg.bins, _outdir(cfg), cfg.full_precision)


def cmd_sectors(cfg: RunConfig) -> list[Path]:
    _, rp, _ = _prepare(cfg)
    _, mr = _removal(rp)
    return _emit_sectors(
        mr, list(rp.instruments), cfg.sector_ranks, cfg.threshold,
        _outdir(cfg), cfg.full_precision,
    )


def cmd_pairs(cfg: RunConfig) -> list[Path]:
    _, rp, _ = _prepare(cfg)
    cm, mr = _removal(rp)
    return _emit_pairs(mr, cm, cfg.pair_count, _outdir(cfg), cfg.full_precision)


def cmd_synth(spec_path: Path, out_path: Path, seed: int | None = None) -> list[Path]:
    spec = synthmod.spec_from_json(_require_file(spec_path, "spec"))
    if seed is not None:
        spec = replace(spec, seed=seed)
    panel = synthmod.generate(spec)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    ingest.write_panel_csv(panel, out_path, synthmod.generator_stamp(spec))
    return [out_path]


def run_full_report(cfg: RunConfig) -> dict:
    """Run every stage and write a manifest of all artifacts.

    Input files are validated before anything is written, so a missing
    file leaves no manifest.  A failure mid-pipeline writes the manifest
    with the failing module recorded and keeps partial artifacts.
    """
    notes: list[str] = []
    panel, cal = _load_inputs(cfg)
    outdir = _outdir(cfg)
    full = cfg.full_precision
    manifest: dict = {
        "config": {
            "input": str(cfg.input),
            "meta": str(cfg.meta) if cfg.meta else None,
            "exclusions": str(cfg.exclusions) if cfg.exclusions else None,
            "out": str(cfg.out),
            "bins": cfg.bins,
            "threshold": cfg.threshold,
            "portfolio_ranks": list(cfg.portfolio_ranks),
            "sector_ranks": list(cfg.sector_ranks),
            "pair_count": cfg.pair_count,
            "base": cfg.base if cfg.base is not None else "auto",
            "full_precision": cfg.full_precision,
        },
        "artifacts": {},
        "warnings": [],
    }
    arts = manifest["artifacts"]
    module = "ingest"
    try:
        panel_ex = _excluded_panel(panel, cal, notes)

        module = "returns"
        rp = returns.compute_returns(panel_ex)
        arts["stats_table"] = _paths(_emit_stats(rp, outdir, full))

        module = "corrcore"
        cm = corrcore.correlation_matrix(corrcore.standardize(rp))
        dist = corrcore.coefficient_distribution(cm, cfg.bins)
        arts["coefficient_distribution"] = _paths(_emit_corr(cm, dist, outdir, full))

        module = "spectrum"
        sd = spectrum.decompose(cm)
        law = spectrum.mp_law(rp.n, rp.t)
        arts["spectrum"] = _paths(_emit_spectrum(sd, law, cfg.bins, outdir, full))

        module = "eigenanalysis"
        arts["ipr"] = _paths(_emit_ipr(sd, outdir, full))
        portfolio_paths = _emit_portfolios(
            sd, rp, cfg.portfolio_ranks, outdir, full
        )
        portfolio_paths += _emit_index(sd, rp, panel_ex, cfg.base, outdir, full)
        arts["eigenportfolios"] = _paths(portfolio_paths)

        module = "marketmode"
        mr = marketmode.remove_market_mode(
            rp, eigenanalysis.eigenportfolio(sd, rp, 1).returns
        )
        arts["market_mode_removal"] = _paths(
            _emit_removal(mr, dist, cfg.bins, outdir, full)
        )
        arts["sectors"] = _paths(
            _emit_sectors(
                mr, list(rp.instruments), cfg.sector_ranks, cfg.threshold,
                outdir, full,
            )
        )
        arts["pairs"] = _paths(_emit_pairs(mr, cm, cfg.pair_count, outdir, full))
    except EigenmarketError as exc:
        manifest["warnings"] = notes
        manifest["error"] = {"module": module, "message": str(exc)}
        write_json(outdir / "manifest.json", manifest, full)
        raise
    manifest["warnings"] = notes
    write_json(outdir / "manifest.json", manifest, full)
    return manifest


def _paths(paths: list[Path]) -> list[str]:
    return [p.name for p in paths]


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", type=Path, help="price panel CSV")
    common.add_argument("--meta", type=Path, help="instrument metadata sidecar CSV")
    common.add_argument("--exclusions", type=Path, help="exclusion calendar file")
    common.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory (file path for synth)")
    common.add_argument("--bins", type=int, default=50, help="histogram bin count")
    common.add_argument("--threshold", type=float, default=1.5,
                        help="significance threshold factor (units of 1/sqrt(N))")
    common.add_argument("--ranks", type=str, default=None,
                        help="eigenvector ranks, e.g. '1,2,3' or '2-5'")
    common.add_argument("--count", type=int, default=6,
                        help="number of smallest eigenvectors for pairs")
    common.add_argument("--base", type=str, default="auto",
                        help="index base price, or 'auto' for the mean first-date price")
    common.add_argument("--seed", type=int, default=None,
                        help="override the generator seed from the synth spec")
    common.add_argument("--full-precision", action="store_true",
                        help="write round-trip-exact numbers instead of 6 significant digits")

    parser = argparse.ArgumentParser(
        prog="eigenmarket",
        description="Random-matrix analysis of price-panel correlation structure",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, func in [
        ("ingest", cmd_ingest),
        ("stats", cmd_stats),
        ("corr", cmd_corr),
        ("spectrum", cmd_spectrum),
        ("ipr", cmd_ipr),
        ("portfolios", cmd_portfolios),
        ("index", cmd_index),
        ("remove-market", cmd_remove_market),
        ("sectors", cmd_sectors),
        ("pairs", cmd_pairs),
    ]:
        p = sub.add_parser(name, parents=[common])
        p.set_defaults(func=func)

    p_synth = sub.add_parser("synth", parents=[common])
    p_synth.add_argument("--spec", type=Path, required=True,
                         help="synthetic panel spec JSON")
    p_synth.set_defaults(func=None, synth=True)

    p_report = sub.add_parser("report", parents=[common])
    p_report.set_defaults(func=None, report=True)
    return parser


def _config_from_args(args) -> RunConfig:
    if args.bins < 1:
        raise ParameterError(f"--bins must be >= 1, got {args.bins}")
    if args.threshold <= 0:
        raise ParameterError(f"--threshold must be positive, got {args.threshold}")
    if args.count < 1:
        raise ParameterError(f"--count must be >= 1, got {args.count}")
    if args.base == "auto":
        base = None
    else:
        try:
            base = float(args.base)
        except ValueError:
            raise ParameterError(
                f"--base must be a number or 'auto', got {args.base!r}"
            ) from None
        if base <= 0:
            raise ParameterError(f"--base must be positive, got {base}")
    ranks = parse_ranks(args.ranks) if args.ranks else None
    return RunConfig(
        input=args.input,
        meta=args.meta,
        exclusions=args.exclusions,
        out=args.out,
        bins=args.bins,
        threshold=args.threshold,
        portfolio_ranks=ranks or DEFAULT_PORTFOLIO_RANKS,
        sector_ranks=ranks or DEFAULT_SECTOR_RANKS,
        pair_count=args.count,
        base=base,
        seed=args.seed,
        full_precision=args.full_precision,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "synth", False):
            cmd_synth(args.spec, args.out, args.seed)
        elif getattr(args, "report", False):
            run_full_report(_config_from_args(args))
        else:
            args.func(_config_from_args(args))
    except (EigenmarketError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        if isinstance(
            exc, (PanelParseError, ParameterError, SyntheticSpecError, FileNotFoundError)
        ):
            return EXIT_USAGE
        return EXIT_DATA
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())
