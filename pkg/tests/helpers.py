"""Shared builders and invariant checkers for the test suite."""

from datetime import date, timedelta

import numpy as np

from eigenmarket import (
    FillFlag,
    InstrumentMeta,
    PricePanel,
    ReturnPanel,
    compute_returns,
    correlation_matrix,
    decompose,
    standardize,
)

START = date(2000, 1, 3)
NOISE = 0.01


def make_instruments(n, exchanges=None, names=None):
    return tuple(
        InstrumentMeta(
            label=i + 1,
            name=names[i] if names else f"inst-{i + 1}",
            exchange=exchanges[i] if exchanges else "TST",
            country="ZZ",
            listing_date=START,
        )
        for i in range(n)
    )


def make_dates(t, start=START):
    return tuple(start + timedelta(days=i) for i in range(t))


def make_price_panel(rows):
    """Panel from a list of price rows; NaN cells become MISSING."""
    prices = np.array(rows, dtype=float)
    n, t = prices.shape
    flags = np.where(
        np.isnan(prices), FillFlag.MISSING, FillFlag.OBSERVED
    ).astype(np.uint8)
    return PricePanel(make_instruments(n), make_dates(t), prices, flags)


def make_return_panel(rows):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    n, t = rows.shape
    return ReturnPanel(make_instruments(n), make_dates(t, START + timedelta(days=1)), rows)


def pipeline(panel, cal=None):
    """panel -> (return panel, correlation matrix, decomposition)."""
    rp = compute_returns(panel, cal)
    cm = correlation_matrix(standardize(rp))
    return rp, cm, decompose(cm)


def check_decomposition(sd, cm=None):
    """Assert the spectral invariants every decomposition must satisfy."""
    w, v = sd.eigenvalues, sd.vectors
    n = sd.n
    assert np.all(np.diff(w) <= 1e-12), "eigenvalues not descending"
    gram = v.T @ v
    assert np.abs(gram - np.eye(n)).max() < 1e-10, "eigenvectors not orthonormal"
    iprs = (v**4).sum(axis=0)
    assert np.all(iprs >= 1.0 / n - 1e-12), "IPR below 1/N"
    assert np.all(iprs <= 1.0 + 1e-12), "IPR above 1"
    from eigenmarket.spectrum import sign_tie_epsilon

    tie = sign_tie_epsilon(n)
    sums = v.sum(axis=0)
    assert np.all(sums >= -tie), "sign convention violated"
    for k in np.flatnonzero(np.abs(sums) <= tie):
        lead = np.argmax(np.abs(v[:, k]))
        assert v[lead, k] > 0.0, "zero-sum tie break violated"
    if cm is not None:
        recon = (v * w) @ v.T
        assert np.abs(recon - cm.c).max() < 1e-8, "reconstruction failed"
        assert abs(w.sum() - n) < 1e-8, "trace mismatch"
